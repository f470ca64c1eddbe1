//! Conforming triangulations with oriented faces.
//!
//! Every face carries a fixed unit normal `n_F`. On the boundary it points
//! out of the domain; on interior faces it points from the cell with the
//! lower index towards the cell with the higher index. Each cell stores, for
//! its three local faces, the global face id together with the sign
//! `n_F · n_{∂T}`.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Debug)]
pub struct Face {
    /// Endpoints in the order that fixes the global tangent `b - a`.
    pub vertices: [usize; 2],
    pub normal: Point,
    pub boundary: bool,
    /// One or two `(cell, local face)` pairs; the first one has sign +1.
    pub cells: Vec<(usize, usize)>,
}

/// Incidence data needed to evaluate jumps on a face.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpContext {
    pub cells: Vec<usize>,
    pub signs: Vec<f64>,
    pub normal: Point,
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub cells: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    /// Local face `i` is the edge opposite local vertex `i`.
    pub cell_faces: Vec<[(usize, f64); 3]>,
    pub cell_diameters: Vec<f64>,
    pub face_lengths: Vec<f64>,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

impl SimplicialMesh {
    /// Builds the face structure of a triangulation from its cells.
    ///
    /// Cells are reoriented counterclockwise if necessary.
    pub fn from_cells(vertices: Vec<Point>, mut cells: Vec<[usize; 3]>) -> Result<Self> {
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references a missing vertex")));
            }
            let [a, b, d] = cell.map(|v| vertices[v]);
            let e1 = sub(b, a);
            let e2 = sub(d, a);
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            if det.abs() < 1e-300 {
                return Err(Error::DegenerateCell {
                    cell: c,
                    area: 0.5 * det.abs(),
                });
            }
            if det < 0.0 {
                cell.swap(1, 2);
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_faces = vec![[(0usize, 1.0f64); 3]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..3 {
                let a = cell[(i + 1) % 3];
                let b = cell[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let f = *lookup.entry(key).or_insert_with(|| {
                    faces.push(Face {
                        vertices: [a, b],
                        normal: [0.0, 0.0],
                        boundary: true,
                        cells: Vec::new(),
                    });
                    faces.len() - 1
                });
                if faces[f].cells.len() == 2 {
                    return Err(Error::InvalidMesh(format!("face {f} shared by more than two cells")));
                }
                faces[f].cells.push((c, i));
                cell_faces[c][i].0 = f;
            }
        }

        for (f, face) in faces.iter_mut().enumerate() {
            face.boundary = face.cells.len() == 1;
            face.cells.sort_unstable();
            let (c0, i0) = face.cells[0];
            let cell = cells[c0];
            let a = vertices[cell[(i0 + 1) % 3]];
            let b = vertices[cell[(i0 + 2) % 3]];
            let t = sub(b, a);
            let len = norm(t);
            if len == 0.0 {
                return Err(Error::InvalidMesh(format!("face {f} has zero length")));
            }
            // outward normal of a counterclockwise cell
            face.normal = [t[1] / len, -t[0] / len];
            for (slot, &(c, i)) in face.cells.iter().enumerate() {
                cell_faces[c][i] = (f, if slot == 0 { 1.0 } else { -1.0 });
            }
        }

        let face_lengths: Vec<f64> = faces
            .iter()
            .map(|f| norm(sub(vertices[f.vertices[1]], vertices[f.vertices[0]])))
            .collect();
        let cell_diameters = cell_faces
            .iter()
            .map(|cf| cf.iter().map(|&(f, _)| face_lengths[f]).fold(0.0, f64::max))
            .collect();

        Ok(Self {
            vertices,
            cells,
            faces,
            cell_faces,
            cell_diameters,
            face_lengths,
        })
    }

    /// Uniform `n x n` triangulation of the unit square, each square split
    /// along the diagonal from its lower-left to its upper-right corner.
    pub fn uniform_unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("the number of subdivisions must be positive".into()));
        }
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::from_cells(vertices, cells)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.boundary).count()
    }

    pub fn cell_vertices(&self, c: usize) -> [Point; 3] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_vertices(c);
        let e1 = sub(b, a);
        let e2 = sub(d, a);
        0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_vertices(c);
        [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
    }

    /// Endpoints of a face in its global orientation.
    pub fn face_endpoints(&self, f: usize) -> [Point; 2] {
        self.faces[f].vertices.map(|v| self.vertices[v])
    }

    pub fn jump_context(&self, f: usize) -> Result<JumpContext> {
        let face = self.faces.get(f).ok_or(Error::InvalidFace(f))?;
        let cells: Vec<usize> = face.cells.iter().map(|&(c, _)| c).collect();
        let signs = face.cells.iter().map(|&(c, i)| self.cell_faces[c][i].1).collect();
        Ok(JumpContext {
            cells,
            signs,
            normal: face.normal,
        })
    }

    /// Mesh size `max h_T`.
    pub fn h(&self) -> f64 {
        self.cell_diameters.iter().cloned().fold(0.0, f64::max)
    }

    /// Writes the plain node/element listing: `x y` per vertex, then
    /// `i j k` per cell, with a blank line in between.
    pub fn write_listing<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "{} {}", v[0], v[1])?;
        }
        writeln!(out)?;
        for c in &self.cells {
            writeln!(out, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}
