//! Gauss rules on edges and collapsed (Duffy) product rules on triangles.

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Highest polynomial degree for which rules are generated.
pub const MAX_DEGREE: usize = 60;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=npts {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[npts - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[npts - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Rule on an edge: affine parameters in `[0, 1]` and weights summing to 1.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub degree: usize,
    pub params: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedQuadrature(degree));
        }
        let (params, weights) = gauss_legendre_unit(degree / 2 + 1);
        Ok(Self {
            degree,
            params,
            weights,
        })
    }

    /// Physical points and weights (summing to the edge length).
    pub fn map(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        self.params
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
    }
}

/// Rule on a triangle: barycentric points and weights summing to 1.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedQuadrature(degree));
        }
        // the collapse adds one power of (1 - u) in the first direction
        let nu = degree.div_ceil(2) + 1;
        let nv = degree / 2 + 1;
        let (u, wu) = gauss_legendre_unit(nu);
        let (v, wv) = gauss_legendre_unit(nv);
        let mut points = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for (&ui, &wi) in u.iter().zip(&wu) {
            for (&vj, &wj) in v.iter().zip(&wv) {
                let x = ui;
                let y = vj * (1.0 - ui);
                points.push([1.0 - x - y, x, y]);
                weights.push(2.0 * wi * wj * (1.0 - ui));
            }
        }
        Ok(Self {
            degree,
            points,
            weights,
        })
    }

    /// Physical points and weights (summing to the triangle area).
    pub fn map(&self, verts: &[Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let [a, b, c] = *verts;
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            (
                [
                    l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                    l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
                ],
                w * area,
            )
        })
    }

    pub fn integrate<F: Fn(Point) -> f64>(&self, verts: &[Point; 3], f: F) -> f64 {
        self.map(verts).map(|(x, w)| w * f(x)).sum()
    }
}

/// Edge and triangle rules of one degree, built together.
#[derive(Clone, Debug)]
pub struct Rules {
    pub edge: EdgeRule,
    pub triangle: TriangleRule,
}

impl Rules {
    pub fn new(degree: usize) -> Result<Self> {
        Ok(Self {
            edge: EdgeRule::new(degree)?,
            triangle: TriangleRule::new(degree)?,
        })
    }
}
