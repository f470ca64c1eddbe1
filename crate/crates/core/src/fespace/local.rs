//! DoF-dual bases of `V_{k-1,m-1}(T; R^2)` and `Σ_{r,k,m}(T; M)`.
//!
//! Both spaces are spanned by monomial fields in the cell frame (centroid,
//! diameter). The DoF functionals are applied to the spanning set and the
//! resulting square matrix is inverted, which gives the dual basis and makes
//! unisolvence a checked property of every cell.
//!
//! Face moments use the global face normal `n_F` and the global face
//! parametrization, so the two cells sharing a face evaluate identical
//! functionals there. Interior moments are normalized by `|T|`, face moments
//! by `|F|`.

use nalgebra::DMatrix;

use super::config::{Family, SpaceConfig};
use super::fields::FieldSet;
use crate::error::{Error, Result};
use crate::mesh::{Point, SimplicialMesh};
use crate::poly::{
    dim_p, exponents, homogeneous_exponents, monomial_index, EdgeBasis, EdgeRule, Frame, Rules, ScaledMonomialBasis,
    TriangleRule,
};

/// Largest accepted condition number of a local DoF matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct LocalFace {
    pub global: Option<usize>,
    /// Endpoints in the global face orientation.
    pub endpoints: [Point; 2],
    /// The global normal `n_F`.
    pub normal: Point,
    /// `n_F · n_{∂T}`.
    pub sign: f64,
    pub length: f64,
    pub boundary: bool,
}

impl LocalFace {
    pub fn edge_basis(&self, degree: i64) -> EdgeBasis {
        EdgeBasis::new(self.endpoints[0], self.endpoints[1], degree)
    }

    pub fn outward_normal(&self) -> Point {
        [self.sign * self.normal[0], self.sign * self.normal[1]]
    }

    pub fn points(&self, rule: &EdgeRule) -> (Vec<Point>, Vec<f64>) {
        rule.map(self.endpoints[0], self.endpoints[1]).unzip()
    }
}

#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub id: usize,
    pub vertices: [Point; 3],
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Local face `i` is opposite local vertex `i`.
    pub faces: [LocalFace; 3],
}

fn signed_area(v: &[Point; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]))
}

impl CellGeometry {
    pub fn from_mesh(mesh: &SimplicialMesh, c: usize) -> Self {
        let vertices = mesh.cell_vertices(c);
        let faces = std::array::from_fn(|i| {
            let (f, sign) = mesh.cell_faces[c][i];
            let face = &mesh.faces[f];
            LocalFace {
                global: Some(f),
                endpoints: mesh.face_endpoints(f),
                normal: face.normal,
                sign,
                length: mesh.face_lengths[f],
                boundary: face.boundary,
            }
        });
        Self {
            id: c,
            vertices,
            area: mesh.cell_area(c),
            centroid: mesh.cell_centroid(c),
            diameter: mesh.cell_diameters[c],
            faces,
        }
    }

    /// A cell outside any mesh; faces use outward normals.
    pub fn standalone(mut vertices: [Point; 3]) -> Result<Self> {
        let mut area = signed_area(&vertices);
        if area < 0.0 {
            vertices.swap(1, 2);
            area = -area;
        }
        if area
            <= 1e-14 * {
                let d = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
                d(vertices[0], vertices[1]).max(d(vertices[1], vertices[2])).powi(2)
            }
        {
            return Err(Error::DegenerateCell { cell: 0, area });
        }
        let faces = std::array::from_fn(|i| {
            let a = vertices[(i + 1) % 3];
            let b = vertices[(i + 2) % 3];
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            LocalFace {
                global: None,
                endpoints: [a, b],
                normal: [(b[1] - a[1]) / len, -(b[0] - a[0]) / len],
                sign: 1.0,
                length: len,
                boundary: false,
            }
        });
        let diameter = faces.iter().map(|f: &LocalFace| f.length).fold(0.0, f64::max);
        Ok(Self {
            id: 0,
            vertices,
            area,
            centroid: [
                (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
                (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
            ],
            diameter,
            faces,
        })
    }

    pub fn frame(&self) -> Frame {
        Frame {
            center: self.centroid,
            scale: self.diameter,
        }
    }

    pub fn points(&self, rule: &TriangleRule) -> (Vec<Point>, Vec<f64>) {
        rule.map(&self.vertices).unzip()
    }

    pub fn basis(&self, degree: i64) -> ScaledMonomialBasis {
        ScaledMonomialBasis::triangle(degree, self.frame())
    }
}

/// Identity coefficients: the scalar monomials of `basis` as a field set.
fn scalar_monomials(basis: ScaledMonomialBasis) -> FieldSet {
    let n = basis.dim();
    FieldSet {
        basis,
        comps: vec![DMatrix::identity(n, n)],
    }
}

/// Moments `(1/|F|) ∫_F trace_c s^j` for `j <= degree`, rows ordered
/// component-major.
fn face_moments(trace: &FieldSet, face: &LocalFace, degree: i64, rule: &EdgeRule) -> DMatrix<f64> {
    let eb = face.edge_basis(degree);
    let nd = eb.dim();
    let (pts, wts) = face.points(rule);
    let sampled = trace.sample(&pts);
    let mut out = DMatrix::zeros(trace.ncomp() * nd, trace.len());
    for (q, (&x, &w)) in pts.iter().zip(&wts).enumerate() {
        let s = eb.eval(x);
        for (c, vals) in sampled.values.iter().enumerate() {
            for j in 0..nd {
                let ws = w * s[j] / face.length;
                for l in 0..trace.len() {
                    out[(c * nd + j, l)] += ws * vals[(q, l)];
                }
            }
        }
    }
    out
}

fn cell_moments(tests: &FieldSet, fields: &FieldSet, cell: &CellGeometry, rule: &TriangleRule) -> DMatrix<f64> {
    let (pts, wts) = cell.points(rule);
    let mut m = tests.sample(&pts).inner(&fields.sample(&pts), &wts);
    m /= cell.area;
    m
}

/// `s(ξ) ξ^⊥` for `s` in `P_deg`: a basis of `P_{deg+1}(R^2) ∩ ker(· x)`
/// in centroid coordinates.
fn rotated_position_fields(basis: &ScaledMonomialBasis, deg: i64) -> FieldSet {
    let exps = exponents(deg);
    let mut set = FieldSet::zeros(basis.clone(), 2, exps.len());
    for (l, &(a, b)) in exps.iter().enumerate() {
        set.comps[0][(monomial_index(a, b + 1), l)] = -1.0;
        set.comps[1][(monomial_index(a + 1, b), l)] = 1.0;
    }
    set
}

fn condition_number(d: &DMatrix<f64>) -> f64 {
    let sv = d.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn dual_coefficients(cell: usize, d: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if d.nrows() != d.ncols() {
        return Err(Error::DofCountMismatch {
            cell,
            dofs: d.nrows(),
            dim: d.ncols(),
        });
    }
    let cond = condition_number(&d);
    if cond.is_nan() || cond >= MAX_CONDITION {
        return Err(Error::IllConditioned { cell, cond });
    }
    let inv = d.try_inverse().ok_or(Error::IllConditioned { cell, cond })?;
    Ok((inv, cond))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VDof {
    /// `(v · n_F, s^j)_F / |F|` on local face `face`.
    Face {
        face: usize,
        j: usize,
    },
    Interior(usize),
    /// Plain coefficient of the constant fields when `(k, m) = (1, 1)`.
    Moment(usize),
}

/// DoF-dual basis of `V_{k-1,m-1}(T; R^2) = P_{k-1}(T; R^2) + x H_{m-2}(T)`.
#[derive(Clone, Debug)]
pub struct LocalVectorBasis {
    pub cell: usize,
    pub k: usize,
    pub m: usize,
    pub fields: FieldSet,
    pub dofs: Vec<VDof>,
    pub condition: f64,
}

impl LocalVectorBasis {
    /// Monomial spanning set: `e_c m_a` for `m_a` in `P_{k-1}`, then
    /// `ξ q` for `q` in `H_{k-1}` when `m = k + 1`.
    pub fn spanning_set(cell: &CellGeometry, k: usize, m: usize) -> FieldSet {
        let basis = cell.basis(m as i64 - 1);
        let low = exponents(k as i64 - 1);
        let extra = if m == k + 1 {
            homogeneous_exponents(k as i64 - 1)
        } else {
            Vec::new()
        };
        let mut set = FieldSet::zeros(basis, 2, 2 * low.len() + extra.len());
        let mut col = 0;
        for c in 0..2 {
            for &(a, b) in &low {
                set.comps[c][(monomial_index(a, b), col)] = 1.0;
                col += 1;
            }
        }
        for &(a, b) in &extra {
            set.comps[0][(monomial_index(a + 1, b), col)] = 1.0;
            set.comps[1][(monomial_index(a, b + 1), col)] = 1.0;
            col += 1;
        }
        set
    }

    /// Test fields of the interior moments: scaled gradients of the
    /// non-constant members of `P_{m-2}`, then `s ξ^⊥` for `s` in `P_{k-3}`.
    pub fn interior_tests(cell: &CellGeometry, k: usize, m: usize) -> FieldSet {
        let tbasis = cell.basis((m as i64 - 1).max(1));
        let scalars = scalar_monomials(cell.basis(m as i64 - 2));
        let mut grads = FieldSet::zeros(tbasis.clone(), 2, 0);
        if scalars.len() > 1 {
            let mut g = scalars.grad();
            for c in &mut g.comps {
                *c *= cell.diameter;
            }
            let cols: Vec<usize> = (1..g.len()).collect();
            grads = embed(&g.select(&cols), &tbasis);
        }
        grads.concat(&rotated_position_fields(&tbasis, k as i64 - 3))
    }

    /// Evaluates the DoF functionals on `fields`; rows follow [`Self::dof_layout`].
    pub fn apply_dofs(cell: &CellGeometry, k: usize, m: usize, fields: &FieldSet, rules: &Rules) -> DMatrix<f64> {
        let mut blocks = Vec::new();
        for face in &cell.faces {
            blocks.push(face_moments(
                &fields.normal_trace(face.normal),
                face,
                k as i64 - 1,
                &rules.edge,
            ));
        }
        let tests = Self::interior_tests(cell, k, m);
        if !tests.is_empty() {
            blocks.push(cell_moments(&tests, fields, cell, &rules.triangle));
        }
        stack(&blocks, fields.len())
    }

    pub fn dof_layout(cell: &CellGeometry, k: usize, m: usize) -> Vec<VDof> {
        let _ = cell;
        let mut dofs = Vec::new();
        for face in 0..3 {
            for j in 0..k {
                dofs.push(VDof::Face { face, j });
            }
        }
        let interior = (dim_p(m as i64 - 2).max(1) - 1) + dim_p(k as i64 - 3);
        dofs.extend((0..interior).map(VDof::Interior));
        dofs
    }

    pub fn new(cell: &CellGeometry, k: usize, m: usize, rules: &Rules) -> Result<Self> {
        let span = Self::spanning_set(cell, k, m);
        if k == 1 && m == 1 {
            return Ok(Self {
                cell: cell.id,
                k,
                m,
                fields: span,
                dofs: vec![VDof::Moment(0), VDof::Moment(1)],
                condition: 1.0,
            });
        }
        let d = Self::apply_dofs(cell, k, m, &span, rules);
        let (inv, condition) = dual_coefficients(cell.id, d)?;
        Ok(Self {
            cell: cell.id,
            k,
            m,
            fields: span.combine(&inv),
            dofs: Self::dof_layout(cell, k, m),
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Whether the basis is DoF-dual (false only for `(k, m) = (1, 1)`).
    pub fn has_dofs(&self) -> bool {
        !(self.k == 1 && self.m == 1)
    }
}

/// Re-expresses fields in a (larger) monomial basis on the same frame.
fn embed(set: &FieldSet, target: &ScaledMonomialBasis) -> FieldSet {
    let n = target.dim();
    assert!(set.basis.dim() <= n);
    let comps = set
        .comps
        .iter()
        .map(|c| {
            let mut out = DMatrix::zeros(n, c.ncols());
            out.rows_mut(0, c.nrows()).copy_from(c);
            out
        })
        .collect();
    FieldSet {
        basis: target.clone(),
        comps,
    }
}

fn stack(blocks: &[DMatrix<f64>], ncols: usize) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, ncols);
    let mut r = 0;
    for b in blocks {
        out.rows_mut(r, b.nrows()).copy_from(b);
        r += b.nrows();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaDof {
    /// `((τ n_F)_comp, s^j)_F / |F|` on local face `face`.
    Face {
        face: usize,
        comp: usize,
        j: usize,
    },
    Interior(usize),
}

/// DoF-dual basis of `Σ_{r,k,m}(T; M)`.
#[derive(Clone, Debug)]
pub struct LocalTensorBasis {
    pub cell: usize,
    pub cfg: SpaceConfig,
    pub fields: FieldSet,
    pub dofs: Vec<SigmaDof>,
    pub condition: f64,
}

impl LocalTensorBasis {
    pub fn spanning_set(cell: &CellGeometry, cfg: SpaceConfig) -> FieldSet {
        let k = cfg.k() as i64;
        let basis = cell.basis(cfg.sigma_degree() as i64);
        let mut cols: Vec<[Vec<(usize, usize)>; 4]> = Vec::new();
        let single = |c: usize, i: usize| {
            let mut e: [Vec<(usize, usize)>; 4] = Default::default();
            e[c].push((i, 0));
            e
        };
        match cfg.family() {
            Family::Bdm | Family::Enriched => {
                for c in 0..4 {
                    for &(a, b) in &exponents(k) {
                        cols.push(single(c, monomial_index(a, b)));
                    }
                }
                if cfg.family() == Family::Enriched {
                    for &(a, b) in &homogeneous_exponents(k - 1) {
                        let mut e: [Vec<(usize, usize)>; 4] = Default::default();
                        e[0].push((monomial_index(a + 2, b), 0));
                        e[1].push((monomial_index(a + 1, b + 1), 0));
                        e[2].push((monomial_index(a + 1, b + 1), 0));
                        e[3].push((monomial_index(a, b + 2), 0));
                        cols.push(e);
                    }
                }
            }
            Family::RaviartThomas => {
                for row in 0..2 {
                    for c in 0..2 {
                        for &(a, b) in &exponents(k - 1) {
                            cols.push(single(2 * row + c, monomial_index(a, b)));
                        }
                    }
                    for &(a, b) in &homogeneous_exponents(k - 1) {
                        let mut e: [Vec<(usize, usize)>; 4] = Default::default();
                        e[2 * row].push((monomial_index(a + 1, b), 0));
                        e[2 * row + 1].push((monomial_index(a, b + 1), 0));
                        cols.push(e);
                    }
                }
            }
        }
        let mut set = FieldSet::zeros(basis, 4, cols.len());
        for (l, entries) in cols.iter().enumerate() {
            for (c, list) in entries.iter().enumerate() {
                for &(i, _) in list {
                    set.comps[c][(i, l)] = 1.0;
                }
            }
        }
        set
    }

    pub fn apply_dofs(cell: &CellGeometry, cfg: SpaceConfig, fields: &FieldSet, rules: &Rules) -> DMatrix<f64> {
        let mut blocks = Vec::new();
        for face in &cell.faces {
            blocks.push(face_moments(
                &fields.normal_trace(face.normal),
                face,
                cfg.r() as i64,
                &rules.edge,
            ));
        }
        let tbasis = cell.basis(cfg.sigma_degree() as i64);
        // grad of the V spanning set, constants dropped
        let vspan = LocalVectorBasis::spanning_set(cell, cfg.k(), cfg.m());
        let c1 = dim_p(cfg.k() as i64 - 1);
        let keep: Vec<usize> = (0..vspan.len()).filter(|&j| j != 0 && j != c1).collect();
        if !keep.is_empty() {
            let mut g = vspan.select(&keep).grad();
            for c in &mut g.comps {
                *c *= cell.diameter;
            }
            blocks.push(cell_moments(&embed(&g, &tbasis), fields, cell, &rules.triangle));
        }
        let ker = rotated_position_fields(&tbasis, cfg.r() as i64 - 2);
        if !ker.is_empty() {
            let n = ker.len();
            let mut tens = FieldSet::zeros(tbasis.clone(), 4, 2 * n);
            for row in 0..2 {
                for c in 0..2 {
                    tens.comps[2 * row + c].columns_mut(row * n, n).copy_from(&ker.comps[c]);
                }
            }
            blocks.push(cell_moments(&tens, fields, cell, &rules.triangle));
        }
        stack(&blocks, fields.len())
    }

    pub fn dof_layout(cfg: SpaceConfig) -> Vec<SigmaDof> {
        let mut dofs = Vec::new();
        for face in 0..3 {
            for comp in 0..2 {
                for j in 0..=cfg.r() {
                    dofs.push(SigmaDof::Face { face, comp, j });
                }
            }
        }
        dofs.extend((0..cfg.sigma_interior_dofs()).map(SigmaDof::Interior));
        dofs
    }

    pub fn new(cell: &CellGeometry, cfg: SpaceConfig, rules: &Rules) -> Result<Self> {
        let span = Self::spanning_set(cell, cfg);
        let d = Self::apply_dofs(cell, cfg, &span, rules);
        let (inv, condition) = dual_coefficients(cell.id, d)?;
        Ok(Self {
            cell: cell.id,
            cfg,
            fields: span.combine(&inv),
            dofs: Self::dof_layout(cfg),
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }
}

/// Matrix sending `Σ` coefficients to the `V` coefficients of their divergence.
pub fn divergence_local(
    v: &LocalVectorBasis,
    sigma: &LocalTensorBasis,
    cell: &CellGeometry,
    rules: &Rules,
) -> DMatrix<f64> {
    let (pts, wts) = cell.points(&rules.triangle);
    let sv = v.fields.sample(&pts);
    let mass = sv.inner(&sv, &wts);
    let rhs = sv.inner(&sigma.fields.divergence().sample(&pts), &wts);
    mass.cholesky().expect("V mass matrix is SPD").solve(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> CellGeometry {
        CellGeometry::standalone([[0.1, 0.2], [0.9, 0.35], [0.3, 1.1]]).unwrap()
    }

    fn rules(cfg: SpaceConfig) -> Rules {
        Rules::new(cfg.local_quadrature_degree()).unwrap()
    }

    #[test]
    fn vector_dimensions() {
        let c = cell();
        for (k, m, dim) in [(1, 1, 2), (1, 2, 3), (2, 2, 6), (2, 3, 8), (3, 3, 12), (3, 4, 15)] {
            let r = Rules::new(2 * m + 2).unwrap();
            let b = LocalVectorBasis::new(&c, k, m, &r).unwrap();
            assert_eq!(b.dim(), dim, "(k, m) = ({k}, {m})");
            assert_eq!(b.dim(), SpaceConfig::new(k, k, m).unwrap().v_dim());
        }
    }

    #[test]
    fn vector_duality() {
        let c = cell();
        for (k, m) in [(1, 2), (2, 2), (2, 3), (3, 3), (3, 4)] {
            let r = Rules::new(2 * m + 2).unwrap();
            let b = LocalVectorBasis::new(&c, k, m, &r).unwrap();
            let d = LocalVectorBasis::apply_dofs(&c, k, m, &b.fields, &r);
            let err = (d - DMatrix::identity(b.dim(), b.dim())).abs().max();
            assert!(err < 1e-10, "(k, m) = ({k}, {m}): {err}");
        }
    }

    #[test]
    fn tensor_duality_and_dimensions() {
        let c = cell();
        for cfg in SpaceConfig::all_up_to(3) {
            let r = rules(cfg);
            let b = LocalTensorBasis::new(&c, cfg, &r).unwrap();
            assert_eq!(b.dim(), cfg.sigma_dim());
            let d = LocalTensorBasis::apply_dofs(&c, cfg, &b.fields, &r);
            let err = (d - DMatrix::identity(b.dim(), b.dim())).abs().max();
            assert!(err < 1e-10, "{cfg}: {err}");
        }
    }

    #[test]
    fn divergence_of_constant_and_position_tensor() {
        let c = cell();
        let cfg = SpaceConfig::new(1, 1, 2).unwrap();
        let span = LocalTensorBasis::spanning_set(&c, cfg);
        // column 0 is the constant e_00; the last column is ξ ⊗ ξ
        let div = span.divergence();
        assert!(div.comps.iter().all(|m| m.column(0).abs().max() == 0.0));
        let last = span.len() - 1;
        let x = [0.4, 0.5];
        let v = div.eval(x);
        let xi = c.frame().local(x);
        let h = c.diameter;
        // div(ξ⊗ξ) = 3 ξ / h in physical coordinates
        assert!((v[(0, last)] - 3.0 * xi[0] / h).abs() < 1e-12);
        assert!((v[(1, last)] - 3.0 * xi[1] / h).abs() < 1e-12);
    }

    #[test]
    fn normal_traces_have_degree_r() {
        let c = cell();
        for cfg in SpaceConfig::all_up_to(3) {
            let b = LocalTensorBasis::new(&c, cfg, &rules(cfg)).unwrap();
            let r = cfg.r();
            for face in &c.faces {
                let tr = b.fields.normal_trace(face.normal);
                // (r+1)-th forward difference over r+2 equispaced points
                let pts: Vec<Point> = (0..r + 2)
                    .map(|i| {
                        let t = i as f64 / (r + 1) as f64;
                        let [a, bb] = face.endpoints;
                        [a[0] + t * (bb[0] - a[0]), a[1] + t * (bb[1] - a[1])]
                    })
                    .collect();
                let vals: Vec<DMatrix<f64>> = pts.iter().map(|&x| tr.eval(x)).collect();
                let mut binom = 1.0;
                let mut diff = DMatrix::zeros(2, b.dim());
                for (i, v) in vals.iter().enumerate() {
                    let sign = if (r + 1 - i) % 2 == 0 { 1.0 } else { -1.0 };
                    diff += v * (sign * binom);
                    binom = binom * (r + 1 - i) as f64 / (i + 1) as f64;
                }
                let scale = vals.iter().map(|v| v.abs().max()).fold(0.0, f64::max);
                assert!(diff.abs().max() < 1e-10 * scale.max(1.0), "{cfg}");
            }
        }
    }

    #[test]
    fn divergence_is_onto() {
        let c = cell();
        for cfg in SpaceConfig::all_up_to(3) {
            let r = rules(cfg);
            let v = LocalVectorBasis::new(&c, cfg.k(), cfg.m(), &r).unwrap();
            let s = LocalTensorBasis::new(&c, cfg, &r).unwrap();
            let d = divergence_local(&v, &s, &c, &r);
            let sv = d.singular_values();
            let rank = sv.iter().filter(|&&x| x > 1e-10 * sv.max()).count();
            assert_eq!(rank, v.dim(), "{cfg}");
        }
    }

    #[test]
    fn standalone_rejects_degenerate() {
        assert!(CellGeometry::standalone([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }
}
