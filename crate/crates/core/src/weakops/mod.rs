//! Weak gradient, weak Hessian, projections and interpolations.
//!
//! Local weak Galerkin data on a cell is ordered as `u_0` (scaled monomials of
//! `P_{m-2}(T)`), then for each local face `u_b` (edge monomials `s^j`,
//! `j < k`) followed by `u_g` (`e_c s^j`, `j <= r`, index `c (r + 1) + j`).
//! Face data is expressed in the global face parametrization, so both cells
//! of a face see the same unknowns.

mod nc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fespace::{
    divergence_local, CellGeometry, CoefficientField, FieldSet, GlobalMaps, LocalTensorBasis, LocalVectorBasis,
    Sampled, SpaceConfig, SpaceTag,
};
use crate::mesh::{Point, SimplicialMesh};
use crate::poly::{EdgeRule, Rules, TriangleRule};

pub use nc::NcReconstruction;

pub type ScalarFn<'a> = &'a (dyn Fn(Point) -> f64 + Sync);
pub type VectorFn<'a> = &'a (dyn Fn(Point) -> [f64; 2] + Sync);

/// Offsets of the local weak Galerkin unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WgLayout {
    pub n0: usize,
    pub nb: usize,
    pub ng: usize,
}

impl WgLayout {
    pub fn new(cfg: SpaceConfig) -> Self {
        Self {
            n0: cfg.u0_dim(),
            nb: cfg.ub_dim(),
            ng: cfg.ug_dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.n0 + 3 * (self.nb + self.ng)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ub(&self, face: usize) -> std::ops::Range<usize> {
        let start = self.n0 + face * (self.nb + self.ng);
        start..start + self.nb
    }

    pub fn ug(&self, face: usize) -> std::ops::Range<usize> {
        let start = self.n0 + face * (self.nb + self.ng) + self.nb;
        start..start + self.ng
    }
}

fn scalar_fields(geom: &CellGeometry, degree: i64) -> FieldSet {
    let basis = geom.basis(degree);
    let n = basis.dim();
    FieldSet {
        basis,
        comps: vec![DMatrix::identity(n, n)],
    }
}

fn sample_vector_fn(g: VectorFn, pts: &[Point]) -> Sampled {
    let mut values = vec![DMatrix::zeros(pts.len(), 1); 2];
    for (q, &x) in pts.iter().enumerate() {
        let v = g(x);
        values[0][(q, 0)] = v[0];
        values[1][(q, 0)] = v[1];
    }
    Sampled { values }
}

fn sample_scalar_fn(s: ScalarFn, pts: &[Point]) -> Sampled {
    Sampled {
        values: vec![DMatrix::from_iterator(pts.len(), 1, pts.iter().map(|&x| s(x)))],
    }
}

/// Everything the schemes need from one cell.
#[derive(Clone, Debug)]
pub struct CellWeakData {
    pub geom: CellGeometry,
    pub cfg: SpaceConfig,
    pub layout: WgLayout,
    pub v: LocalVectorBasis,
    pub sigma: LocalTensorBasis,
    pub mass_v: DMatrix<f64>,
    pub mass_sigma: DMatrix<f64>,
    /// Mass matrix of the `u_0` monomials.
    pub mass_p: DMatrix<f64>,
    /// `Σ` coefficients to `V` coefficients of the divergence.
    pub div: DMatrix<f64>,
    /// `(div ψ_i, m_a)` for `V` basis fields and `u_0` monomials.
    pub div_v_p: DMatrix<f64>,
    /// Local WG data to `V` coefficients of `∇_w`.
    pub grad_w: DMatrix<f64>,
    /// Local WG data to `Σ` coefficients of `∇²_w`.
    pub hess_w: DMatrix<f64>,
}

fn spd_inverse_apply(m: &DMatrix<f64>, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(m.clone().cholesky().ok_or(Error::NotSpd)?.solve(&rhs))
}

impl CellWeakData {
    pub fn new(mesh: &SimplicialMesh, c: usize, cfg: SpaceConfig, rules: &Rules) -> Result<Self> {
        Self::from_geometry(CellGeometry::from_mesh(mesh, c), cfg, rules)
    }

    pub fn from_geometry(geom: CellGeometry, cfg: SpaceConfig, rules: &Rules) -> Result<Self> {
        let v = LocalVectorBasis::new(&geom, cfg.k(), cfg.m(), rules)?;
        let sigma = LocalTensorBasis::new(&geom, cfg, rules)?;
        let layout = WgLayout::new(cfg);
        let (pts, wts) = geom.points(&rules.triangle);
        let sv = v.fields.sample(&pts);
        let ss = sigma.fields.sample(&pts);
        let mass_v = sv.inner(&sv, &wts);
        let mass_sigma = ss.inner(&ss, &wts);
        let p = scalar_fields(&geom, cfg.m() as i64 - 2);
        let sp = p.sample(&pts);
        let mass_p = sp.inner(&sp, &wts);
        let div = divergence_local(&v, &sigma, &geom, rules);

        let r = cfg.r();
        let div_v_p = v.fields.divergence().sample(&pts).inner(&sp, &wts);
        let mut rg = DMatrix::zeros(v.dim(), layout.len());
        rg.columns_mut(0, layout.n0).copy_from(&(-&div_v_p));
        let mut rh = DMatrix::zeros(sigma.dim(), layout.len());
        for (i, face) in geom.faces.iter().enumerate() {
            let (fp, fw) = face.points(&rules.edge);
            let eb = face.edge_basis(r.max(cfg.k() - 1) as i64);
            let vt = v.fields.normal_trace(face.normal).sample(&fp);
            let st = sigma.fields.normal_trace(face.normal).sample(&fp);
            let ub = layout.ub(i);
            let ug = layout.ug(i);
            for (q, (&x, &w)) in fp.iter().zip(&fw).enumerate() {
                let s = eb.eval(x);
                let ws = face.sign * w;
                for j in 0..layout.nb {
                    for l in 0..v.dim() {
                        rg[(l, ub.start + j)] += ws * s[j] * vt.values[0][(q, l)];
                    }
                }
                for c in 0..2 {
                    for j in 0..=r {
                        for l in 0..sigma.dim() {
                            rh[(l, ug.start + c * (r + 1) + j)] += ws * s[j] * st.values[c][(q, l)];
                        }
                    }
                }
            }
        }
        let grad_w = spd_inverse_apply(&mass_v, rg)?;
        rh -= div.transpose() * &mass_v * &grad_w;
        let hess_w = spd_inverse_apply(&mass_sigma, rh)?;
        Ok(Self {
            geom,
            cfg,
            layout,
            v,
            sigma,
            mass_v,
            mass_sigma,
            mass_p,
            div,
            div_v_p,
            grad_w,
            hess_w,
        })
    }

    pub fn weak_gradient(&self, local: &DVector<f64>) -> DVector<f64> {
        &self.grad_w * local
    }

    pub fn weak_hessian(&self, local: &DVector<f64>) -> DVector<f64> {
        &self.hess_w * local
    }

    /// `L^2` projection onto `V_{k-1,m-1}(T)`.
    pub fn project_to_v(&self, g: VectorFn, rule: &TriangleRule) -> DVector<f64> {
        let (pts, wts) = self.geom.points(rule);
        let rhs = self.v.fields.sample(&pts).inner(&sample_vector_fn(g, &pts), &wts);
        let sol = self
            .mass_v
            .clone()
            .cholesky()
            .expect("V mass matrix is SPD")
            .solve(&rhs);
        sol.column(0).into_owned()
    }

    /// `L^2` projection onto `P_{m-2}(T)` (empty for `m = 1`).
    pub fn project_scalar(&self, s: ScalarFn, rule: &TriangleRule) -> DVector<f64> {
        if self.layout.n0 == 0 {
            return DVector::zeros(0);
        }
        let (pts, wts) = self.geom.points(rule);
        let p = scalar_fields(&self.geom, self.cfg.m() as i64 - 2);
        let rhs = p.sample(&pts).inner(&sample_scalar_fn(s, &pts), &wts);
        let sol = self
            .mass_p
            .clone()
            .cholesky()
            .expect("P mass matrix is SPD")
            .solve(&rhs);
        sol.column(0).into_owned()
    }

    /// Local interpolation `(Q_{m-2} u, Q_b u, Q_r ∇u)` on all three faces.
    pub fn interpolate(&self, u: ScalarFn, grad: VectorFn, rules: &Rules) -> DVector<f64> {
        let cfg = self.cfg;
        let mut out = DVector::zeros(self.layout.len());
        let u0 = self.project_scalar(u, &rules.triangle);
        out.rows_mut(0, u0.len()).copy_from(&u0);
        for (i, face) in self.geom.faces.iter().enumerate() {
            let [a, b] = face.endpoints;
            for (j, v) in self.layout.ub(i).zip(project_edge(a, b, cfg.k() - 1, u, &rules.edge)) {
                out[j] = v;
            }
            for comp in 0..2 {
                let g = move |x: Point| grad(x)[comp];
                let start = self.layout.ug(i).start + comp * (cfg.r() + 1);
                for (j, v) in project_edge(a, b, cfg.r(), &g, &rules.edge).into_iter().enumerate() {
                    out[start + j] = v;
                }
            }
        }
        out
    }

    /// Scalar monomials carrying `u_0`.
    pub fn u0_fields(&self) -> FieldSet {
        scalar_fields(&self.geom, self.cfg.m() as i64 - 2)
    }

    /// Value of `u_0` at `x` from its coefficients.
    pub fn eval_u0(&self, coeffs: &[f64], x: Point) -> f64 {
        self.geom
            .basis(self.cfg.m() as i64 - 2)
            .eval(x)
            .iter()
            .zip(coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Local data of every cell, built in parallel.
pub fn build_cells(mesh: &SimplicialMesh, cfg: SpaceConfig) -> Result<Vec<CellWeakData>> {
    let rules = Rules::new(cfg.local_quadrature_degree())?;
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| CellWeakData::new(mesh, c, cfg, &rules))
        .collect()
}

/// `L^2` projection onto `P_deg(F)` in the edge monomials of `(a, b)`.
pub fn project_edge(a: Point, b: Point, deg: usize, s: ScalarFn, rule: &EdgeRule) -> Vec<f64> {
    let eb = crate::poly::EdgeBasis::new(a, b, deg as i64);
    let n = eb.dim();
    let mut mass = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (x, w) in rule.map(a, b) {
        let e = eb.eval(x);
        let v = s(x);
        for i in 0..n {
            rhs[i] += w * e[i] * v;
            for j in 0..n {
                mass[(i, j)] += w * e[i] * e[j];
            }
        }
    }
    mass.cholesky()
        .expect("edge mass matrix is SPD")
        .solve(&rhs)
        .iter()
        .copied()
        .collect()
}

/// Weak Galerkin interpolation `(Q_{m-2} u, Q_b u, Q_r ∇u)`; boundary faces are skipped.
pub fn interpolate_wg(
    maps: &GlobalMaps,
    cells: &[CellWeakData],
    u: ScalarFn,
    grad: VectorFn,
    degree: usize,
) -> Result<CoefficientField> {
    let rules = Rules::new(degree)?;
    let mut out = CoefficientField::zeros(&maps.wg);
    for (c, data) in cells.iter().enumerate() {
        let local = data.interpolate(u, grad, &rules);
        for (l, d) in maps.wg.cell_dofs[c].iter().enumerate() {
            if let Some(g) = d {
                out.values[*g] = local[l];
            }
        }
    }
    Ok(out)
}

/// Canonical `H(div)` interpolation onto `V^div` from the DoFs of `V_{k-1,m-1}`.
pub fn canonical_interp_v(
    mesh: &SimplicialMesh,
    maps: &GlobalMaps,
    cells: &[CellWeakData],
    w: VectorFn,
    degree: usize,
) -> Result<CoefficientField> {
    let cfg = maps.cfg;
    if cfg.m() < 2 {
        return Err(Error::Unsupported("canonical V interpolation needs m >= 2".into()));
    }
    let rules = Rules::new(degree)?;
    let k = cfg.k();
    let mut out = CoefficientField::zeros(&maps.v_div);
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b] = mesh.face_endpoints(f);
        let n = face.normal;
        let wn = move |x: Point| {
            let v = w(x);
            v[0] * n[0] + v[1] * n[1]
        };
        let eb = crate::poly::EdgeBasis::new(a, b, k as i64 - 1);
        let len = mesh.face_lengths[f];
        let mut mom = vec![0.0; k];
        for (x, wt) in rules.edge.map(a, b) {
            let s = eb.eval(x);
            let val = wn(x);
            for j in 0..k {
                mom[j] += wt * s[j] * val / len;
            }
        }
        for (j, m) in mom.into_iter().enumerate() {
            out.values[f * k + j] = m;
        }
    }
    for (c, data) in cells.iter().enumerate() {
        let tests = LocalVectorBasis::interior_tests(&data.geom, k, cfg.m());
        if tests.is_empty() {
            continue;
        }
        let (pts, wts) = data.geom.points(&rules.triangle);
        let mom = tests.sample(&pts).inner(&sample_vector_fn(w, &pts), &wts) / data.geom.area;
        for i in 0..tests.len() {
            let l = 3 * k + i;
            out.values[maps.v_div.cell_dofs[c][l].expect("V^div dof")] = mom[(i, 0)];
        }
    }
    Ok(out)
}

/// Right-hand side `<<f, v>>` on the weak Galerkin unknowns: `(f, v_0)` for
/// `k >= 2`, `(f, I^NC v)` for `k = 1`.
pub fn load_vector(maps: &GlobalMaps, cells: &[CellWeakData], f: ScalarFn, degree: usize) -> Result<Vec<f64>> {
    let rules = Rules::new(degree)?;
    let locals: Vec<DVector<f64>> = cells
        .par_iter()
        .map(|data| local_load(data, f, &rules.triangle))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; maps.wg.ndofs];
    for (c, loc) in locals.iter().enumerate() {
        for (l, d) in maps.wg.cell_dofs[c].iter().enumerate() {
            if let Some(g) = d {
                out[*g] += loc[l];
            }
        }
    }
    Ok(out)
}

/// `(f, m_a)` for the `P_{m-2}` monomials of every cell, in the broken numbering.
pub fn poly_load(maps: &GlobalMaps, cells: &[CellWeakData], f: ScalarFn, degree: usize) -> Result<Vec<f64>> {
    let rules = Rules::new(degree)?;
    let locals: Vec<DVector<f64>> = cells
        .par_iter()
        .map(|d| cell_poly_load(d, f, &rules.triangle))
        .collect();
    let mut out = vec![0.0; maps.poly.ndofs];
    for (c, loc) in locals.iter().enumerate() {
        for (l, d) in maps.poly.cell_dofs[c].iter().enumerate() {
            out[d.expect("broken dof")] = loc[l];
        }
    }
    Ok(out)
}

fn cell_poly_load(data: &CellWeakData, f: ScalarFn, rule: &TriangleRule) -> DVector<f64> {
    let (pts, wts) = data.geom.points(rule);
    data.u0_fields()
        .sample(&pts)
        .inner(&sample_scalar_fn(f, &pts), &wts)
        .column(0)
        .into_owned()
}

fn local_load(data: &CellWeakData, f: ScalarFn, rule: &TriangleRule) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(data.layout.len());
    if data.cfg.k() >= 2 {
        out.rows_mut(0, data.layout.n0)
            .copy_from(&cell_poly_load(data, f, rule));
    } else {
        let (pts, wts) = data.geom.points(rule);
        let nc = NcReconstruction::new(data)?;
        let m = nc.shape.sample(&pts).inner(&sample_scalar_fn(f, &pts), &wts);
        out = nc.operator.transpose() * m.column(0);
    }
    Ok(out)
}

/// Field values of a local coefficient vector at a point.
pub fn eval_fields(fields: &FieldSet, coeffs: &DVector<f64>, x: Point) -> Vec<f64> {
    let e = fields.eval(x);
    (0..fields.ncomp())
        .map(|c| (0..fields.len()).map(|j| e[(c, j)] * coeffs[j]).sum())
        .collect()
}

/// Gathers the local coefficients of every cell from a global field.
pub fn gather(field: &CoefficientField, maps: &GlobalMaps, tag: SpaceTag) -> Vec<DVector<f64>> {
    let map = maps.get(tag);
    (0..map.cell_dofs.len())
        .map(|c| DVector::from_vec(field.local(map, c)))
        .collect()
}

#[cfg(test)]
mod tests;
