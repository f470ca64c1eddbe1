use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::sparse::{solve_spd, SparseSystem};
use super::{
    load_degree, recover_sigma, u0_field, weak_gradient_field, Discretization, Scheme, SchemeSolution, SolveOptions,
};
use crate::error::{Error, Result};
use crate::fespace::CoefficientField;
use crate::weakops::{load_vector, ScalarFn};

fn element_matrices(disc: &Discretization, eps: f64, opts: &SolveOptions) -> Vec<DMatrix<f64>> {
    disc.cells
        .par_iter()
        .enumerate()
        .map(|(c, d)| {
            let h = &d.hess_w;
            let g = &d.grad_w;
            let mut a = h.transpose() * (&d.mass_sigma * h) * (eps * eps) + g.transpose() * (&d.mass_v * g);
            a = (&a + a.transpose()) * 0.5;
            if opts.perturb_cell == Some(c) {
                a *= 1.0 + 1e-3;
            }
            a
        })
        .collect()
}

/// `ε²(∇²_w u, ∇²_w v) + (∇_w u, ∇_w v) = <<f, v>>` over all WG unknowns.
pub fn assemble_primal_wg(disc: &Discretization, eps: f64, f: ScalarFn, opts: &SolveOptions) -> Result<SparseSystem> {
    let map = &disc.maps.wg;
    let mut sys = SparseSystem::new(map.ndofs, true);
    for (c, a) in element_matrices(disc, eps, opts).iter().enumerate() {
        sys.add_block(&map.cell_dofs[c], &map.cell_dofs[c], a);
    }
    sys.rhs = load_vector(&disc.maps, &disc.cells, f, load_degree(disc, opts))?;
    sys.compress();
    Ok(sys)
}

/// Primal system with `u_0` eliminated cell by cell.
pub struct PrimalCondensed {
    pub system: SparseSystem,
    /// Per cell: Cholesky factor data `A_00`, the coupling `A_0f` and `b_0`.
    blocks: Vec<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)>,
    offset: usize,
}

impl PrimalCondensed {
    pub fn assemble(disc: &Discretization, eps: f64, f: ScalarFn, opts: &SolveOptions) -> Result<Self> {
        let map = &disc.maps.wg;
        let n0 = disc.cfg.u0_dim();
        let offset = disc.mesh.num_cells() * n0;
        let full_rhs = load_vector(&disc.maps, &disc.cells, f, load_degree(disc, opts))?;
        let mut sys = SparseSystem::new(map.ndofs - offset, true);
        sys.rhs.copy_from_slice(&full_rhs[offset..]);
        let mut blocks = Vec::with_capacity(disc.cells.len());
        for (c, a) in element_matrices(disc, eps, opts).into_iter().enumerate() {
            let nl = a.nrows();
            let nf = nl - n0;
            let a00 = a.view((0, 0), (n0, n0)).into_owned();
            let a0f = a.view((0, n0), (n0, nf)).into_owned();
            let aff = a.view((n0, n0), (nf, nf)).into_owned();
            let b0 = DVector::from_iterator(n0, (0..n0).map(|i| full_rhs[map.cell_dofs[c][i].expect("cell dof")]));
            let chol = a00.clone().cholesky().ok_or(Error::NotSpd)?;
            let x = chol.solve(&a0f);
            let schur = &aff - a0f.transpose() * &x;
            let schur = (&schur + schur.transpose()) * 0.5;
            let y = chol.solve(&b0);
            let rows: Vec<Option<usize>> = map.cell_dofs[c][n0..].iter().map(|d| d.map(|g| g - offset)).collect();
            sys.add_block(&rows, &rows, &schur);
            let corr = a0f.transpose() * &y;
            for (l, r) in rows.iter().enumerate() {
                if let Some(r) = r {
                    sys.rhs[*r] -= corr[l];
                }
            }
            blocks.push((a00, a0f, b0));
        }
        sys.compress();
        Ok(Self {
            system: sys,
            blocks,
            offset,
        })
    }

    /// Recovers the full unknown vector from the face solution.
    pub fn expand(&self, disc: &Discretization, faces: &[f64]) -> Result<Vec<f64>> {
        let map = &disc.maps.wg;
        let n0 = disc.cfg.u0_dim();
        let mut u = vec![0.0; map.ndofs];
        u[self.offset..].copy_from_slice(faces);
        for (c, (a00, a0f, b0)) in self.blocks.iter().enumerate() {
            let uf = DVector::from_iterator(
                a0f.ncols(),
                map.cell_dofs[c][n0..].iter().map(|d| d.map_or(0.0, |g| u[g])),
            );
            let rhs = b0 - a0f * uf;
            let x = a00.clone().cholesky().ok_or(Error::NotSpd)?.solve(&rhs);
            for i in 0..n0 {
                u[map.cell_dofs[c][i].expect("cell dof")] = x[i];
            }
        }
        Ok(u)
    }
}

pub(super) fn solve_primal(
    disc: &Discretization,
    eps: f64,
    f: ScalarFn,
    opts: &SolveOptions,
) -> Result<SchemeSolution> {
    let full = assemble_primal_wg(disc, eps, f, opts)?;
    let x = if opts.condense && disc.cfg.u0_dim() > 0 {
        let cond = PrimalCondensed::assemble(disc, eps, f, opts)?;
        let faces = solve_spd(&cond.system)?;
        cond.expand(disc, &faces)?
    } else {
        solve_spd(&full)?
    };
    let residual = full.backward_error(&x);
    if residual.is_nan() || residual >= 1e-9 {
        return Err(Error::Residual { residual, tol: 1e-9 });
    }
    let u = CoefficientField {
        tag: disc.maps.wg.tag,
        values: x,
    };
    let sigma = recover_sigma(disc, &u, eps)?;
    Ok(SchemeSolution {
        scheme: Scheme::PrimalWg,
        eps,
        cfg: disc.cfg,
        grad: weak_gradient_field(disc, &u),
        u0: u0_field(disc, &u),
        u: Some(u),
        sigma,
        phi: None,
        residual,
    })
}
