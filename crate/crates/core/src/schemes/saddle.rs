use nalgebra::DMatrix;
use rayon::prelude::*;

use super::sparse::{solve_indefinite, SparseSystem};
use super::{load_degree, u0_field, weak_gradient_field, Discretization, Scheme, SchemeSolution, SolveOptions};
use crate::error::Result;
use crate::fespace::{CoefficientField, SpaceTag};
use crate::weakops::{load_vector, ScalarFn};

/// Numbering of `(u_0, u_b)`: the weak Galerkin unknowns without `u_g`.
#[derive(Clone, Debug)]
pub struct GradSpaceMap {
    pub ndofs: usize,
    /// Indexed by the full local WG layout; `u_g` positions are `None`.
    pub cell_dofs: Vec<Vec<Option<usize>>>,
    /// Position of each unknown in the WG numbering.
    pub to_wg: Vec<usize>,
}

impl GradSpaceMap {
    pub fn new(disc: &Discretization) -> Self {
        let wg = &disc.maps.wg;
        let layout = crate::weakops::WgLayout::new(disc.cfg);
        let mut is_ug = vec![false; wg.ndofs];
        for dofs in &wg.cell_dofs {
            for i in 0..3 {
                for l in layout.ug(i) {
                    if let Some(g) = dofs[l] {
                        is_ug[g] = true;
                    }
                }
            }
        }
        let mut new_index = vec![None; wg.ndofs];
        let mut to_wg = Vec::new();
        for g in 0..wg.ndofs {
            if !is_ug[g] {
                new_index[g] = Some(to_wg.len());
                to_wg.push(g);
            }
        }
        let cell_dofs = wg
            .cell_dofs
            .iter()
            .map(|d| d.iter().map(|x| x.and_then(|g| new_index[g])).collect())
            .collect();
        Self {
            ndofs: to_wg.len(),
            cell_dofs,
            to_wg,
        }
    }
}

/// Block system `[[ε^{-2} M_Σ, Bᵀ], [B, -C]]` over `Σ^div × (u_0, u_b)`.
pub fn assemble_saddle_wg(
    disc: &Discretization,
    eps: f64,
    f: ScalarFn,
    opts: &SolveOptions,
) -> Result<(SparseSystem, GradSpaceMap)> {
    let gmap = GradSpaceMap::new(disc);
    let smap = &disc.maps.sigma_div;
    let ns = smap.ndofs;
    let mut sys = SparseSystem::new(ns + gmap.ndofs, true);
    let blocks: Vec<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> = disc
        .cells
        .par_iter()
        .map(|d| {
            let a = &d.mass_sigma / (eps * eps);
            let mg = &d.mass_v * &d.grad_w;
            let b = d.div.transpose() * &mg;
            let c = d.grad_w.transpose() * &mg;
            (a, b, -(&c + c.transpose()) * 0.5)
        })
        .collect();
    for (c, (a, b, mc)) in blocks.iter().enumerate() {
        let srows = &smap.cell_dofs[c];
        let grows: Vec<Option<usize>> = gmap.cell_dofs[c].iter().map(|d| d.map(|g| g + ns)).collect();
        sys.add_block(srows, srows, a);
        sys.add_block(srows, &grows, b);
        sys.add_block(&grows, srows, &b.transpose());
        sys.add_block(&grows, &grows, mc);
    }
    let load = load_vector(&disc.maps, &disc.cells, f, load_degree(disc, opts))?;
    for (i, &g) in gmap.to_wg.iter().enumerate() {
        sys.rhs[ns + i] = -load[g];
    }
    sys.compress();
    Ok((sys, gmap))
}

pub(super) fn solve_saddle(
    disc: &Discretization,
    eps: f64,
    f: ScalarFn,
    opts: &SolveOptions,
) -> Result<SchemeSolution> {
    let (sys, gmap) = assemble_saddle_wg(disc, eps, f, opts)?;
    let x = solve_indefinite(&sys)?;
    let residual = sys.backward_error(&x);
    let ns = disc.maps.sigma_div.ndofs;
    let sigma = CoefficientField {
        tag: SpaceTag::SigmaDiv,
        values: x[..ns].to_vec(),
    };
    let mut u = CoefficientField::zeros(&disc.maps.wg);
    for (i, &g) in gmap.to_wg.iter().enumerate() {
        u.values[g] = x[ns + i];
    }
    Ok(SchemeSolution {
        scheme: Scheme::SaddleWg,
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
