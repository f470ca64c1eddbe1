use nalgebra::DMatrix;

use super::sparse::{solve_indefinite, SparseSystem};
use super::{load_degree, Discretization, Scheme, SchemeSolution, SolveOptions};
use crate::error::{Error, Result};
use crate::fespace::{CoefficientField, SpaceTag};
use crate::weakops::{poly_load, ScalarFn};

struct Offsets {
    phi: usize,
    p: usize,
    u: usize,
    n: usize,
}

fn offsets(disc: &Discretization) -> Offsets {
    let m = &disc.maps;
    let phi = m.sigma_div.ndofs;
    let p = phi + m.v_div.ndofs;
    let u = p + m.v_broken.ndofs;
    Offsets {
        phi,
        p,
        u,
        n: u + m.poly.ndofs,
    }
}

fn shift(dofs: &[Option<usize>], by: usize) -> Vec<Option<usize>> {
    dofs.iter().map(|d| d.map(|g| g + by)).collect()
}

/// Unknowns `(σ, φ, p, u)`; rows follow the test functions `(τ, ψ, q, v)`:
///
/// ```text
/// ε^{-2}(σ, τ) + (div τ, p)                    = 0
/// -(ψ, p) - (div ψ, u)                         = 0
/// (div σ, q) - (φ, q) - (p, q)                 = 0
/// -(div φ, v)                                  = -(f, v)
/// ```
pub fn assemble_first_order(disc: &Discretization, eps: f64, f: ScalarFn, opts: &SolveOptions) -> Result<SparseSystem> {
    if disc.cfg.m() < 2 {
        return Err(Error::Unsupported(format!(
            "the first-order scheme needs m >= 2, got {}",
            disc.cfg
        )));
    }
    let o = offsets(disc);
    let maps = &disc.maps;
    let mut sys = SparseSystem::new(o.n, true);
    for (c, d) in disc.cells.iter().enumerate() {
        let s = &maps.sigma_div.cell_dofs[c];
        let phi = shift(&maps.v_div.cell_dofs[c], o.phi);
        let p = shift(&maps.v_broken.cell_dofs[c], o.p);
        let u = shift(&maps.poly.cell_dofs[c], o.u);
        let mv = &d.mass_v;
        let div_p: DMatrix<f64> = d.div.transpose() * mv;
        sys.add_block(s, s, &(&d.mass_sigma / (eps * eps)));
        sys.add_block(s, &p, &div_p);
        sys.add_block(&p, s, &div_p.transpose());
        sys.add_block(&phi, &p, &(-mv));
        sys.add_block(&p, &phi, &(-mv));
        sys.add_block(&p, &p, &(-mv));
        sys.add_block(&phi, &u, &(-&d.div_v_p));
        sys.add_block(&u, &phi, &(-d.div_v_p.transpose()));
    }
    let load = poly_load(maps, &disc.cells, f, load_degree(disc, opts))?;
    for (i, v) in load.iter().enumerate() {
        sys.rhs[o.u + i] = -v;
    }
    sys.compress();
    Ok(sys)
}

pub(super) fn solve_first_order(
    disc: &Discretization,
    eps: f64,
    f: ScalarFn,
    opts: &SolveOptions,
) -> Result<SchemeSolution> {
    let sys = assemble_first_order(disc, eps, f, opts)?;
    let x = solve_indefinite(&sys)?;
    let residual = sys.backward_error(&x);
    let o = offsets(disc);
    let field = |tag, a: usize, b: usize| CoefficientField {
        tag,
        values: x[a..b].to_vec(),
    };
    Ok(SchemeSolution {
        scheme: Scheme::FirstOrder,
        eps,
        cfg: disc.cfg,
        u: None,
        sigma: field(SpaceTag::SigmaDiv, 0, o.phi),
        phi: Some(field(SpaceTag::VDiv, o.phi, o.p)),
        grad: field(SpaceTag::VBroken, o.p, o.u),
        u0: field(SpaceTag::PolyBroken, o.u, o.n),
        residual,
    })
}
