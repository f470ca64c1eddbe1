//! The three equivalent discretizations and stress recovery.
//!
//! * `PrimalWg`: symmetric positive definite weak Galerkin method over
//!   `(u_0, u_b, u_g)`, with `σ_h = ε² ∇²_w u_h` recovered afterwards.
//! * `SaddleWg`: `ε^{-2}(σ, τ) + (div τ, ∇_w u) = 0`,
//!   `(div σ, ∇_w v) - (∇_w u, ∇_w v) = -<<f, v>>` over `Σ^div × (u_0, u_b)`.
//! * `FirstOrder`: mixed method over `Σ^div × V^div × V^{-1} × P_{m-2}`.

mod first_order;
mod primal;
mod saddle;
mod sparse;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fespace::{CoefficientField, GlobalMaps, SpaceConfig, SpaceTag};
use crate::mesh::SimplicialMesh;
use crate::weakops::{build_cells, CellWeakData, ScalarFn};

pub use first_order::assemble_first_order;
pub use primal::{assemble_primal_wg, PrimalCondensed};
pub use saddle::{assemble_saddle_wg, GradSpaceMap};
pub use sparse::{lanczos_smallest_ritz, solve_indefinite, solve_spd, SparseSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    PrimalWg,
    SaddleWg,
    FirstOrder,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::PrimalWg => "primal-wg",
            Scheme::SaddleWg => "saddle-wg",
            Scheme::FirstOrder => "first-order",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal-wg" | "primal" => Ok(Scheme::PrimalWg),
            "saddle-wg" | "saddle" => Ok(Scheme::SaddleWg),
            "first-order" => Ok(Scheme::FirstOrder),
            _ => Err(Error::Unsupported(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Eliminate `u_0` cell by cell before the global solve (primal only).
    pub condense: bool,
    /// Scales the element matrix of one cell by `1 + 1e-3` (test hook).
    pub perturb_cell: Option<usize>,
    /// Quadrature degree for the load; defaults to `2k + 8`.
    pub quad_degree: Option<usize>,
}

/// Mesh, configuration, global maps and per-cell operators.
pub struct Discretization<'a> {
    pub mesh: &'a SimplicialMesh,
    pub cfg: SpaceConfig,
    pub maps: GlobalMaps,
    pub cells: Vec<CellWeakData>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a SimplicialMesh, cfg: SpaceConfig) -> Result<Self> {
        Ok(Self {
            mesh,
            cfg,
            maps: GlobalMaps::new(mesh, cfg),
            cells: build_cells(mesh, cfg)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SchemeSolution {
    pub scheme: Scheme,
    pub eps: f64,
    pub cfg: SpaceConfig,
    /// Weak Galerkin unknowns; `u_g` stays zero for the saddle scheme.
    pub u: Option<CoefficientField>,
    pub sigma: CoefficientField,
    /// `∇_w u_h` per cell (`p_h` for the first-order scheme).
    pub grad: CoefficientField,
    /// `P_{m-2}` cell values (`u_0` or the first-order `u`).
    pub u0: CoefficientField,
    pub phi: Option<CoefficientField>,
    /// Componentwise backward error of the assembled system.
    pub residual: f64,
}

pub fn solve(
    disc: &Discretization,
    eps: f64,
    f: ScalarFn,
    scheme: Scheme,
    opts: &SolveOptions,
) -> Result<SchemeSolution> {
    match scheme {
        Scheme::PrimalWg => primal::solve_primal(disc, eps, f, opts),
        Scheme::SaddleWg => saddle::solve_saddle(disc, eps, f, opts),
        Scheme::FirstOrder => first_order::solve_first_order(disc, eps, f, opts),
    }
}

/// Per-cell `∇_w u_h` from weak Galerkin unknowns.
pub(crate) fn weak_gradient_field(disc: &Discretization, u: &CoefficientField) -> CoefficientField {
    let mut out = CoefficientField::zeros(&disc.maps.v_broken);
    for (c, data) in disc.cells.iter().enumerate() {
        let g = data.weak_gradient(&DVector::from_vec(u.local(&disc.maps.wg, c)));
        for (l, d) in disc.maps.v_broken.cell_dofs[c].iter().enumerate() {
            out.values[d.expect("broken dof")] = g[l];
        }
    }
    out
}

pub(crate) fn u0_field(disc: &Discretization, u: &CoefficientField) -> CoefficientField {
    let mut out = CoefficientField::zeros(&disc.maps.poly);
    let n = disc.maps.poly.ndofs;
    out.values.copy_from_slice(&u.values[..n]);
    out
}

/// Relative tolerance on normal-trace jumps of recovered fields.
pub const JUMP_TOL: f64 = 1e-9;

/// `σ_h = ε² ∇²_w u_h`, checked for single-valued face DoFs.
pub fn recover_sigma(disc: &Discretization, u: &CoefficientField, eps: f64) -> Result<CoefficientField> {
    let map = &disc.maps.sigma_div;
    let locals: Vec<DVector<f64>> = disc
        .cells
        .iter()
        .enumerate()
        .map(|(c, d)| d.weak_hessian(&DVector::from_vec(u.local(&disc.maps.wg, c))) * (eps * eps))
        .collect();
    merge_face_based(disc, map.tag, &locals, "sigma", disc.cfg.sigma_face_dofs())
}

/// Assembles per-cell coefficients of a face-based space, checking that the
/// two cells of each face agree.
pub fn merge_face_based(
    disc: &Discretization,
    tag: SpaceTag,
    locals: &[DVector<f64>],
    field: &'static str,
    per_face: usize,
) -> Result<CoefficientField> {
    let map = disc.maps.get(tag);
    let scale = locals.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let mut out = CoefficientField::zeros(map);
    let mut seen = vec![false; map.ndofs];
    for (c, loc) in locals.iter().enumerate() {
        for (l, d) in map.cell_dofs[c].iter().enumerate() {
            let g = d.expect("face-based dof");
            if seen[g] {
                let jump = (out.values[g] - loc[l]).abs();
                if jump > JUMP_TOL * scale.max(f64::MIN_POSITIVE) {
                    let face = disc.mesh.cell_faces[c][l / per_face].0;
                    return Err(Error::NormalJump {
                        field,
                        face,
                        jump: jump / scale,
                    });
                }
                out.values[g] = 0.5 * (out.values[g] + loc[l]);
            } else {
                out.values[g] = loc[l];
                seen[g] = true;
            }
        }
    }
    Ok(out)
}

/// Largest relative mismatch of face DoFs between neighbouring cells.
pub fn max_face_jump(disc: &Discretization, tag: SpaceTag, locals: &[DVector<f64>]) -> f64 {
    let map = disc.maps.get(tag);
    let scale = locals.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let mut first: Vec<Option<f64>> = vec![None; map.ndofs];
    let mut worst: f64 = 0.0;
    for (c, loc) in locals.iter().enumerate() {
        for (l, d) in map.cell_dofs[c].iter().enumerate() {
            let g = d.expect("face-based dof");
            match first[g] {
                Some(v) => worst = worst.max((v - loc[l]).abs()),
                None => first[g] = Some(loc[l]),
            }
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

pub(crate) fn load_degree(disc: &Discretization, opts: &SolveOptions) -> usize {
    opts.quad_degree.unwrap_or(disc.cfg.data_quadrature_degree())
}
