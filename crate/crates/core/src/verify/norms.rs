use nalgebra::DVector;
use rayon::prelude::*;

use super::cases::{CaseId, ManufacturedCase};
use crate::error::{Error, Result};
use crate::fespace::SpaceTag;
use crate::poly::Rules;
use crate::schemes::{Discretization, SchemeSolution};
use crate::weakops::{eval_fields, gather};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormId {
    Err1,
    ErrSigma,
    ErrU,
    Err3,
}

impl NormId {
    pub fn name(&self) -> &'static str {
        match self {
            NormId::Err1 => "err1",
            NormId::ErrSigma => "errsigma",
            NormId::ErrU => "erru",
            NormId::Err3 => "err3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "err1" => Ok(NormId::Err1),
            "errsigma" => Ok(NormId::ErrSigma),
            "erru" => Ok(NormId::ErrU),
            "err3" => Ok(NormId::Err3),
            _ => Err(Error::Unsupported(format!("unknown norm '{s}'"))),
        }
    }

    pub fn valid_for(&self, case: CaseId) -> bool {
        match self {
            NormId::Err3 => case == CaseId::Example3,
            _ => case == CaseId::Example1,
        }
    }
}

/// Error norms of one solve together with their ingredients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub eps: f64,
    pub n: usize,
    pub err1: Option<f64>,
    pub err_sigma: Option<f64>,
    pub err_u: Option<f64>,
    pub err3: Option<f64>,
    /// `⦀u - u_h⦀_{2,h}`.
    pub h2_diff: f64,
    /// `|Q^div ∇u - ∇_w u_h|_{1,h}`.
    pub broken_h1: f64,
    /// `‖Q^div ∇u - ∇_w u_h‖_0`.
    pub proj_grad_l2: f64,
    /// `‖∇u - ∇_w u_h‖_0`.
    pub grad_l2: f64,
    /// `‖ε²∇²u - σ_h‖_0` (example 1).
    pub sigma_l2: f64,
}

impl ErrorReport {
    pub fn get(&self, norm: NormId) -> Option<f64> {
        match norm {
            NormId::Err1 => self.err1,
            NormId::ErrSigma => self.err_sigma,
            NormId::ErrU => self.err_u,
            NormId::Err3 => self.err3,
        }
    }
}

/// Squared cell contributions: `(|σ - σ_h|², |∇u - g_h|², |Qg - g_h|², |∇(Qg - g_h)|²)`.
fn cell_terms(
    disc: &Discretization,
    case: &ManufacturedCase,
    rules: &Rules,
    sigma: &[DVector<f64>],
    grad: &[DVector<f64>],
    diff: &[DVector<f64>],
) -> Vec<[f64; 4]> {
    disc.cells
        .par_iter()
        .enumerate()
        .map(|(c, d)| {
            let dg = d.v.fields.grad();
            let mut t = [0.0; 4];
            for (x, w) in rules.triangle.map(&d.geom.vertices) {
                if case.id == CaseId::Example1 {
                    let s = case.sigma(x);
                    let sh = eval_fields(&d.sigma.fields, &sigma[c], x);
                    t[0] += w * (0..4).map(|i| (s[i] - sh[i]).powi(2)).sum::<f64>();
                }
                let g = case.grad(x);
                let gh = eval_fields(&d.v.fields, &grad[c], x);
                t[1] += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
                let e = eval_fields(&d.v.fields, &diff[c], x);
                t[2] += w * (e[0] * e[0] + e[1] * e[1]);
                let de = eval_fields(&dg, &diff[c], x);
                t[3] += w * de.iter().map(|v| v * v).sum::<f64>();
            }
            t
        })
        .collect()
}

/// `Σ_F h_F^{-1} ‖[[g]]‖²_F` over all faces; on the boundary the jump is the trace.
pub fn face_jump_sum(disc: &Discretization, g: &[DVector<f64>], rules: &Rules) -> f64 {
    let mesh = disc.mesh;
    (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| {
            let face = &mesh.faces[f];
            let [a, b] = mesh.face_endpoints(f);
            let mut acc = 0.0;
            for (x, w) in rules.edge.map(a, b) {
                let mut jump = [0.0; 2];
                for (i, &(c, _)) in face.cells.iter().enumerate() {
                    let sign = if i == 0 { 1.0 } else { -1.0 };
                    let v = eval_fields(&disc.cells[c].v.fields, &g[c], x);
                    jump[0] += sign * v[0];
                    jump[1] += sign * v[1];
                }
                acc += w * (jump[0] * jump[0] + jump[1] * jump[1]);
            }
            acc / mesh.face_lengths[f]
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// `⦀v⦀_{2,h}` of a piecewise `V` field given by local coefficients.
pub fn discrete_h2_seminorm(disc: &Discretization, g: &[DVector<f64>], degree: usize) -> Result<f64> {
    let rules = Rules::new(degree)?;
    let h1: f64 = disc
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, d)| {
            let dg = d.v.fields.grad();
            rules
                .triangle
                .map(&d.geom.vertices)
                .map(|(x, w)| w * eval_fields(&dg, &g[c], x).iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok((h1 + face_jump_sum(disc, g, &rules)).sqrt())
}

/// Per-cell `Q^div ∇u - ∇_w u_h`.
pub fn projected_gradient_diff(
    disc: &Discretization,
    case: &ManufacturedCase,
    sol: &SchemeSolution,
    degree: usize,
) -> Result<Vec<DVector<f64>>> {
    let rules = Rules::new(degree)?;
    let grad = gather(&sol.grad, &disc.maps, SpaceTag::VBroken);
    let g = |x| case.grad(x);
    Ok(disc
        .cells
        .par_iter()
        .zip(grad.par_iter())
        .map(|(d, gh)| d.project_to_v(&g, &rules.triangle) - gh)
        .collect())
}

/// `⦀u - u_h⦀_{2,h}` with `g = Q^div ∇u - ∇_w u_h`.
pub fn discrete_h2_seminorm_diff(
    disc: &Discretization,
    case: &ManufacturedCase,
    sol: &SchemeSolution,
    degree: usize,
) -> Result<f64> {
    discrete_h2_seminorm(disc, &projected_gradient_diff(disc, case, sol, degree)?, degree)
}

pub fn error_norms(
    disc: &Discretization,
    case: &ManufacturedCase,
    sol: &SchemeSolution,
    degree: usize,
) -> Result<ErrorReport> {
    let rules = Rules::new(degree)?;
    let eps = case.eps;
    let sigma = gather(&sol.sigma, &disc.maps, SpaceTag::SigmaDiv);
    let grad = gather(&sol.grad, &disc.maps, SpaceTag::VBroken);
    let diff = projected_gradient_diff(disc, case, sol, degree)?;
    let terms = cell_terms(disc, case, &rules, &sigma, &grad, &diff);
    let sum = |i: usize| terms.iter().map(|t| t[i]).sum::<f64>();
    let jumps = face_jump_sum(disc, &diff, &rules);
    let broken_h1 = sum(3).sqrt();
    let h2_diff = (sum(3) + jumps).sqrt();
    let proj_grad_l2 = sum(2).sqrt();
    let grad_l2 = sum(1).sqrt();
    let sigma_l2 = sum(0).sqrt();
    let mut report = ErrorReport {
        eps,
        n: 0,
        h2_diff,
        broken_h1,
        proj_grad_l2,
        grad_l2,
        sigma_l2,
        ..Default::default()
    };
    match case.id {
        CaseId::Example1 => {
            let es = sigma_l2 / eps;
            report.err_sigma = Some(es);
            report.err1 = Some(es + (eps * eps * h2_diff * h2_diff + grad_l2 * grad_l2).sqrt());
            report.err_u = Some((eps * eps * h2_diff * h2_diff + proj_grad_l2 * proj_grad_l2).sqrt());
        }
        CaseId::Example3 => {
            report.err3 = Some(eps * broken_h1 + grad_l2);
        }
    }
    Ok(report)
}
