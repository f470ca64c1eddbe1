use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::{CaseId, ManufacturedCase};
use super::oracle::{gradient_identity_residual, hessian_identity_residual};
use crate::error::{Error, Result};
use crate::fespace::{CellGeometry, LocalTensorBasis, LocalVectorBasis, SpaceConfig, SpaceTag};
use crate::mesh::{Point, SimplicialMesh};
use crate::poly::{exponents, Rules};
use crate::schemes::{
    assemble_primal_wg, lanczos_smallest_ritz, max_face_jump, solve, solve_spd, Discretization, GradSpaceMap, Scheme,
    SolveOptions,
};
use crate::weakops::{canonical_interp_v, eval_fields, gather, CellWeakData, ScalarFn};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Largest observed deviation (or the quantity bounded by the check).
    pub deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Records `deviation <= tol`.
    pub fn below(&mut self, name: impl Into<String>, deviation: f64, tol: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            pass: deviation <= tol,
            deviation,
        });
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }

    /// One `CHECK <name> PASS|FAIL <deviation>` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "CHECK {} {} {}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    super::sci(c.deviation)
                )
            })
            .collect()
    }
}

/// `max |a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Cross-solves the schemes and compares the shared quantities.
pub fn equivalence_suite(
    mesh: &SimplicialMesh,
    cfg: SpaceConfig,
    eps: f64,
    f: ScalarFn,
    opts: &SolveOptions,
) -> Result<SuiteReport> {
    let disc = Discretization::new(mesh, cfg)?;
    let tag = format!("{cfg}.cells{}.eps{}", mesh.num_cells(), super::eps_label(eps));
    let mut report = SuiteReport::default();
    let primal = match solve(&disc, eps, f, Scheme::PrimalWg, opts) {
        Ok(s) => s,
        // a nonconforming recovered stress is itself a failed check
        Err(Error::NormalJump { jump, .. }) => {
            report.checks.push(CheckResult {
                name: format!("conformity.primal-sigma.{tag}"),
                pass: false,
                deviation: jump,
            });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let clean = SolveOptions {
        perturb_cell: None,
        ..opts.clone()
    };
    let saddle = solve(&disc, eps, f, Scheme::SaddleWg, &clean)?;
    report.below(
        format!("equivalence.sigma.primal-saddle.{tag}"),
        relative_deviation(&primal.sigma.values, &saddle.sigma.values),
        EQUIVALENCE_TOL,
    );
    let gmap = GradSpaceMap::new(&disc);
    let pu = primal.u.as_ref().expect("primal WG unknowns");
    let su = saddle.u.as_ref().expect("saddle WG unknowns");
    let pick = |v: &[f64]| gmap.to_wg.iter().map(|&g| v[g]).collect::<Vec<_>>();
    report.below(
        format!("equivalence.u.primal-saddle.{tag}"),
        relative_deviation(&pick(&pu.values), &pick(&su.values)),
        EQUIVALENCE_TOL,
    );
    if cfg.u0_dim() > 0 {
        let cond = solve(
            &disc,
            eps,
            f,
            Scheme::PrimalWg,
            &SolveOptions {
                condense: true,
                ..opts.clone()
            },
        )?;
        let u = cond.u.as_ref().expect("primal WG unknowns");
        report.below(
            format!("condensation.u.{tag}"),
            relative_deviation(&u.values, &pu.values),
            1e-10,
        );
    }
    if cfg.k() >= 2 {
        let fo = solve(&disc, eps, f, Scheme::FirstOrder, &clean)?;
        report.below(
            format!("equivalence.sigma.primal-first-order.{tag}"),
            relative_deviation(&primal.sigma.values, &fo.sigma.values),
            EQUIVALENCE_TOL,
        );
        report.below(
            format!("equivalence.p.primal-first-order.{tag}"),
            relative_deviation(&primal.grad.values, &fo.grad.values),
            EQUIVALENCE_TOL,
        );
        report.below(
            format!("equivalence.u.primal-first-order.{tag}"),
            relative_deviation(&primal.u0.values, &fo.u0.values),
            EQUIVALENCE_TOL,
        );
        let phi = fo.phi.as_ref().expect("first-order phi");
        let sig = gather(&primal.sigma, &disc.maps, SpaceTag::SigmaDiv);
        let grad = gather(&primal.grad, &disc.maps, SpaceTag::VBroken);
        let phi_loc = gather(phi, &disc.maps, SpaceTag::VDiv);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (c, d) in disc.cells.iter().enumerate() {
            let expect: DVector<f64> = &d.div * &sig[c] - &grad[c];
            a.extend(expect.iter());
            b.extend(phi_loc[c].iter());
        }
        report.below(
            format!("equivalence.phi.primal-first-order.{tag}"),
            relative_deviation(&a, &b),
            EQUIVALENCE_TOL,
        );
    }
    Ok(report)
}

fn random_triangle(rng: &mut ChaCha8Rng) -> CellGeometry {
    loop {
        let v: [Point; 3] = std::array::from_fn(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        if let Ok(c) = CellGeometry::standalone(v) {
            if c.area / (c.diameter * c.diameter) > 0.05 {
                return c;
            }
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, k: usize) -> (Vec<(u32, u32)>, Vec<f64>) {
    let e = exponents(k as i64);
    let c = e.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    (e, c)
}

/// Cell-level operator checks plus post-solve conformity and SPD probes.
pub fn property_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::default();
    let cfgs = SpaceConfig::all_up_to(3);
    let triangles: Vec<CellGeometry> = (0..100).map(|_| random_triangle(&mut rng)).collect();

    let mut cond: f64 = 0.0;
    for t in &triangles {
        for &cfg in &cfgs {
            let rules = Rules::new(cfg.local_quadrature_degree())?;
            cond = cond.max(LocalVectorBasis::new(t, cfg.k(), cfg.m(), &rules)?.condition);
            cond = cond.max(LocalTensorBasis::new(t, cfg, &rules)?.condition);
        }
    }
    report.below("unisolvence.condition", cond, 1e10);

    let mut exact: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for t in triangles.iter().take(10) {
        for &cfg in &cfgs {
            let rules = Rules::new(cfg.local_quadrature_degree())?;
            let data = CellWeakData::from_geometry(t.clone(), cfg, &rules)?;
            let (e, c) = random_poly(&mut rng, cfg.k());
            let p = |x: Point| {
                e.iter()
                    .zip(&c)
                    .map(|(&(a, b), w)| w * x[0].powi(a as i32) * x[1].powi(b as i32))
                    .sum::<f64>()
            };
            let dp = |x: Point| {
                let mut g = [0.0; 2];
                for (&(a, b), w) in e.iter().zip(&c) {
                    if a > 0 {
                        g[0] += w * a as f64 * x[0].powi(a as i32 - 1) * x[1].powi(b as i32);
                    }
                    if b > 0 {
                        g[1] += w * b as f64 * x[0].powi(a as i32) * x[1].powi(b as i32 - 1);
                    }
                }
                g
            };
            let hi = Rules::new(2 * cfg.k() + 6)?;
            let v = data.interpolate(&p, &dp, &hi);
            let gw = data.weak_gradient(&v);
            for (x, _) in hi.triangle.map(&t.vertices) {
                let val = eval_fields(&data.v.fields, &gw, x);
                let g = dp(x);
                let scale = 1.0 + g[0].abs().max(g[1].abs());
                exact = exact.max(((val[0] - g[0]).abs() + (val[1] - g[1]).abs()) / scale);
            }
            let rand = DVector::from_fn(data.layout.len(), |_, _| rng.random_range(-1.0..1.0));
            oracle = oracle.max(gradient_identity_residual(&data, &rand));
            oracle = oracle.max(hessian_identity_residual(&data, &rand));
        }
    }
    report.below("weak-gradient.polynomial-exactness", exact, 1e-11);
    report.below("weak-operators.quadrature-oracle", oracle, 1e-10);

    let mut commuting: f64 = 0.0;
    let pi = std::f64::consts::PI;
    let w = |x: Point| [(pi * x[1]).sin() + x[0] * x[1], (pi * x[0]).sin() * x[1]];
    let divw = |x: Point| x[1] + (pi * x[0]).sin();
    for n in [2, 4] {
        let mesh = SimplicialMesh::uniform_unit_square(n)?;
        for &cfg in cfgs.iter().filter(|c| c.k() >= 2) {
            let disc = Discretization::new(&mesh, cfg)?;
            let deg = cfg.data_quadrature_degree();
            let rules = Rules::new(deg)?;
            let iw = canonical_interp_v(&mesh, &disc.maps, &disc.cells, &w, deg)?;
            let loc = gather(&iw, &disc.maps, SpaceTag::VDiv);
            for (c, d) in disc.cells.iter().enumerate() {
                let dv = d.v.fields.divergence();
                let q = d.project_scalar(&divw, &rules.triangle);
                for (x, _) in rules.triangle.map(&d.geom.vertices) {
                    commuting = commuting.max((eval_fields(&dv, &loc[c], x)[0] - d.eval_u0(q.as_slice(), x)).abs());
                }
            }
        }
    }
    report.below("interpolation.commuting", commuting, 1e-10);

    let mesh = SimplicialMesh::uniform_unit_square(4)?;
    let mut sigma_jump: f64 = 0.0;
    let mut phi_jump: f64 = 0.0;
    let mut ritz = f64::INFINITY;
    let mut spd_ok = true;
    for &cfg in &cfgs {
        let disc = Discretization::new(&mesh, cfg)?;
        for eps in [1.0, 1e-3] {
            let case = ManufacturedCase::new(CaseId::Example1, eps);
            let f = |x| case.f(x);
            let opts = SolveOptions::default();
            let sol = solve(&disc, eps, &f, Scheme::PrimalWg, &opts)?;
            let u = sol.u.as_ref().expect("primal WG unknowns");
            let hess: Vec<DVector<f64>> = disc
                .cells
                .iter()
                .enumerate()
                .map(|(c, d)| d.weak_hessian(&DVector::from_vec(u.local(&disc.maps.wg, c))) * (eps * eps))
                .collect();
            sigma_jump = sigma_jump.max(max_face_jump(&disc, SpaceTag::SigmaDiv, &hess));
            if cfg.k() >= 2 {
                let grad = gather(&sol.grad, &disc.maps, SpaceTag::VBroken);
                let phi: Vec<DVector<f64>> = disc
                    .cells
                    .iter()
                    .enumerate()
                    .map(|(c, d)| &d.div * &hess[c] - &grad[c])
                    .collect();
                phi_jump = phi_jump.max(max_face_jump(&disc, SpaceTag::VDiv, &phi));
            }
            let sys = assemble_primal_wg(&disc, eps, &f, &opts)?;
            spd_ok &= solve_spd(&sys).is_ok();
            ritz = ritz.min(lanczos_smallest_ritz(&sys, 20, seed));
        }
    }
    report.below("conformity.sigma", sigma_jump, 1e-9);
    report.below("conformity.div-sigma-minus-grad", phi_jump, 1e-9);
    report.checks.push(CheckResult {
        name: "spd.cholesky".into(),
        pass: spd_ok,
        deviation: 0.0,
    });
    report.checks.push(CheckResult {
        name: "spd.lanczos-smallest-ritz".into(),
        pass: ritz > 0.0,
        deviation: ritz,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_deviation_handles_zero() {
        assert_eq!(relative_deviation(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((relative_deviation(&[1.0, 2.0], &[1.0, 2.2]) - 0.1 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn schemes_agree() {
        let mesh = SimplicialMesh::uniform_unit_square(4).unwrap();
        for cfg in SpaceConfig::all_up_to(3) {
            for eps in [1.0, 1e-4] {
                let case = ManufacturedCase::new(CaseId::Example1, eps);
                let f = |x| case.f(x);
                let r = equivalence_suite(&mesh, cfg, eps, &f, &SolveOptions::default()).unwrap();
                assert!(r.all_pass(), "{:?}", r.lines());
            }
        }
    }

    #[test]
    fn properties_hold() {
        let r = property_suite(7).unwrap();
        for l in r.lines() {
            println!("{l}");
        }
        assert!(r.all_pass(), "{:?}", r.lines());
    }
}
