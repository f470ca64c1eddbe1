use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::poly::Rules;
use crate::verify::oracle::{gradient_identity_residual, hessian_identity_residual};

fn cell() -> CellGeometry {
    CellGeometry::standalone([[0.05, 0.1], [0.8, 0.25], [0.35, 0.9]]).unwrap()
}

fn data(cfg: SpaceConfig) -> CellWeakData {
    CellWeakData::from_geometry(cell(), cfg, &Rules::new(cfg.local_quadrature_degree()).unwrap()).unwrap()
}

fn random_local(data: &CellWeakData, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(data.layout.len(), |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn weak_operators_match_quadrature_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cfg in SpaceConfig::all_up_to(3) {
        let d = data(cfg);
        for _ in 0..3 {
            let v = random_local(&d, &mut rng);
            assert!(gradient_identity_residual(&d, &v) < 1e-10, "{cfg}");
            assert!(hessian_identity_residual(&d, &v) < 1e-10, "{cfg}");
        }
    }
}

#[test]
fn oracle_detects_small_operator_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for cfg in SpaceConfig::all_up_to(3) {
        let mut d = data(cfg);
        let v = random_local(&d, &mut rng);
        d.hess_w *= 1.0 + 1e-6;
        assert!(hessian_identity_residual(&d, &v) > 1e-8, "{cfg}");
        d.grad_w *= 1.0 + 1e-6;
        assert!(gradient_identity_residual(&d, &v) > 1e-8, "{cfg}");
    }
}

#[test]
fn constants_have_zero_weak_gradient() {
    for cfg in SpaceConfig::all_up_to(3) {
        let d = data(cfg);
        let one = |_: Point| 1.0;
        let zero = |_: Point| [0.0, 0.0];
        let rules = Rules::new(8).unwrap();
        let v = d.interpolate(&one, &zero, &rules);
        if cfg.m() >= 2 {
            assert!(d.weak_gradient(&v).amax() < 1e-13, "{cfg}");
        }
        assert!(d.weak_hessian(&v).amax() < 1e-11, "{cfg}");
    }
}

#[test]
fn weak_gradient_reproduces_polynomial_gradients() {
    for cfg in SpaceConfig::all_up_to(3) {
        let k = cfg.k() as i32;
        let d = data(cfg);
        let rules = Rules::new(2 * cfg.k() + 6).unwrap();
        // x^a y^(k-a) plus lower-order terms
        let u = move |x: Point| x[0].powi(k) + 0.5 * x[0] * x[1].powi(k - 1) - x[1] + 0.3;
        let g = move |x: Point| {
            [
                k as f64 * x[0].powi(k - 1) + 0.5 * x[1].powi(k - 1),
                0.5 * (k - 1) as f64 * x[0] * x[1].powi((k - 2).max(0)) - 1.0,
            ]
        };
        let v = d.interpolate(&u, &g, &rules);
        let gw = d.weak_gradient(&v);
        let exact = d.project_to_v(&g, &rules.triangle);
        let err = (&gw - &exact).amax() / exact.amax();
        assert!(err < 1e-11, "{cfg}: {err}");
        for (x, _) in rules.triangle.map(&d.geom.vertices).take(5) {
            let val = eval_fields(&d.v.fields, &gw, x);
            let ex = g(x);
            assert!((val[0] - ex[0]).abs() + (val[1] - ex[1]).abs() < 1e-10, "{cfg}");
        }
    }
}

#[test]
fn affine_data_has_zero_weak_hessian() {
    for cfg in SpaceConfig::all_up_to(3) {
        let d = data(cfg);
        let u = |x: Point| 2.0 * x[0] - 3.0 * x[1] + 0.7;
        let g = |_: Point| [2.0, -3.0];
        let v = d.interpolate(&u, &g, &Rules::new(8).unwrap());
        assert!(d.weak_hessian(&v).amax() < 1e-10, "{cfg}");
    }
}

#[test]
fn projections_are_idempotent_and_match_oracle() {
    for cfg in SpaceConfig::all_up_to(3) {
        let d = data(cfg);
        let rules = Rules::new(2 * cfg.k() + 8).unwrap();
        let g = |x: Point| [(std::f64::consts::PI * x[0]).sin(), (std::f64::consts::PI * x[1]).cos()];
        let c = d.project_to_v(&g, &rules.triangle);
        // projecting the projection returns it
        let fields = d.v.fields.clone();
        let back = {
            let c2 = c.clone();
            let fields = fields.clone();
            move |x: Point| {
                let v = eval_fields(&fields, &c2, x);
                [v[0], v[1]]
            }
        };
        let again = d.project_to_v(&back, &rules.triangle);
        assert!((&again - &c).amax() < 1e-12, "{cfg}");
        // orthogonality of the residual against every basis field
        for i in 0..d.v.dim() {
            let mut res = 0.0;
            for (x, w) in rules.triangle.map(&d.geom.vertices) {
                let p = eval_fields(&fields, &c, x);
                let e = fields.eval(x);
                let gx = g(x);
                res += w * ((gx[0] - p[0]) * e[(0, i)] + (gx[1] - p[1]) * e[(1, i)]);
            }
            assert!(res.abs() < 1e-12, "{cfg}");
        }
    }
}

#[test]
fn scalar_projection() {
    let d = data(SpaceConfig::new(1, 1, 1).unwrap());
    let rules = Rules::new(12).unwrap();
    assert_eq!(d.project_scalar(&|_| 1.0, &rules.triangle).len(), 0);
    let d = data(SpaceConfig::new(2, 2, 3).unwrap());
    let p = |x: Point| 1.0 + x[0] - 2.0 * x[1];
    let c = d.project_scalar(&p, &rules.triangle);
    for (x, _) in rules.triangle.map(&d.geom.vertices).take(4) {
        assert!((d.eval_u0(c.as_slice(), x) - p(x)).abs() < 1e-12);
    }
    let s = |x: Point| (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
    let c = d.project_scalar(&s, &rules.triangle);
    for a in 0..3 {
        let mut res = 0.0;
        for (x, w) in rules.triangle.map(&d.geom.vertices) {
            let m = d.geom.basis(1).eval(x);
            res += w * (s(x) - d.eval_u0(c.as_slice(), x)) * m[a];
        }
        assert!(res.abs() < 1e-12);
    }
}

#[test]
fn nonconforming_reconstruction() {
    let rules = Rules::new(8).unwrap();
    let affine = |x: Point| 1.0 + 2.0 * x[0] - x[1];
    let grad = |_: Point| [2.0, -1.0];
    for m in [1, 2] {
        let cfg = SpaceConfig::new(1, 1, m).unwrap();
        let d = data(cfg);
        let nc = NcReconstruction::new(&d).unwrap();
        let v = d.interpolate(&affine, &grad, &rules);
        for (x, _) in rules.triangle.map(&d.geom.vertices).take(6) {
            assert!((nc.eval(v.as_slice(), x) - affine(x)).abs() < 1e-12, "m = {m}");
        }
    }
    // round trip of random data for m = 2
    let cfg = SpaceConfig::new(1, 1, 2).unwrap();
    let d = data(cfg);
    let nc = NcReconstruction::new(&d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = random_local(&d, &mut rng);
    for (i, face) in d.geom.faces.iter().enumerate() {
        let avg: f64 = rules
            .edge
            .map(face.endpoints[0], face.endpoints[1])
            .map(|(x, w)| w * nc.eval(v.as_slice(), x))
            .sum::<f64>()
            / face.length;
        assert!((avg - v[d.layout.ub(i).start]).abs() < 1e-12);
    }
    let avg: f64 = rules
        .triangle
        .map(&d.geom.vertices)
        .map(|(x, w)| w * nc.eval(v.as_slice(), x))
        .sum::<f64>()
        / d.geom.area;
    assert!((avg - v[0]).abs() < 1e-12);
    assert!(NcReconstruction::new(&data(SpaceConfig::bdm(2).unwrap())).is_err());
}

#[test]
fn load_vector_structure() {
    let mesh = SimplicialMesh::uniform_unit_square(2).unwrap();
    for cfg in SpaceConfig::all_up_to(3) {
        let maps = GlobalMaps::new(&mesh, cfg);
        let cells = build_cells(&mesh, cfg).unwrap();
        let zero = load_vector(&maps, &cells, &|_| 0.0, 10).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let b = load_vector(&maps, &cells, &|x| 1.0 + x[0], 10).unwrap();
        let n0 = mesh.num_cells() * cfg.u0_dim();
        if cfg.k() >= 2 {
            assert!(b[n0..].iter().all(|&v| v == 0.0), "{cfg}");
        } else {
            assert!(b[n0..].iter().any(|&v| v != 0.0), "{cfg}");
        }
    }
}

#[test]
fn crouzeix_raviart_load_on_single_square() {
    // two triangles; the diagonal is the only interior face
    let mesh = SimplicialMesh::uniform_unit_square(1).unwrap();
    let cfg = SpaceConfig::new(1, 1, 1).unwrap();
    let maps = GlobalMaps::new(&mesh, cfg);
    let cells = build_cells(&mesh, cfg).unwrap();
    let b = load_vector(&maps, &cells, &|_| 1.0, 8).unwrap();
    assert_eq!(maps.wg.ndofs, 1 + 4);
    // ∫ (1 - 2 λ) over each triangle, λ the barycentric of the vertex opposite
    // the diagonal: area (1 - 2/3) per triangle
    let expected = 2.0 * 0.5 * (1.0 - 2.0 / 3.0);
    assert!((b[0] - expected).abs() < 1e-13, "{}", b[0]);
}

#[test]
fn commuting_interpolation() {
    for n in [2, 4] {
        let mesh = SimplicialMesh::uniform_unit_square(n).unwrap();
        for cfg in SpaceConfig::all_up_to(3).into_iter().filter(|c| c.k() >= 2) {
            let maps = GlobalMaps::new(&mesh, cfg);
            let cells = build_cells(&mesh, cfg).unwrap();
            let deg = cfg.data_quadrature_degree();
            let rules = Rules::new(deg).unwrap();
            let pi = std::f64::consts::PI;
            let w = |x: Point| [(pi * x[0]).sin() * x[1], (pi * x[1]).cos() * x[0]];
            let divw = |x: Point| pi * (pi * x[0]).cos() * x[1] - pi * (pi * x[1]).sin() * x[0];
            let iw = canonical_interp_v(&mesh, &maps, &cells, &w, deg).unwrap();
            let locals = gather(&iw, &maps, SpaceTag::VDiv);
            for (c, d) in cells.iter().enumerate() {
                let dv = d.v.fields.divergence();
                let q = d.project_scalar(&divw, &rules.triangle);
                for (x, _) in rules.triangle.map(&d.geom.vertices).take(6) {
                    let lhs = eval_fields(&dv, &locals[c], x)[0];
                    let rhs = d.eval_u0(q.as_slice(), x);
                    assert!((lhs - rhs).abs() < 1e-10, "{cfg} n={n}: {lhs} vs {rhs}");
                }
            }
        }
    }
    let mesh = SimplicialMesh::uniform_unit_square(2).unwrap();
    let cfg = SpaceConfig::bdm(1).unwrap();
    let maps = GlobalMaps::new(&mesh, cfg);
    let cells = build_cells(&mesh, cfg).unwrap();
    assert!(canonical_interp_v(&mesh, &maps, &cells, &|_| [0.0, 0.0], 8).is_err());
}
