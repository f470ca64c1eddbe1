//! Pointwise-quadrature checks of the defining identities of the weak
//! operators, written independently of the matrix assembly.

use nalgebra::DVector;

use crate::poly::{EdgeBasis, Rules};
use crate::weakops::{eval_fields, CellWeakData};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(∇_w v, ψ_i)` and the defining right-hand side, each by direct pointwise
/// quadrature of a higher degree than the assembly uses.
pub fn gradient_identity_residual(d: &CellWeakData, local: &DVector<f64>) -> f64 {
    let rules = Rules::new(2 * d.cfg.k() + 6).expect("supported degree");
    let gw = d.weak_gradient(local);
    let div = d.v.fields.divergence();
    let mut worst: f64 = 0.0;
    for i in 0..d.v.dim() {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        // size of the summed terms, the scale of floating-point cancellation
        let mut mag = 0.0;
        for (x, w) in rules.triangle.map(&d.geom.vertices) {
            let psi = d.v.fields.eval(x);
            let g = eval_fields(&d.v.fields, &gw, x);
            let t = w * (g[0] * psi[(0, i)] + g[1] * psi[(1, i)]);
            lhs += t;
            mag += t.abs();
            let v0 = d.eval_u0(&local.as_slice()[..d.layout.n0], x);
            let t = w * v0 * div.eval(x)[(0, i)];
            rhs -= t;
            mag += t.abs();
        }
        for (f, face) in d.geom.faces.iter().enumerate() {
            let eb = EdgeBasis::new(face.endpoints[0], face.endpoints[1], d.cfg.k() as i64 - 1);
            let n = face.outward_normal();
            for (x, w) in rules.edge.map(face.endpoints[0], face.endpoints[1]) {
                let vb = dot(&eb.eval(x), &local.as_slice()[d.layout.ub(f)]);
                let psi = d.v.fields.eval(x);
                let t = w * vb * (psi[(0, i)] * n[0] + psi[(1, i)] * n[1]);
                rhs += t;
                mag += t.abs();
            }
        }
        worst = worst.max((lhs - rhs).abs() / (1.0 + mag));
    }
    worst
}

/// Same for `(∇²_w v, τ_i)`.
pub fn hessian_identity_residual(d: &CellWeakData, local: &DVector<f64>) -> f64 {
    let rules = Rules::new(2 * d.cfg.m() + 6).expect("supported degree");
    let r = d.cfg.r();
    let gw = d.weak_gradient(local);
    let hw = d.weak_hessian(local);
    let div = d.sigma.fields.divergence();
    let mut worst: f64 = 0.0;
    for i in 0..d.sigma.dim() {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut mag = 0.0;
        for (x, w) in rules.triangle.map(&d.geom.vertices) {
            let tau = d.sigma.fields.eval(x);
            let h = eval_fields(&d.sigma.fields, &hw, x);
            let t = w * (0..4).map(|c| h[c] * tau[(c, i)]).sum::<f64>();
            lhs += t;
            mag += t.abs();
            let g = eval_fields(&d.v.fields, &gw, x);
            let dt = div.eval(x);
            let t = w * (g[0] * dt[(0, i)] + g[1] * dt[(1, i)]);
            rhs -= t;
            mag += t.abs();
        }
        for (f, face) in d.geom.faces.iter().enumerate() {
            let eb = EdgeBasis::new(face.endpoints[0], face.endpoints[1], r as i64);
            let n = face.outward_normal();
            let ug = &local.as_slice()[d.layout.ug(f)];
            for (x, w) in rules.edge.map(face.endpoints[0], face.endpoints[1]) {
                let s = eb.eval(x);
                let vg = [dot(&s, &ug[..r + 1]), dot(&s, &ug[r + 1..])];
                let tau = d.sigma.fields.eval(x);
                for c in 0..2 {
                    let t = w * vg[c] * (tau[(2 * c, i)] * n[0] + tau[(2 * c + 1, i)] * n[1]);
                    rhs += t;
                    mag += t.abs();
                }
            }
        }
        worst = worst.max((lhs - rhs).abs() / (1.0 + mag));
    }
    worst
}
