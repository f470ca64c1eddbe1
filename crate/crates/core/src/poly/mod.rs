//! Scaled monomial bases on triangles and edges.
//!
//! A triangle basis of degree `k` consists of `((x - x_c)/h)^a ((y - y_c)/h)^b`
//! with `a + b <= k`, ordered by total degree and, within one degree, by
//! decreasing power of `x`. Because of that ordering the degree-`j` basis is a
//! prefix of the degree-`k` basis for every `j <= k`, so coefficient vectors
//! of lower degree embed by zero padding.

pub mod quadrature;

use nalgebra::DMatrix;

use crate::mesh::Point;

pub use quadrature::{EdgeRule, Rules, TriangleRule};

/// `dim P_k` in two variables; zero for negative `k`.
pub fn dim_p(k: i64) -> usize {
    if k < 0 {
        0
    } else {
        let k = k as usize;
        (k + 1) * (k + 2) / 2
    }
}

/// Exponents `(a, b)` of all monomials of total degree at most `k`.
pub fn exponents(k: i64) -> Vec<(u32, u32)> {
    (0..=k.max(-1)).flat_map(homogeneous_exponents).collect()
}

/// Exponents of the `d + 1` monomials of exact total degree `d`.
pub fn homogeneous_exponents(d: i64) -> Vec<(u32, u32)> {
    if d < 0 {
        return Vec::new();
    }
    let d = d as u32;
    (0..=d).rev().map(|a| (a, d - a)).collect()
}

/// Position of `x^a y^b` in the ordering used by [`exponents`].
pub fn monomial_index(a: u32, b: u32) -> usize {
    let d = (a + b) as usize;
    d * (d + 1) / 2 + (d - a as usize)
}

/// Centered and scaled coordinates `(x - center) / scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub scale: f64,
}

impl Frame {
    pub fn local(&self, x: Point) -> Point {
        [
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ScaledMonomialBasis {
    pub frame: Frame,
    pub degree: i64,
    pub exps: Vec<(u32, u32)>,
}

fn powers(t: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        p.push(acc);
        acc *= t;
    }
    p
}

impl ScaledMonomialBasis {
    /// Basis of `P_k(T)` centered at `frame.center`.
    pub fn triangle(k: i64, frame: Frame) -> Self {
        Self {
            frame,
            degree: k,
            exps: exponents(k),
        }
    }

    /// Basis of the homogeneous polynomials `H_k(T)` in the centered coordinates.
    pub fn homogeneous(k: i64, frame: Frame) -> Self {
        Self {
            frame,
            degree: k,
            exps: homogeneous_exponents(k),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: Point, out: &mut [f64]) {
        let [s, t] = self.frame.local(x);
        let n = self.degree.max(0) as usize;
        let ps = powers(s, n);
        let pt = powers(t, n);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = ps[a as usize] * pt[b as usize];
        }
    }

    /// Physical gradients of every basis member at `x`.
    pub fn grad(&self, x: Point) -> Vec<Point> {
        let [s, t] = self.frame.local(x);
        let n = self.degree.max(0) as usize;
        let ps = powers(s, n);
        let pt = powers(t, n);
        let h = self.frame.scale;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as usize, b as usize);
                let dx = if a > 0 { a as f64 * ps[a - 1] * pt[b] } else { 0.0 };
                let dy = if b > 0 { b as f64 * ps[a] * pt[b - 1] } else { 0.0 };
                [dx / h, dy / h]
            })
            .collect()
    }

    /// Matrix mapping coefficients of `p` to coefficients of `d p / d x_axis`
    /// in the same (full) basis.
    pub fn derivative_matrix(&self, axis: usize) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            let (p, src) = if axis == 0 {
                (a, (a.wrapping_sub(1), b))
            } else {
                (b, (a, b.wrapping_sub(1)))
            };
            if p > 0 {
                let i = monomial_index(src.0, src.1);
                d[(i, j)] = p as f64 / self.frame.scale;
            }
        }
        d
    }
}

/// Scaled monomials `s^j`, `s = (x - mid) . t / |F|`, on an edge.
#[derive(Clone, Copy, Debug)]
pub struct EdgeBasis {
    pub mid: Point,
    pub tangent: Point,
    pub length: f64,
    pub degree: i64,
}

impl EdgeBasis {
    pub fn new(a: Point, b: Point, degree: i64) -> Self {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        Self {
            mid: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            tangent: [(b[0] - a[0]) / len, (b[1] - a[1]) / len],
            length: len,
            degree,
        }
    }

    pub fn dim(&self) -> usize {
        (self.degree + 1).max(0) as usize
    }

    pub fn param(&self, x: Point) -> f64 {
        ((x[0] - self.mid[0]) * self.tangent[0] + (x[1] - self.mid[1]) * self.tangent[1]) / self.length
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        if self.degree < 0 {
            return Vec::new();
        }
        powers(self.param(x), self.degree as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> Frame {
        Frame {
            center: [0.3, -0.2],
            scale: 0.7,
        }
    }

    #[test]
    fn dimensions() {
        let f = frame();
        assert_eq!(ScaledMonomialBasis::triangle(0, f).dim(), 1);
        assert_eq!(ScaledMonomialBasis::triangle(3, f).dim(), 10);
        assert_eq!(ScaledMonomialBasis::homogeneous(0, f).dim(), 1);
        assert_eq!(ScaledMonomialBasis::homogeneous(2, f).dim(), 3);
        assert_eq!(ScaledMonomialBasis::triangle(-1, f).dim(), 0);
        for k in 0..=5 {
            let sum: usize = (0..=k).map(|j| ScaledMonomialBasis::homogeneous(j, f).dim()).sum();
            assert_eq!(sum, dim_p(k));
        }
    }

    #[test]
    fn ordering_and_index() {
        let e = exponents(4);
        for (i, &(a, b)) in e.iter().enumerate() {
            assert_eq!(monomial_index(a, b), i);
        }
        assert_eq!(&e[..3], &[(0, 0), (1, 0), (0, 1)]);
    }

    #[test]
    fn gradient_of_linear_member() {
        let f = frame();
        let b = ScaledMonomialBasis::triangle(2, f);
        let g = b.grad([1.0, 2.0]);
        assert!((g[1][0] - 1.0 / f.scale).abs() < 1e-15);
        assert_eq!(g[1][1], 0.0);
    }

    #[test]
    fn derivative_matrix_matches_gradient() {
        let f = frame();
        let b = ScaledMonomialBasis::triangle(4, f);
        let dx = b.derivative_matrix(0);
        let dy = b.derivative_matrix(1);
        let x = [0.41, 0.13];
        let v = b.eval(x);
        let g = b.grad(x);
        for j in 0..b.dim() {
            let px: f64 = (0..b.dim()).map(|i| dx[(i, j)] * v[i]).sum();
            let py: f64 = (0..b.dim()).map(|i| dy[(i, j)] * v[i]).sum();
            assert!((px - g[j][0]).abs() < 1e-12 && (py - g[j][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_matrix_by_quadrature_matches_exact_moments() {
        // monomial moments on the reference triangle: a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let f = Frame {
            center: [0.0, 0.0],
            scale: 1.0,
        };
        let k = 3;
        let basis = ScaledMonomialBasis::triangle(k, f);
        let rule = TriangleRule::new(2 * k as usize).unwrap();
        let n = basis.dim();
        let mut mass = DMatrix::<f64>::zeros(n, n);
        for (x, w) in rule.map(&verts) {
            let v = basis.eval(x);
            for i in 0..n {
                for j in 0..n {
                    mass[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        for (i, &(a1, b1)) in basis.exps.iter().enumerate() {
            for (j, &(a2, b2)) in basis.exps.iter().enumerate() {
                let (a, b) = (a1 + a2, b1 + b2);
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!(((mass[(i, j)] - exact) / exact).abs() < 1e-12);
            }
        }
        assert!(mass.clone().cholesky().is_some());
    }

    #[test]
    fn edge_basis() {
        let e = EdgeBasis::new([0.0, 0.0], [2.0, 0.0], 2);
        assert_eq!(e.dim(), 3);
        assert!((e.param([2.0, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(e.eval([1.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }
}
