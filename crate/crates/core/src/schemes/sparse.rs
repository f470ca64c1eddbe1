//! Triplet systems and the sparse direct solvers behind them.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub symmetric: bool,
    pub n: usize,
    /// Row, column, value; duplicates are summed.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

const SPD_TOL: f64 = 1e-10;
const INDEFINITE_TOL: f64 = 1e-9;

impl SparseSystem {
    pub fn new(n: usize, symmetric: bool) -> Self {
        Self {
            symmetric,
            n,
            entries: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    pub fn from_dense(a: &DMatrix<f64>, rhs: &[f64], symmetric: bool) -> Self {
        let mut s = Self::new(a.nrows(), symmetric);
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != 0.0 {
                    s.entries.push((i, j, a[(i, j)]));
                }
            }
        }
        s.rhs.copy_from_slice(rhs);
        s
    }

    /// Adds a local block; `None` rows or columns are dropped.
    pub fn add_block(&mut self, rows: &[Option<usize>], cols: &[Option<usize>], block: &DMatrix<f64>) {
        for (j, cj) in cols.iter().enumerate() {
            let Some(cj) = *cj else { continue };
            for (i, ri) in rows.iter().enumerate() {
                let Some(ri) = *ri else { continue };
                let v = block[(i, j)];
                if v != 0.0 {
                    self.entries.push((ri, cj, v));
                }
            }
        }
    }

    /// Sums duplicates and sorts column-major.
    pub fn compress(&mut self) {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (j, i));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        self.entries = out;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] += v;
            }
        }
        d
    }

    /// `|Ax - b| / |b|` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r: f64 = ax
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let b: f64 = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b > 0.0 {
            r / b
        } else {
            r
        }
    }

    /// Componentwise backward error `max_i |b - Ax|_i / (|A||x| + |b|)_i`.
    pub fn backward_error(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let mut r = self.rhs.clone();
        let mut scale: Vec<f64> = self.rhs.iter().map(|b| b.abs()).collect();
        for &(i, j, v) in &self.entries {
            r[i] -= v * x[j];
            scale[i] += (v * x[j]).abs();
        }
        r.iter().zip(&scale).fold(
            0.0,
            |m, (r, s)| if *s > 0.0 { m.max(r.abs() / s) } else { m.max(r.abs()) },
        )
    }

    /// Largest `|A_ij - A_ji|` relative to `max |A|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut sys = self.clone();
        sys.compress();
        let mut map = std::collections::HashMap::with_capacity(sys.entries.len());
        let mut amax: f64 = 0.0;
        for &(i, j, v) in &sys.entries {
            map.insert((i, j), v);
            amax = amax.max(v.abs());
        }
        let mut worst: f64 = 0.0;
        for (&(i, j), &v) in &map {
            let t = map.get(&(j, i)).copied().unwrap_or(0.0);
            worst = worst.max((v - t).abs());
        }
        if amax > 0.0 {
            worst / amax
        } else {
            0.0
        }
    }

    fn scaling(&self) -> Vec<f64> {
        self.diagonal()
            .iter()
            .map(|&d| if d.abs() > 0.0 { 1.0 / d.abs().sqrt() } else { 1.0 })
            .collect()
    }

    fn scaled_matrix(&self, s: &[f64]) -> Result<SparseColMat<usize, f64>> {
        let trips: Vec<Triplet<usize, usize, f64>> = self
            .entries
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v * s[i] * s[j]))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &trips)
            .map_err(|e| Error::Unsupported(format!("sparse matrix construction failed: {e:?}")))
    }
}

fn refine<F: Fn(&[f64]) -> Vec<f64>>(sys: &SparseSystem, s: &[f64], solve: F, tol: f64) -> Result<Vec<f64>> {
    let scaled = |r: &[f64]| -> Vec<f64> {
        let y = solve(&r.iter().zip(s).map(|(a, b)| a * b).collect::<Vec<_>>());
        y.iter().zip(s).map(|(a, b)| a * b).collect()
    };
    let mut x = scaled(&sys.rhs);
    let mut res = sys.backward_error(&x);
    for _ in 0..3 {
        if res < 0.1 * tol || !res.is_finite() {
            break;
        }
        let ax = sys.matvec(&x);
        let r: Vec<f64> = sys.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = scaled(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let cres = sys.backward_error(&cand);
        if cres >= res {
            break;
        }
        x = cand;
        res = cres;
    }
    if res.is_nan() || res >= tol {
        return Err(Error::Residual { residual: res, tol });
    }
    Ok(x)
}

fn to_mat(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn from_mat(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Sparse Cholesky (fill-reducing ordering) after symmetric diagonal scaling.
pub fn solve_spd(sys: &SparseSystem) -> Result<Vec<f64>> {
    if !sys.symmetric {
        return Err(Error::NotSpd);
    }
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    let s = sys.scaling();
    if sys.diagonal().iter().any(|&d| d <= 0.0) {
        return Err(Error::NotSpd);
    }
    let a = sys.scaled_matrix(&s)?;
    let llt = a.sp_cholesky(Side::Lower).map_err(|_| Error::NotSpd)?;
    refine(sys, &s, |b| from_mat(&llt.solve(to_mat(b))), SPD_TOL)
}

/// Sparse LU with partial pivoting after symmetric diagonal scaling.
pub fn solve_indefinite(sys: &SparseSystem) -> Result<Vec<f64>> {
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    let s = sys.scaling();
    let a = sys.scaled_matrix(&s)?;
    let lu = a.sp_lu().map_err(|_| Error::Singular)?;
    let x = refine(sys, &s, |b| from_mat(&lu.solve(to_mat(b))), INDEFINITE_TOL);
    match x {
        Err(Error::Residual { residual, .. }) if !residual.is_finite() => Err(Error::Singular),
        other => other,
    }
}

/// Smallest Ritz value of `steps` Lanczos iterations on the diagonally
/// scaled matrix, started from a seeded random vector.
pub fn lanczos_smallest_ritz(sys: &SparseSystem, steps: usize, seed: u64) -> f64 {
    let n = sys.n;
    let s = sys.scaling();
    let apply = |x: &[f64]| -> Vec<f64> {
        let sx: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a * b).collect();
        sys.matvec(&sx).iter().zip(&s).map(|(a, b)| a * b).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= norm);
    let mut basis = vec![q.clone()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for it in 0..steps.min(n) {
        let mut w = apply(&basis[it]);
        let a: f64 = w.iter().zip(&basis[it]).map(|(x, y)| x * y).sum();
        alpha.push(a);
        // full reorthogonalization keeps the short run reliable
        for b in &basis {
            let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let nb = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb < 1e-14 || it + 1 == steps.min(n) {
            break;
        }
        beta.push(nb);
        basis.push(w.iter().map(|v| v / nb).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t).eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let sys = SparseSystem::from_dense(&DMatrix::identity(3, 3), &[1.0, 2.0, 3.0], true);
        assert_eq!(solve_spd(&sys).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 4.0]));
        let x = solve_spd(&SparseSystem::from_dense(&d, &[1.0, 2.0, 4.0], true)).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn random_spd_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = DMatrix::from_fn(50, 50, |_, _| rng.random_range(-1.0..1.0));
        let a = b.transpose() * &b + DMatrix::identity(50, 50);
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x = solve_spd(&SparseSystem::from_dense(&a, &rhs, true)).unwrap();
        let oracle = a.cholesky().unwrap().solve(&nalgebra::DVector::from_vec(rhs));
        for i in 0..50 {
            assert!((x[i] - oracle[i]).abs() < 1e-10 * (1.0 + oracle[i].abs()));
        }
    }

    #[test]
    fn rejects_indefinite_as_spd() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            solve_spd(&SparseSystem::from_dense(&a, &[1.0, 0.0], true)),
            Err(Error::NotSpd)
        ));
    }

    #[test]
    fn small_saddle_and_permutation() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let x = solve_indefinite(&SparseSystem::from_dense(&a, &[2.0, 1.0], true)).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let x = solve_indefinite(&SparseSystem::from_dense(&p, &[1.0, 2.0, 3.0], false)).unwrap();
        assert_eq!(x, vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn random_invertible_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = DMatrix::from_fn(50, 50, |i, j| {
            rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 }
        });
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let x = solve_indefinite(&SparseSystem::from_dense(&a, &rhs, false)).unwrap();
        let oracle = a.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for i in 0..50 {
            assert!((x[i] - oracle[i]).abs() < 1e-9 * (1.0 + oracle[i].abs()));
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve_indefinite(&SparseSystem::from_dense(&a, &[1.0, 1.0], false)).is_err());
    }

    #[test]
    fn duplicates_are_summed() {
        let mut s = SparseSystem::new(2, true);
        s.entries = vec![(0, 0, 1.0), (1, 1, 1.0), (0, 0, 1.0), (1, 1, 3.0)];
        s.rhs = vec![2.0, 4.0];
        let x = solve_spd(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14, "{x:?}");
        s.compress();
        assert_eq!(s.entries.len(), 2);
    }

    #[test]
    fn lanczos_finds_small_eigenvalue() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec((1..=10).map(|i| i as f64).collect()));
        let sys = SparseSystem::from_dense(&d, &[0.0; 10], true);
        // diagonal scaling makes the operator the identity
        assert!((lanczos_smallest_ritz(&sys, 20, 1) - 1.0).abs() < 1e-12);
    }
}
