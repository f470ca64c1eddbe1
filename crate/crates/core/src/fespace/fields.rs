//! Collections of polynomial scalar, vector or tensor fields on one cell.
//!
//! Component `c` of field `j` is `Σ_a comps[c][(a, j)] m_a`, where `m_a` runs
//! over the scaled monomials of `basis`. Tensors store entry `(i, j)` in
//! component `2 i + j`.

use nalgebra::DMatrix;

use crate::mesh::Point;
use crate::poly::ScaledMonomialBasis;

#[derive(Clone, Debug)]
pub struct FieldSet {
    pub basis: ScaledMonomialBasis,
    pub comps: Vec<DMatrix<f64>>,
}

/// Field values at a list of points: one `(points x fields)` matrix per component.
#[derive(Clone, Debug)]
pub struct Sampled {
    pub values: Vec<DMatrix<f64>>,
}

impl Sampled {
    /// `Σ_q w_q Σ_c a_c(x_q, i) b_c(x_q, j)`.
    pub fn inner(&self, other: &Sampled, weights: &[f64]) -> DMatrix<f64> {
        assert_eq!(self.values.len(), other.values.len());
        let mut out = DMatrix::zeros(self.values[0].ncols(), other.values[0].ncols());
        for (a, b) in self.values.iter().zip(&other.values) {
            let mut wb = b.clone();
            for (q, &w) in weights.iter().enumerate() {
                wb.row_mut(q).scale_mut(w);
            }
            out += a.transpose() * wb;
        }
        out
    }

    pub fn num_fields(&self) -> usize {
        self.values[0].ncols()
    }
}

impl FieldSet {
    pub fn zeros(basis: ScaledMonomialBasis, ncomp: usize, nfields: usize) -> Self {
        let n = basis.dim();
        Self {
            basis,
            comps: vec![DMatrix::zeros(n, nfields); ncomp],
        }
    }

    pub fn len(&self) -> usize {
        self.comps[0].ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    /// Re-expresses the set through `coeffs`: field `l` of the result is
    /// `Σ_j coeffs[(j, l)] field_j`.
    pub fn combine(&self, coeffs: &DMatrix<f64>) -> Self {
        Self {
            basis: self.basis.clone(),
            comps: self.comps.iter().map(|c| c * coeffs).collect(),
        }
    }

    pub fn sample(&self, points: &[Point]) -> Sampled {
        let n = self.basis.dim();
        let mut e = DMatrix::zeros(points.len(), n);
        let mut row = vec![0.0; n];
        for (q, &x) in points.iter().enumerate() {
            self.basis.eval_into(x, &mut row);
            for (a, &v) in row.iter().enumerate() {
                e[(q, a)] = v;
            }
        }
        Sampled {
            values: self.comps.iter().map(|c| &e * c).collect(),
        }
    }

    /// Values of every field at one point, `(ncomp x nfields)`.
    pub fn eval(&self, x: Point) -> DMatrix<f64> {
        let m = self.basis.eval(x);
        let mut out = DMatrix::zeros(self.ncomp(), self.len());
        for (c, comp) in self.comps.iter().enumerate() {
            for j in 0..self.len() {
                out[(c, j)] = (0..m.len()).map(|a| m[a] * comp[(a, j)]).sum();
            }
        }
        out
    }

    /// Row-wise divergence of tensors, or divergence of vectors.
    pub fn divergence(&self) -> Self {
        let dx = self.basis.derivative_matrix(0);
        let dy = self.basis.derivative_matrix(1);
        let comps = match self.ncomp() {
            2 => vec![&dx * &self.comps[0] + &dy * &self.comps[1]],
            4 => vec![
                &dx * &self.comps[0] + &dy * &self.comps[1],
                &dx * &self.comps[2] + &dy * &self.comps[3],
            ],
            n => panic!("divergence of a {n}-component field"),
        };
        Self {
            basis: self.basis.clone(),
            comps,
        }
    }

    /// `grad v = (∂_j v_i)` of vector fields, or the gradient of scalars.
    pub fn grad(&self) -> Self {
        let d = [self.basis.derivative_matrix(0), self.basis.derivative_matrix(1)];
        let mut comps = Vec::with_capacity(2 * self.ncomp());
        for c in &self.comps {
            for dj in &d {
                comps.push(dj * c);
            }
        }
        Self {
            basis: self.basis.clone(),
            comps,
        }
    }

    /// `v · n` for vectors or `τ n` for tensors, with a constant normal.
    pub fn normal_trace(&self, n: Point) -> Self {
        let comps = match self.ncomp() {
            2 => vec![&self.comps[0] * n[0] + &self.comps[1] * n[1]],
            4 => vec![
                &self.comps[0] * n[0] + &self.comps[1] * n[1],
                &self.comps[2] * n[0] + &self.comps[3] * n[1],
            ],
            c => panic!("normal trace of a {c}-component field"),
        };
        Self {
            basis: self.basis.clone(),
            comps,
        }
    }

    /// The fields listed in `cols`, in that order.
    pub fn select(&self, cols: &[usize]) -> Self {
        Self {
            basis: self.basis.clone(),
            comps: self.comps.iter().map(|c| c.select_columns(cols)).collect(),
        }
    }

    /// The fields of `self` followed by those of `other` (same monomial basis).
    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.basis.dim(), other.basis.dim());
        assert_eq!(self.ncomp(), other.ncomp());
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                let mut c = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
                c.columns_mut(0, a.ncols()).copy_from(a);
                c.columns_mut(a.ncols(), b.ncols()).copy_from(b);
                c
            })
            .collect();
        Self {
            basis: self.basis.clone(),
            comps,
        }
    }
}
