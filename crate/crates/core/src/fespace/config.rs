use std::fmt;

use crate::error::{Error, Result};
use crate::poly::dim_p;

/// The three shape-space families selected by `(r, k, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `(k-1, k, k)`: rows are Raviart-Thomas fields.
    RaviartThomas,
    /// `(k, k, k)`: full `P_k` tensors.
    Bdm,
    /// `(k, k, k+1)`: `P_k` tensors enriched by `(x ⊗ x) H_{k-1}`.
    Enriched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    r: usize,
    k: usize,
    m: usize,
}

impl SpaceConfig {
    pub fn new(r: usize, k: usize, m: usize) -> Result<Self> {
        let err = |reason| Err(Error::InvalidConfig { r, k, m, reason });
        if k < 1 {
            return err("k must be at least 1");
        }
        if r != k && r + 1 != k {
            return err("r must equal k or k-1");
        }
        if m != k && m != k + 1 {
            return err("m must equal k or k+1");
        }
        if m < r || m > r + 1 {
            return err("r <= m <= r+1 is violated");
        }
        Ok(Self { r, k, m })
    }

    /// The default `r = m = k` member.
    pub fn bdm(k: usize) -> Result<Self> {
        Self::new(k, k, k)
    }

    /// Every admissible configuration with `k <= kmax`.
    pub fn all_up_to(kmax: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for k in 1..=kmax {
            for (r, m) in [(k - 1, k), (k, k), (k, k + 1)] {
                out.push(Self { r, k, m });
            }
        }
        out
    }

    pub fn r(&self) -> usize {
        self.r
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn family(&self) -> Family {
        if self.r + 1 == self.k {
            Family::RaviartThomas
        } else if self.m == self.k {
            Family::Bdm
        } else {
            Family::Enriched
        }
    }

    /// Polynomial degree of the vector space `V_{k-1,m-1}`.
    pub fn v_degree(&self) -> usize {
        self.m - 1
    }

    /// Polynomial degree of the tensor space `Σ_{r,k,m}`.
    pub fn sigma_degree(&self) -> usize {
        self.m
    }

    pub fn v_dim(&self) -> usize {
        let base = 2 * dim_p(self.k as i64 - 1);
        if self.m == self.k + 1 {
            base + self.k
        } else {
            base
        }
    }

    pub fn sigma_dim(&self) -> usize {
        let k = self.k;
        match self.family() {
            Family::RaviartThomas => 2 * k * (k + 2),
            Family::Bdm => 4 * dim_p(k as i64),
            Family::Enriched => 4 * dim_p(k as i64) + k,
        }
    }

    /// `dim P_r(F; R^2)`: tensor normal-trace DoFs per face.
    pub fn sigma_face_dofs(&self) -> usize {
        2 * (self.r + 1)
    }

    pub fn sigma_interior_dofs(&self) -> usize {
        self.sigma_dim() - 3 * self.sigma_face_dofs()
    }

    /// Vector normal-trace DoFs per face (`dim P_{k-1}(F)`).
    pub fn v_face_dofs(&self) -> usize {
        self.k
    }

    pub fn v_interior_dofs(&self) -> usize {
        self.v_dim().saturating_sub(3 * self.v_face_dofs())
    }

    /// `dim P_{m-2}(T)`: cell unknowns of the weak Galerkin space.
    pub fn u0_dim(&self) -> usize {
        dim_p(self.m as i64 - 2)
    }

    /// `dim P_{k-1}(F)`: face values of the weak Galerkin space.
    pub fn ub_dim(&self) -> usize {
        self.k
    }

    /// `dim P_r(F; R^2)`: face gradients of the weak Galerkin space.
    pub fn ug_dim(&self) -> usize {
        2 * (self.r + 1)
    }

    /// Degree of the rule used for products of local polynomials.
    pub fn local_quadrature_degree(&self) -> usize {
        2 * self.sigma_degree() + 2
    }

    /// Degree used when integrating transcendental data.
    pub fn data_quadrature_degree(&self) -> usize {
        2 * self.k + 8
    }
}

impl fmt::Display for SpaceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}r{}m{}", self.k, self.r, self.m)
    }
}
