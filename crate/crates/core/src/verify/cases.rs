use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::mesh::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// `u = sin²(πx) sin²(πy)`, `f = ε²Δ²u - Δu`.
    Example1,
    /// `f = 2π² sin(πx) sin(πy)`, compared with the reduced solution `ū`.
    Example3,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::Example1 => "example1",
            CaseId::Example3 => "example3",
        })
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "example1" => Ok(CaseId::Example1),
            "example3" => Ok(CaseId::Example3),
            _ => Err(Error::Unsupported(format!("unknown case '{s}'"))),
        }
    }
}

/// `sin²(πt)` and its first four derivatives.
fn s2(t: f64) -> [f64; 5] {
    let s = (PI * t).sin();
    let (s2, c2) = (2.0 * PI * t).sin_cos();
    [
        s * s,
        PI * s2,
        2.0 * PI * PI * c2,
        -4.0 * PI.powi(3) * s2,
        -8.0 * PI.powi(4) * c2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub eps: f64,
}

impl ManufacturedCase {
    pub fn new(id: CaseId, eps: f64) -> Self {
        Self { id, eps }
    }

    /// Exact solution (`ū` for example 3).
    pub fn u(&self, x: Point) -> f64 {
        match self.id {
            CaseId::Example1 => s2(x[0])[0] * s2(x[1])[0],
            CaseId::Example3 => (PI * x[0]).sin() * (PI * x[1]).sin(),
        }
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        match self.id {
            CaseId::Example1 => {
                let (a, b) = (s2(x[0]), s2(x[1]));
                [a[1] * b[0], a[0] * b[1]]
            }
            CaseId::Example3 => {
                let (sx, cx) = (PI * x[0]).sin_cos();
                let (sy, cy) = (PI * x[1]).sin_cos();
                [PI * cx * sy, PI * sx * cy]
            }
        }
    }

    /// Row-major Hessian `[u_xx, u_xy, u_yx, u_yy]`.
    pub fn hessian(&self, x: Point) -> [f64; 4] {
        match self.id {
            CaseId::Example1 => {
                let (a, b) = (s2(x[0]), s2(x[1]));
                let xy = a[1] * b[1];
                [a[2] * b[0], xy, xy, a[0] * b[2]]
            }
            CaseId::Example3 => {
                let (sx, cx) = (PI * x[0]).sin_cos();
                let (sy, cy) = (PI * x[1]).sin_cos();
                let p2 = PI * PI;
                [-p2 * sx * sy, p2 * cx * cy, p2 * cx * cy, -p2 * sx * sy]
            }
        }
    }

    pub fn laplacian(&self, x: Point) -> f64 {
        let h = self.hessian(x);
        h[0] + h[3]
    }

    /// `Δ²u`.
    pub fn bilaplacian(&self, x: Point) -> f64 {
        match self.id {
            CaseId::Example1 => {
                let (a, b) = (s2(x[0]), s2(x[1]));
                a[4] * b[0] + 2.0 * a[2] * b[2] + a[0] * b[4]
            }
            CaseId::Example3 => 4.0 * PI.powi(4) * (PI * x[0]).sin() * (PI * x[1]).sin(),
        }
    }

    pub fn f(&self, x: Point) -> f64 {
        match self.id {
            CaseId::Example1 => self.eps * self.eps * self.bilaplacian(x) - self.laplacian(x),
            CaseId::Example3 => -self.laplacian(x),
        }
    }

    /// `σ = ε² ∇²u`.
    pub fn sigma(&self, x: Point) -> [f64; 4] {
        self.hessian(x).map(|v| v * self.eps * self.eps)
    }
}
