//! Nonconforming reconstruction for `k = 1`: Crouzeix-Raviart (`m = 1`) or
//! `P_1 + span{|x|^2}` (`m = 2`), fixed by face averages and, for `m = 2`,
//! the cell average.

use nalgebra::DMatrix;

use super::CellWeakData;
use crate::error::{Error, Result};
use crate::fespace::FieldSet;
use crate::mesh::Point;

#[derive(Clone, Debug)]
pub struct NcReconstruction {
    /// Scalar shape functions.
    pub shape: FieldSet,
    /// Local WG data to shape coefficients.
    pub operator: DMatrix<f64>,
}

impl NcReconstruction {
    pub fn new(data: &CellWeakData) -> Result<Self> {
        let cfg = data.cfg;
        if cfg.k() != 1 {
            return Err(Error::Unsupported(format!(
                "nonconforming reconstruction needs k = 1, got {cfg}"
            )));
        }
        let geom = &data.geom;
        let enriched = cfg.m() == 2;
        let basis = geom.basis(if enriched { 2 } else { 1 });
        let nshape = if enriched { 4 } else { 3 };
        let mut shape = FieldSet::zeros(basis.clone(), 1, nshape);
        for i in 0..3 {
            shape.comps[0][(i, i)] = 1.0;
        }
        if enriched {
            shape.comps[0][(3, 3)] = 1.0;
            shape.comps[0][(5, 3)] = 1.0;
        }
        let rules = crate::poly::Rules::new(4)?;
        let mut d = DMatrix::zeros(nshape, nshape);
        for (i, face) in geom.faces.iter().enumerate() {
            let (pts, wts) = face.points(&rules.edge);
            let s = shape.sample(&pts);
            for l in 0..nshape {
                d[(i, l)] = (0..pts.len()).map(|q| wts[q] * s.values[0][(q, l)]).sum::<f64>() / face.length;
            }
        }
        if enriched {
            let (pts, wts) = geom.points(&rules.triangle);
            let s = shape.sample(&pts);
            for l in 0..nshape {
                d[(3, l)] = (0..pts.len()).map(|q| wts[q] * s.values[0][(q, l)]).sum::<f64>() / geom.area;
            }
        }
        let inv = d.try_inverse().ok_or(Error::Singular)?;
        let layout = data.layout;
        let mut select = DMatrix::zeros(nshape, layout.len());
        for i in 0..3 {
            select[(i, layout.ub(i).start)] = 1.0;
        }
        if enriched {
            select[(3, 0)] = 1.0;
        }
        Ok(Self {
            shape,
            operator: inv * select,
        })
    }

    pub fn eval(&self, local: &[f64], x: Point) -> f64 {
        let e = self.shape.eval(x);
        (0..self.shape.len())
            .map(|l| e[(0, l)] * (0..local.len()).map(|j| self.operator[(l, j)] * local[j]).sum::<f64>())
            .sum()
    }
}
