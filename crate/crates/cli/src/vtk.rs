use std::fmt::Write as _;

use ssp4::fespace::SpaceTag;
use ssp4::poly::Rules;
use ssp4::schemes::{Discretization, SchemeSolution};
use ssp4::verify::sci;
use ssp4::weakops::{eval_fields, gather};
use ssp4::Result;

/// Cell averages exported for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFields {
    /// Mean over each cell of `|σ_h / ε²|_F`.
    pub frob_sigma_over_eps2: Vec<f64>,
    /// Mean of `u_0` (only when `m ≥ 2`).
    pub u0: Option<Vec<f64>>,
}

pub fn cell_fields(disc: &Discretization, sol: &SchemeSolution) -> Result<CellFields> {
    let rules = Rules::new(2 * disc.cfg.m() + 2)?;
    let sigma = gather(&sol.sigma, &disc.maps, SpaceTag::SigmaDiv);
    let u0 = gather(&sol.u0, &disc.maps, SpaceTag::PolyBroken);
    let scale = 1.0 / (sol.eps * sol.eps);
    let mut frob = Vec::with_capacity(disc.cells.len());
    let mut mean_u0 = Vec::with_capacity(disc.cells.len());
    for (c, d) in disc.cells.iter().enumerate() {
        let mut acc = 0.0;
        let mut acc_u = 0.0;
        for (x, w) in rules.triangle.map(&d.geom.vertices) {
            let s = eval_fields(&d.sigma.fields, &sigma[c], x);
            acc += w * scale * s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if disc.cfg.m() >= 2 {
                acc_u += w * d.eval_u0(u0[c].as_slice(), x);
            }
        }
        frob.push(acc / d.geom.area);
        mean_u0.push(acc_u / d.geom.area);
    }
    Ok(CellFields {
        frob_sigma_over_eps2: frob,
        u0: (disc.cfg.m() >= 2).then_some(mean_u0),
    })
}

/// Legacy ASCII VTK unstructured grid with the cell fields as `CELL_DATA`.
pub fn to_vtk(disc: &Discretization, fields: &CellFields, title: &str) -> String {
    let mesh = disc.mesh;
    let mut s = String::new();
    writeln!(
        s,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID"
    )
    .unwrap();
    writeln!(s, "POINTS {} double", mesh.vertices.len()).unwrap();
    for p in &mesh.vertices {
        // coordinates keep full precision
        writeln!(s, "{:e} {:e} 0", p[0], p[1]).unwrap();
    }
    let nc = mesh.cells.len();
    writeln!(s, "CELLS {nc} {}", 4 * nc).unwrap();
    for c in &mesh.cells {
        writeln!(s, "3 {} {} {}", c[0], c[1], c[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nc}").unwrap();
    for _ in 0..nc {
        s.push_str("5\n");
    }
    writeln!(s, "CELL_DATA {nc}").unwrap();
    let mut scalar = |name: &str, vals: &[f64]| {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in vals {
            writeln!(s, "{}", sci(*v)).unwrap();
        }
    };
    scalar("frob_sigma_over_eps2", &fields.frob_sigma_over_eps2);
    if let Some(u0) = &fields.u0 {
        scalar("u0", u0);
    }
    s
}
