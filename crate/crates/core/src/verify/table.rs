use std::fmt::Write as _;

use super::cases::{CaseId, ManufacturedCase};
use super::norms::{error_norms, ErrorReport, NormId};
use crate::error::{Error, Result};
use crate::fespace::SpaceConfig;
use crate::mesh::SimplicialMesh;
use crate::schemes::{solve, Discretization, Scheme, SolveOptions};

/// Scientific notation with four significant digits and a two-digit exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.3e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub case: CaseId,
    pub cfg: SpaceConfig,
    pub eps: f64,
    pub norm: NormId,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn new(case: CaseId, cfg: SpaceConfig, eps: f64, norm: NormId) -> Self {
        Self {
            case,
            cfg,
            eps,
            norm,
            rows: Vec::new(),
        }
    }

    /// Appends a level; the rate is `log2(e_{2h} / e_h)` against the previous row.
    pub fn push(&mut self, n: usize, h: f64, error: f64) {
        let rate = self.rows.last().map(|p| (p.error / error).ln() / (p.h / h).ln());
        self.rows.push(TableRow { n, h, error, rate });
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    /// `<case>_k<k>r<r>m<m>_eps<ε>_<norm>.csv`
    pub fn file_stem(&self) -> String {
        format!(
            "{}_k{}r{}m{}_eps{}_{}",
            self.case,
            self.cfg.k(),
            self.cfg.r(),
            self.cfg.m(),
            eps_label(self.eps),
            self.norm.name()
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h,error,rate\n");
        for r in &self.rows {
            let rate = r.rate.map(|v| format!("{v:.2}")).unwrap_or_default();
            writeln!(s, "{},{},{},{}", r.n, sci(r.h), sci(r.error), rate).unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "{} {} eps={} {}\n\n| n | h | error | rate |\n|---:|---:|---:|---:|\n",
            self.case,
            self.cfg,
            sci(self.eps),
            self.norm.name()
        );
        for r in &self.rows {
            let rate = r.rate.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            writeln!(s, "| {} | {} | {} | {} |", r.n, sci(r.h), sci(r.error), rate).unwrap();
        }
        s
    }
}

/// Compact `ε` label for file names, e.g. `1e-06`.
pub fn eps_label(eps: f64) -> String {
    let s = format!("{eps:e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { "-" } else { "" };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[derive(Clone, Debug)]
pub struct StudySpec {
    pub case: CaseId,
    pub cfg: SpaceConfig,
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub norms: Vec<NormId>,
    pub scheme: Scheme,
    pub options: SolveOptions,
}

/// Runs every `(ε, n)` pair and returns one table per `(ε, norm)`, ordered
/// by `ε` then norm. Discretizations are shared across `ε`.
pub fn convergence_study(spec: &StudySpec) -> Result<Vec<ConvergenceTable>> {
    if spec.n.is_empty() || spec.eps.is_empty() {
        return Err(Error::Unsupported("empty n or eps list".into()));
    }
    if spec.n.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Unsupported("n list must be increasing".into()));
    }
    for norm in &spec.norms {
        if !norm.valid_for(spec.case) {
            return Err(Error::Unsupported(format!(
                "{} is not defined for {}",
                norm.name(),
                spec.case
            )));
        }
    }
    let mut reports: Vec<Vec<ErrorReport>> = vec![Vec::new(); spec.eps.len()];
    let degree = spec.options.quad_degree.unwrap_or(spec.cfg.data_quadrature_degree());
    for &n in &spec.n {
        let mesh = SimplicialMesh::uniform_unit_square(n)?;
        let disc = Discretization::new(&mesh, spec.cfg)?;
        for (i, &eps) in spec.eps.iter().enumerate() {
            let wrap = |e: Error| Error::Study {
                eps,
                n,
                source: Box::new(e),
            };
            let case = ManufacturedCase::new(spec.case, eps);
            let f = |x| case.f(x);
            let sol = solve(&disc, eps, &f, spec.scheme, &spec.options).map_err(wrap)?;
            let mut rep = error_norms(&disc, &case, &sol, degree).map_err(wrap)?;
            rep.n = n;
            reports[i].push(rep);
        }
    }
    let mut tables = Vec::new();
    for (i, &eps) in spec.eps.iter().enumerate() {
        for &norm in &spec.norms {
            let mut t = ConvergenceTable::new(spec.case, spec.cfg, eps, norm);
            for rep in &reports[i] {
                t.push(rep.n, 1.0 / rep.n as f64, rep.get(norm).expect("norm valid for case"));
            }
            tables.push(t);
        }
    }
    Ok(tables)
}
