use std::io::Write;
use std::path::{Path, PathBuf};

use ssp4::fespace::SpaceConfig;
use ssp4::schemes::{solve, Discretization, SolveOptions};
use ssp4::verify::{
    convergence_study, eps_label, equivalence_suite, error_norms, property_suite, sci, ManufacturedCase, StudySpec,
    SuiteReport,
};
use ssp4::SimplicialMesh;

use crate::config::{CommandKind, RunConfig, UsageError};
use crate::vtk::{cell_fields, to_vtk, CellFields};

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "usage error: {e}"),
            CliError::Failure(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<ssp4::Error> for CliError {
    fn from(e: ssp4::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        condense: false,
        perturb_cell: cfg.perturb.then_some(0),
        quad_degree: cfg.quad_degree,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// Dispatches a resolved configuration. `Ok(false)` means a check failed.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    match cfg.command {
        CommandKind::Convergence => cmd_convergence(cfg, out).map(|_| true),
        CommandKind::Solve => cmd_solve(cfg, out).map(|_| true),
        CommandKind::ExportField => cmd_export_field(cfg, out).map(|_| true),
        CommandKind::Verify => cmd_verify(cfg, out),
    }
}

/// Writes `<out>/<stem>.csv` and `.md` per table; returns the CSV paths.
pub fn cmd_convergence(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let spec = StudySpec {
        case: cfg.case,
        cfg: cfg.cfg,
        eps: cfg.eps.clone(),
        n: cfg.n.clone(),
        norms: cfg.norms.clone(),
        scheme: cfg.scheme,
        options: options(cfg),
    };
    let tables = convergence_study(&spec)?;
    std::fs::create_dir_all(&cfg.out)?;
    let mut paths = Vec::new();
    for t in &tables {
        let csv = cfg.out.join(format!("{}.csv", t.file_stem()));
        write_file(&csv, &t.to_csv())?;
        write_file(&cfg.out.join(format!("{}.md", t.file_stem())), &t.to_markdown())?;
        writeln!(out, "{}", t.to_markdown())?;
        paths.push(csv);
    }
    Ok(paths)
}

pub fn cmd_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (eps, n) = (cfg.eps[0], cfg.n[0]);
    let mesh = SimplicialMesh::uniform_unit_square(n)?;
    let disc = Discretization::new(&mesh, cfg.cfg)?;
    let case = ManufacturedCase::new(cfg.case, eps);
    let f = |x| case.f(x);
    let sol = solve(&disc, eps, &f, cfg.scheme, &options(cfg))?;
    let degree = cfg.quad_degree.unwrap_or(cfg.cfg.data_quadrature_degree());
    let rep = error_norms(&disc, &case, &sol, degree)?;
    writeln!(
        out,
        "{} {} {} eps={} n={}",
        cfg.case,
        cfg.cfg,
        cfg.scheme.name(),
        sci(eps),
        n
    )?;
    writeln!(out, "residual {}", sci(sol.residual))?;
    for norm in &cfg.norms {
        if let Some(v) = rep.get(*norm) {
            writeln!(out, "{} {}", norm.name(), sci(v))?;
        }
    }
    Ok(())
}

/// `<out>/<case>_k<k>r<r>m<m>_eps<ε>_n<n>.vtk`
pub fn vtk_path(cfg: &RunConfig) -> PathBuf {
    let c = cfg.cfg;
    cfg.out.join(format!(
        "{}_k{}r{}m{}_eps{}_n{}.vtk",
        cfg.case,
        c.k(),
        c.r(),
        c.m(),
        eps_label(cfg.eps[0]),
        cfg.n[0]
    ))
}

pub fn cmd_export_field(cfg: &RunConfig, out: &mut dyn Write) -> Result<CellFields, CliError> {
    let (eps, n) = (cfg.eps[0], cfg.n[0]);
    let mesh = SimplicialMesh::uniform_unit_square(n)?;
    let disc = Discretization::new(&mesh, cfg.cfg)?;
    let case = ManufacturedCase::new(cfg.case, eps);
    let f = |x| case.f(x);
    let sol = solve(&disc, eps, &f, cfg.scheme, &options(cfg))?;
    let fields = cell_fields(&disc, &sol)?;
    std::fs::create_dir_all(&cfg.out)?;
    let path = vtk_path(cfg);
    let title = format!("{} {} eps={} n={}", cfg.case, cfg.cfg, sci(eps), n);
    write_file(&path, &to_vtk(&disc, &fields, &title))?;
    let (imax, vmax) = fields
        .frob_sigma_over_eps2
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let x = mesh.cell_centroid(imax);
    writeln!(out, "wrote {}", path.display())?;
    writeln!(
        out,
        "max frob_sigma_over_eps2 {} at ({}, {})",
        sci(vmax),
        sci(x[0]),
        sci(x[1])
    )?;
    Ok(fields)
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut report = SuiteReport::default();
    report.extend(property_suite(cfg.seed)?);
    let mesh = SimplicialMesh::uniform_unit_square(cfg.n[0])?;
    let cfgs = if cfg.cfg_explicit {
        vec![cfg.cfg]
    } else {
        SpaceConfig::all_up_to(3)
    };
    for c in cfgs {
        for &eps in &cfg.eps {
            let case = ManufacturedCase::new(cfg.case, eps);
            let f = |x| case.f(x);
            report.extend(equivalence_suite(&mesh, c, eps, &f, &options(cfg))?);
        }
    }
    for line in report.lines() {
        writeln!(out, "{line}")?;
    }
    let pass = report.all_pass();
    writeln!(out, "{}", if pass { "ALL PASS" } else { "SOME CHECKS FAILED" })?;
    Ok(pass)
}
