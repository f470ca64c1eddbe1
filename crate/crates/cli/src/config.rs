use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use ssp4::fespace::SpaceConfig;
use ssp4::schemes::Scheme;
use ssp4::verify::{CaseId, NormId};

/// Raised for malformed input; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Convergence,
    Solve,
    Verify,
    ExportField,
}

/// Raw flag values. Every field mirrors a key of the `--config` file.
#[derive(Args, Debug, Clone, Default)]
pub struct RawArgs {
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated list
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Comma-separated list of powers of two
    #[arg(long)]
    pub n: Option<String>,
    /// primal-wg, saddle-wg or first-order
    #[arg(long)]
    pub scheme: Option<String>,
    /// Comma-separated subset of err1, errsigma, erru, err3
    #[arg(long)]
    pub norms: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "quad-degree")]
    pub quad_degree: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Scale one element matrix by 1 + 1e-3 (verification test hook)
    #[arg(long)]
    pub perturb: bool,
    /// key=value file; flags win on conflict
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub case: CaseId,
    pub cfg: SpaceConfig,
    /// Set when any of k, r, m was given.
    pub cfg_explicit: bool,
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub scheme: Scheme,
    pub norms: Vec<NormId>,
    pub out: PathBuf,
    pub quad_degree: Option<usize>,
    pub seed: u64,
    pub perturb: bool,
}

const KEYS: [&str; 12] = [
    "case",
    "k",
    "r",
    "m",
    "eps",
    "n",
    "scheme",
    "norms",
    "out",
    "quad-degree",
    "seed",
    "perturb",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(UsageError(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, UsageError> {
    s.trim()
        .parse()
        .map_err(|_| UsageError(format!("--{key}: cannot parse '{s}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>, UsageError> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(UsageError(format!("--{key}: empty list")));
    }
    items.into_iter().map(|t| parse_num(key, t)).collect()
}

impl RunConfig {
    pub fn resolve(command: CommandKind, raw: &RawArgs) -> Result<Self, UsageError> {
        let file = match &raw.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str, flag: &Option<String>| flag.clone().or_else(|| file.get(key).cloned());

        let case: CaseId = get("case", &raw.case)
            .unwrap_or_else(|| "example1".into())
            .parse()
            .map_err(|e: ssp4::Error| UsageError(e.to_string()))?;
        let k_raw = get("k", &raw.k);
        let r_raw = get("r", &raw.r);
        let m_raw = get("m", &raw.m);
        let cfg_explicit = k_raw.is_some() || r_raw.is_some() || m_raw.is_some();
        let k: usize = k_raw.map(|s| parse_num("k", &s)).transpose()?.unwrap_or(1);
        let r: usize = r_raw.map(|s| parse_num("r", &s)).transpose()?.unwrap_or(k);
        let m: usize = m_raw.map(|s| parse_num("m", &s)).transpose()?.unwrap_or(k);
        let cfg = SpaceConfig::new(r, k, m).map_err(|e| UsageError(e.to_string()))?;

        let eps: Vec<f64> = parse_list("eps", &get("eps", &raw.eps).unwrap_or_else(|| "1".into()))?;
        if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(UsageError("--eps: values must be positive".into()));
        }
        let default_n = match command {
            CommandKind::Verify => "4",
            CommandKind::Solve | CommandKind::ExportField => "16",
            CommandKind::Convergence => "8,16,32",
        };
        let n: Vec<usize> = parse_list("n", &get("n", &raw.n).unwrap_or_else(|| default_n.into()))?;
        if n.iter().any(|&v| v == 0 || v > 256 || !v.is_power_of_two()) {
            return Err(UsageError(
                "--n: entries must be powers of two no larger than 256".into(),
            ));
        }
        if n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(UsageError("--n: entries must be increasing".into()));
        }
        if matches!(command, CommandKind::Solve | CommandKind::ExportField) && (n.len() != 1 || eps.len() != 1) {
            return Err(UsageError("a single --eps and --n are required".into()));
        }

        let scheme: Scheme = get("scheme", &raw.scheme)
            .unwrap_or_else(|| "primal-wg".into())
            .parse()
            .map_err(|e: ssp4::Error| UsageError(e.to_string()))?;
        let norms = match get("norms", &raw.norms) {
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| NormId::parse(t).map_err(|e| UsageError(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
            None => [NormId::Err1, NormId::ErrSigma, NormId::ErrU, NormId::Err3]
                .into_iter()
                .filter(|v| v.valid_for(case))
                .collect(),
        };
        if norms.is_empty() {
            return Err(UsageError("--norms: empty list".into()));
        }
        if let Some(bad) = norms.iter().find(|v| !v.valid_for(case)) {
            return Err(UsageError(format!("norm {} is not defined for {case}", bad.name())));
        }
        let out = raw
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let quad_degree = get("quad-degree", &raw.quad_degree)
            .map(|s| parse_num("quad-degree", &s))
            .transpose()?;
        let seed = get("seed", &raw.seed)
            .map(|s| parse_num("seed", &s))
            .transpose()?
            .unwrap_or(0);
        let perturb = raw.perturb
            || match file.get("perturb").map(String::as_str) {
                None | Some("false") | Some("0") => false,
                Some("true") | Some("1") => true,
                Some(v) => return Err(UsageError(format!("perturb: expected true or false, got '{v}'"))),
            };
        Ok(Self {
            command,
            case,
            cfg,
            cfg_explicit,
            eps,
            n,
            scheme,
            norms,
            out,
            quad_degree,
            seed,
            perturb,
        })
    }
}
