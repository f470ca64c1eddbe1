use std::process::ExitCode;

use clap::Parser;
use ssp4_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("SSP4_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if t > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
        }
    }
    let (kind, raw) = cli.command.split();
    let cfg = match RunConfig::resolve(kind, raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    match run(&cfg, &mut stdout.lock()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
