use std::io;
use std::process::exit;

use clap::Parser;
use rotdecoh_cli::config::Flags;
use rotdecoh_cli::{parse_config, run, ExitStatus};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    // --help / --version and flag syntax errors are reported by clap directly
    let flags = Flags::try_parse().unwrap_or_else(|e| e.exit());
    let text = match &flags.config {
        Some(path) => match std::fs::read(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("rotdecoh: {}: {e}", path.display());
                exit(ExitStatus::Validation.code());
            }
        },
        None => Vec::new(),
    };
    let config = parse_config(&text, &args).unwrap_or_else(|e| {
        eprintln!("rotdecoh: {e}");
        exit(ExitStatus::Validation.code());
    });
    match run(&config, &mut io::stdout().lock()) {
        Ok(ExitStatus::OracleMismatch) => {
            eprintln!("rotdecoh: oracle deviation above {:e}", config.oracle_tol);
            exit(ExitStatus::OracleMismatch.code());
        }
        Ok(status) => exit(status.code()),
        Err(e) => {
            eprintln!("rotdecoh: {e}");
            exit(e.status().code());
        }
    }
}
