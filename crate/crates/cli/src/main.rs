mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use config::{Cli, Format, RunConfig};
use error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hm {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::new(&cli.command, &cli.common)?;
    if let Some(t) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    if cfg.stochastic {
        let how = if cfg.seed_was_random { " (drawn from OS entropy)" } else { "" };
        eprintln!("seed: {}{how}", cfg.seed);
    }
    let report = commands::run(&cli.command, &cfg)?;
    let text = match cfg.format {
        Format::Csv => report.csv,
        Format::Json => {
            let mut json = report.json;
            if cfg.metadata {
                if let Some(obj) = json.as_object_mut() {
                    obj.insert("metadata".into(), metadata(&cfg));
                }
            }
            let mut s = serde_json::to_string_pretty(&json).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    match &cfg.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })?;
            }
            std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}

fn metadata(cfg: &RunConfig) -> serde_json::Value {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    serde_json::json!({
        "tool": "hm",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command,
        "n": cfg.n,
        "created_unix": created,
    })
}
