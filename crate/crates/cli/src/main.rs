//! `altxy`: parameter sweeps of the alternating-field XY chain to CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use altxy::sweep::{parse_config_for, run, RunError, SweepConfig, Task, EXIT_CONFIG, EXIT_INTERNAL};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "altxy", version, about = "Exact correlation sweeps for the alternating-field XY chain")]
struct Cli {
    /// spectrum, phase-diagram, thermal-map, ng-map, factorization, quench,
    /// ergodicity-map, scaling or oracle-check
    task: String,
    /// Configuration file (TOML with sections); defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<String>,
    /// MIN:MAX:COUNT or a single value
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<String>,
    /// MIN:MAX:COUNT or a single value
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<String>,
    /// Inverse temperature βJ, or inf for the ground state
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated list of ln, qd
    #[arg(long)]
    measure: Option<String>,
    /// Chain length N, or inf for the thermodynamic limit
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<String>,
}

fn report(kind: &str, message: &str) {
    let clean: String = message.chars().map(|c| if c == '\n' { ' ' } else { c }).collect();
    eprintln!("error kind={kind} message=\"{}\"", clean.replace('"', "'"));
}

fn configure(cli: &Cli) -> Result<SweepConfig, String> {
    let task = Task::parse(&cli.task).map_err(|e| e.to_string())?;
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config_for(Some(task), &text).map_err(|e| e.to_string())?;
    let flags = [
        ("gamma", cli.gamma.clone()),
        ("lambda1", cli.lambda1.clone()),
        ("lambda2", cli.lambda2.clone()),
        ("beta", cli.beta.clone()),
        ("measure", cli.measure.clone()),
        ("size", cli.size.clone()),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
        ("workers", cli.workers.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.apply_override(key, &v).map_err(|e| e.to_string())?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            report("config", &e);
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match std::panic::catch_unwind(|| run(&cfg)) {
        Ok(Ok(summary)) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!(
                "rows={} computed={} failed={}",
                summary.rows, summary.computed_rows, summary.failed_rows
            );
            ExitCode::from(summary.exit_code() as u8)
        }
        Ok(Err(e)) => {
            let kind = match e {
                RunError::Config(_) => "config",
                RunError::Io(_) => "io",
                RunError::Internal(_) => "internal",
            };
            report(kind, &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            report("internal", "panic during sweep");
            ExitCode::from(EXIT_INTERNAL as u8)
        }
    }
}
