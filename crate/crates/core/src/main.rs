use clap::Parser;
use fraclab::cli::{load_config, run, Command, ConfigError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for blow-up in fractional transport and alignment equations.
#[derive(Parser, Debug)]
#[command(name = "fraclab", version)]
struct Args {
    /// selftest | mellin | inequalities | evolve | blowup-scan | report
    command: String,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to FRACLAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(cmd) = Command::parse(&args.command) else {
        eprintln!("unknown command `{}`", args.command);
        return ExitCode::from(2);
    };
    let threads = args.threads.or_else(|| std::env::var("FRACLAB_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(match e {
                ConfigError::Io(_) => 1,
                _ => 2,
            });
        }
    };
    let out = args.out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("fraclab-out"));
    match run(cmd, &cfg, &out) {
        Ok(o) => {
            for c in &o.checks.0 {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(n) = &o.note {
                println!("{n}");
            }
            let failed: Vec<&str> = o.checks.0.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            println!("{} files written to {}", o.files.len(), out.display());
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
