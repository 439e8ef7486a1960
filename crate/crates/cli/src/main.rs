use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use unitroot_cli::{exit_code, parse_config, run, Command};
use unitroot_core::par::{init_threads, Exec};
use unitroot_core::Error;

/// Unit roots of toric exponential sums.
#[derive(Parser, Debug)]
#[command(name = "unitroot", version)]
struct Args {
    /// One of weights, expsum, lfunction, dworkdet, sympow, unitroot, verify.
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Working precision N; certified outputs target N - 1 digits.
    #[arg(long)]
    precision: Option<u32>,
    /// Determinant degree d_T.
    #[arg(long)]
    tdeg: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(path: &std::path::Path, e: &Error) -> ExitCode {
    eprintln!("{}: {e}", path.display());
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Ok(v) = std::env::var("UNITROOT_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => init_threads(n),
            _ => {
                eprintln!("UNITROOT_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(&args.config, &e),
    };
    cfg.command = args.command;
    if let Some(n) = args.precision {
        if n == 0 {
            eprintln!("--precision must be positive");
            return ExitCode::from(2);
        }
        cfg.precision = n;
        cfg.m = cfg.m.max(unitroot_cli::config::default_m(cfg.p, n));
    }
    if let Some(d) = args.tdeg {
        if d == 0 {
            eprintln!("--tdeg must be positive");
            return ExitCode::from(2);
        }
        cfg.caps.d_t = d;
    }
    let report = match run(&cfg, Exec::default()) {
        Ok(r) => r,
        Err(e) => return fail(&args.config, &e),
    };
    let text = report.render();
    match &args.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    eprint!("{}", report.render_timings());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("check failed: {f}");
        }
        ExitCode::from(1)
    }
}
