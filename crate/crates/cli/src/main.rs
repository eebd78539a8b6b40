use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use siet_cli::run::{output_dir, run_task, RunOptions, EXIT_INPUT_ERROR};
use siet_cli::spec::parse_spec;

/// Capacity-energy solvers for simultaneous information and energy
/// transmission.
#[derive(Parser)]
#[command(name = "siet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the task described by a spec file.
    Run(Common),
    /// Check the solvers against brute-force oracles on a spec's problem.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Problem specification (TOML).
    spec: PathBuf,
    /// Output directory [default: $SIET_OUT_DIR or ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    threads: Option<usize>,
    /// Per-point progress on stderr.
    #[arg(long)]
    verbose: bool,
    /// Store the wall time in run.json (outputs then differ between runs).
    #[arg(long)]
    record_time: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, verify) = match cli.command {
        Command::Run(a) => (a, false),
        Command::Verify(a) => (a, true),
    };
    match execute(&args, verify) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}

fn execute(args: &Common, verify: bool) -> anyhow::Result<i32> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.spec.display()))?;
    let spec = parse_spec(&text).map_err(|e| anyhow::anyhow!("{}: {e}", args.spec.display()))?;
    let opts = RunOptions {
        out_dir: output_dir(args.out.as_deref()),
        verbose: args.verbose,
        record_time: args.record_time,
    };
    Ok(run_task(&spec, &text, &opts, verify)?.exit_code)
}
