//! `tnkit`: batch front end for the tnkit library.
//!
//! Every run prints one JSON report line on stdout (keys sorted) and a short
//! summary on stderr. Exit status: 0 success, 1 invalid input, 2 numerical
//! failure.

mod commands;
mod example;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::{Failure, RunReport};

#[derive(Parser)]
#[command(name = "tnkit", version, about = "Dense tensor-network contraction, factorization and gauge tools")]
struct Cli {
    /// Also write the report line to this file.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contract a whole network into one tensor.
    Contract(commands::ContractArgs),
    /// Find a contraction sequence and its cost.
    Sequence(commands::SequenceArgs),
    /// Factorize a tensor across a bipartition of its indices.
    Decomp(commands::DecompArgs),
    /// Make one tensor of a tree network its orthogonality center.
    Orthogonalize(commands::OrthogonalizeArgs),
    /// Center a tree network, then split and truncate the center.
    Truncate(commands::TruncateArgs),
    /// Frobenius norm of a tensor file.
    Norm(NormArgs),
    /// Check that a tensor is an orthogonality center.
    VerifyCenter(commands::VerifyArgs),
    /// Write example networks and tensors.
    Example(example::ExampleArgs),
}

#[derive(Args)]
struct NormArgs {
    tensor: PathBuf,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let mut report = RunReport::new(&argv[1..]);
    let outcome = match &cli.command {
        Command::Contract(a) => commands::contract(a, &mut report),
        Command::Sequence(a) => commands::sequence(a, &mut report),
        Command::Decomp(a) => commands::decomp(a, &mut report),
        Command::Orthogonalize(a) => commands::orthogonalize(a, &mut report),
        Command::Truncate(a) => commands::truncate(a, &mut report),
        Command::Norm(a) => commands::norm(&a.tensor, &mut report),
        Command::VerifyCenter(a) => commands::verify_center(a, &mut report),
        Command::Example(a) => example::run(a, &mut report),
    };
    let code = match outcome {
        Ok(()) => 0,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            report.set("error", message);
            code
        }
    };
    report.set("exit_status", code);
    if cli.timings {
        report.set("timings", serde_json::json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 }));
    }
    let line = report.to_line();
    println!("{line}");
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, format!("{line}\n")) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code as u8)
}
