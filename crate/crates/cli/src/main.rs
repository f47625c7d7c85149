use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedosov_cli::commands::{self, CliError, Format, Output};
use fedosov_cli::verify::Suite;

#[derive(Parser)]
#[command(
    name = "fedosov",
    version,
    about = "Exact Fedosov star products, quantized vector fields and cross products"
)]
struct Cli {
    /// Problem file; the flat plane when omitted.
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// Truncation order N, overriding the file.
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Seed for `verify`; derived from the problem file when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print F ⋆ G.
    Star { f: String, g: String },
    /// Apply the quantized derivation of a named field to F.
    Quantize { field: String, f: String },
    /// Print the cocycle τ(X, Y) of two named fields.
    Tau { x: String, y: String },
    /// Multiply two cross-product elements.
    CrossMul { u: String, v: String },
    /// Run the identity suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let problem = commands::load_problem(cli.problem.as_deref())?;
    let order = cli.order.unwrap_or(problem.order);
    let format = cli.format;
    match cli.command {
        Command::Star { f, g } => commands::star(&problem, order, &f, &g, format),
        Command::Quantize { field, f } => commands::quantize(&problem, order, &field, &f, format),
        Command::Tau { x, y } => commands::tau(&problem, order, &x, &y, format),
        Command::CrossMul { u, v } => commands::cross_mul(&problem, order, &u, &v, format),
        Command::Verify { suite } => {
            let seed = cli.seed.unwrap_or(problem.seed);
            Ok(commands::run_verify(&problem, order, seed, suite, format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.text);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
