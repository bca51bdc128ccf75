mod commands;
mod output;
mod range;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ising_kw::{Couplings, Error, QuadratureSpec};
use output::{write_table, Format, Meta, Table};
use range::{parse_couplings, parse_tol, Sweep};

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Exact free energies of triangular Ising models and the transverse-field chain.
#[derive(Parser, Debug)]
#[command(name = "ising-kw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Leave out the timestamp so repeated runs are byte-identical.
    #[arg(long)]
    reproducible: bool,
    /// Quadrature tolerance, in (0, 1e-2].
    #[arg(long, value_parser = parse_tol, default_value = "1e-10")]
    tol: f64,
    /// Seed for randomised draws.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plane free energy f, f' and f'' along a beta sweep.
    FreeEnergy {
        /// Couplings J1,J2,J3.
        #[arg(long = "J", value_parser = parse_couplings, allow_hyphen_values = true)]
        j: Couplings,
        /// start:stop:steps
        #[arg(long, allow_hyphen_values = true)]
        beta: Sweep,
        /// Also report the cylinder free energy for this M, with the transfer matrix alongside.
        #[arg(long = "cylinder-M")]
        cylinder_m: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cylinder free energy against the transfer matrix.
    Cylinder {
        #[arg(long = "J", value_parser = parse_couplings, allow_hyphen_values = true)]
        j: Couplings,
        #[arg(long, allow_hyphen_values = true)]
        beta: Sweep,
        #[arg(long = "cylinder-M")]
        cylinder_m: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Critical inverse temperature along J = (1, 1, J3).
    Critical {
        #[arg(long = "J3", allow_hyphen_values = true)]
        j3: Sweep,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Transverse-field chain: free energy, ground-state energy and its second derivative.
    Quantum {
        #[arg(long, allow_hyphen_values = true)]
        beta: Sweep,
        #[arg(long, allow_hyphen_values = true)]
        h: Sweep,
        /// Also report the Trotter approximation with this many slices.
        #[arg(long = "trotter-n")]
        trotter_n: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the verification suite.
    Verify {
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) | Error::SizeExceeded { .. } | Error::TorusTooSmall { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn emit(table: &Table, meta: &Meta, out: &OutputArgs) -> Result<(), u8> {
    let result = match &out.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_table(&mut w, table, meta, out.format)?;
            w.flush()
        }),
        None => write_table(&mut std::io::stdout().lock(), table, meta, out.format),
    };
    result.map_err(|e| {
        eprintln!("ising-kw: cannot write output: {e}");
        EXIT_CONFIG
    })
}

fn run(cli: Cli) -> u8 {
    let (out, command, config, (table, failure)) = match &cli.command {
        Command::FreeEnergy { j, beta, cylinder_m, out } => {
            if matches!(cylinder_m, Some(m) if *m < 2) {
                eprintln!("ising-kw: --cylinder-M must be at least 2");
                return EXIT_CONFIG;
            }
            let quad = QuadratureSpec::with_tol(out.tol);
            let cfg = json!({
                "J": commands::couplings_json(j),
                "beta": commands::sweep_json(beta),
                "cylinder_M": cylinder_m,
                "tol": out.tol,
            });
            (out, "free-energy", cfg, commands::free_energy(j, beta, *cylinder_m, &quad))
        }
        Command::Cylinder { j, beta, cylinder_m, out } => {
            if *cylinder_m < 2 {
                eprintln!("ising-kw: --cylinder-M must be at least 2");
                return EXIT_CONFIG;
            }
            let quad = QuadratureSpec::with_tol(out.tol);
            let cfg = json!({
                "J": commands::couplings_json(j),
                "beta": commands::sweep_json(beta),
                "cylinder_M": cylinder_m,
                "tol": out.tol,
            });
            (out, "cylinder", cfg, commands::cylinder(j, beta, *cylinder_m, &quad))
        }
        Command::Critical { j3, out } => {
            let cfg = json!({ "J3": commands::sweep_json(j3) });
            (out, "critical", cfg, commands::critical(j3))
        }
        Command::Quantum { beta, h, trotter_n, out } => {
            if beta.start <= 0.0 {
                eprintln!("ising-kw: --beta must be positive");
                return EXIT_CONFIG;
            }
            let quad = QuadratureSpec::with_tol(out.tol);
            let cfg = json!({
                "beta": commands::sweep_json(beta),
                "h": commands::sweep_json(h),
                "trotter_n": trotter_n,
                "tol": out.tol,
            });
            (out, "quantum", cfg, commands::quantum(beta, h, *trotter_n, &quad))
        }
        Command::Verify { out } => {
            let (table, report) = commands::verify(out.seed);
            let cfg = json!({ "seed": report.seed, "threads": report.threads, "seconds": report.elapsed.as_secs_f64() });
            let meta = Meta {
                command: "verify",
                config: cfg,
                reproducible: out.reproducible,
            };
            if let Err(code) = emit(&table, &meta, out) {
                return code;
            }
            return if report.all_passed() { 0 } else { EXIT_VERIFY };
        }
    };
    let meta = Meta {
        command,
        config,
        reproducible: out.reproducible,
    };
    if let Err(code) = emit(&table, &meta, out) {
        return code;
    }
    match failure {
        None => 0,
        Some(e) => {
            eprintln!("ising-kw: {e}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
