use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cmspace::{GeneratorKind, C64, DEFAULT_TOL};
use cmspace_cli::commands::{self, single_n, CliError, Output};
use cmspace_cli::{parse_complex, NRange, RunConfig};

#[derive(Parser)]
#[command(name = "cmspace", version, about = "Generalized Calogero–Moser spaces: generation, charts, flows, verification")]
struct Cli {
    /// Numerical tolerance for rank and degeneracy decisions.
    #[arg(long, global = true, env = "CM_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded point of the level set [A,B] - vw = tau*I.
    Gen {
        #[arg(long)]
        n: NRange,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
        tau: C64,
        #[arg(long)]
        seed: u64,
    },
    /// Gauge-normalize a representation, augmented pair or chart point.
    Normalize {
        /// Input file (stdin if omitted or `-`).
        input: Option<PathBuf>,
    },
    /// Chart coordinates of a point, or with --invert the pair of a chart point.
    Chart {
        input: Option<PathBuf>,
        #[arg(long)]
        invert: bool,
    },
    /// Apply exp(t X) for X in {e, f, h} to a seeded point (or an input file).
    Flow {
        #[arg(long)]
        generator: GeneratorKind,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: C64,
        #[arg(long, default_value = "3")]
        n: NRange,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
        tau: C64,
        #[arg(long, required_unless_present = "input")]
        seed: Option<u64>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run verification suites and emit a report.
    Verify {
        /// variety, canonical, chart, sl2flows, flowcalc or all; repeatable or comma separated.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<String>,
        #[arg(long, default_value = "1..4")]
        n: NRange,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
        tau: C64,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let tol = cli.tol;
    match cli.command {
        Command::Gen { n, k, tau, seed } => commands::cmd_gen(single_n(n)?, k, tau, seed),
        Command::Normalize { input } => commands::cmd_normalize(&commands::read_input(input.as_deref())?, tol),
        Command::Chart { input, invert } => commands::cmd_chart(&commands::read_input(input.as_deref())?, invert, tol),
        Command::Flow { generator, t, n, tau, seed, input } => {
            let text = input.as_deref().map(|p| commands::read_input(Some(p))).transpose()?;
            commands::cmd_flow(generator, t, single_n(n)?, tau, seed.unwrap_or(0), text.as_deref(), tol)
        }
        Command::Verify { suite, n, trials, seed, tau } => {
            let cfg = RunConfig { n, k: 2, tau, seed, tol, trials, suites: suite };
            commands::cmd_verify(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(out) => {
            if let Some(path) = out_path {
                if let Err(e) = std::fs::write(&path, &out.json) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                println!("{}", out.json);
            }
            eprint!("{}", out.summary.trim_end());
            eprintln!();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
