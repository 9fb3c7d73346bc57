use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbp_cpr::config::{parse_config, preset, ExperimentConfig, ModeName, Overrides};
use sbp_cpr::io::write_outputs;
use sbp_cpr::sbp::{build_operators, check_sbp, eigen_check, multiplication_operator, BasisKind, LEGENDRE_WEIGHT};
use sbp_cpr::time::{run_simulation, SimulationError};

const EXIT_CONFIG: u8 = 1;
const EXIT_BLOW_UP: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "sbp-cpr", version, about = "SBP/CPR solver for 1D scalar conservation laws with adaptive artificial dissipation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run one of the reference experiments.
    Preset {
        /// advection-smooth, advection-step or burgers-sine
        name: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Print the SBP residual and the dissipation eigenvalue table.
    VerifyOperators {
        #[arg(long)]
        basis: BasisKind,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    steps: Option<usize>,
    /// off, fixed or adaptive
    #[arg(long)]
    dissipation: Option<ModeName>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            steps: a.steps,
            dissipation: a.dissipation,
            order: a.order,
            epsilon: a.epsilon,
            output: a.output,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run { config, overrides } => {
            let text = match fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(EXIT_IO);
                }
            };
            match parse_config(&text) {
                Ok(c) => execute(c, overrides.into()),
                Err(errors) => {
                    eprintln!("error: invalid config {}:\n{errors}", config.display());
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
        Command::Preset { name, overrides } => match preset(&name) {
            Ok(c) => execute(c, overrides.into()),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::VerifyOperators { basis, p, json } => verify_operators(basis, p, json),
    }
}

fn execute(config: ExperimentConfig, overrides: Overrides) -> ExitCode {
    let config = match overrides.apply(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let (output, code) = match run_simulation(&config) {
        Ok(out) => (out, ExitCode::SUCCESS),
        Err(SimulationError::BlowUp {
            step,
            time,
            reason,
            partial,
        }) => {
            eprintln!("error: blow-up at step {step} (t = {time}): {reason}");
            (*partial, ExitCode::from(EXIT_BLOW_UP))
        }
        Err(SimulationError::Setup(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match write_outputs(&config, &output) {
        Ok(files) => {
            if let (Some(first), Some(last)) = (output.records.first(), output.records.last()) {
                println!(
                    "steps {}  energy {:e} -> {:e}  mass {:e} -> {:e}",
                    last.step, first.energy, last.energy, first.mass, last.mass
                );
            }
            println!("wrote {} files to {}", files.len(), config.output.dir.display());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn verify_operators(basis: BasisKind, p: usize, json: bool) -> ExitCode {
    let result = build_operators(basis, p).and_then(|ops| {
        let amul = multiplication_operator(&ops, &LEGENDRE_WEIGHT)?;
        Ok((check_sbp(&ops), eigen_check(&ops, &amul)?))
    });
    let (residual, table) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if json {
        let doc = serde_json::json!({
            "basis": basis.name(),
            "p": p,
            "sbp_residual": residual,
            "eigenvalues": table,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json of plain numbers"));
    } else {
        println!("basis {basis}  p = {p}");
        println!("SBP residual  {residual:e}");
        println!("{:>4}  {:>24}  {:>12}", "n", "eigenvalue", "residual");
        for e in &table {
            println!("{:>4}  {:>24.15e}  {:>12.3e}", e.n, e.eigenvalue, e.residual);
        }
    }
    ExitCode::SUCCESS
}
