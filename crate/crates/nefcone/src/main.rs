//! Command-line front end: runs scenario documents, built-in computations,
//! and direct subcommands for the surface, fiber-product, and
//! fundamental-domain toolkits. Reports are printed as canonical JSON
//! (deterministic for a fixed scenario, seed, and bounds); wall-clock timing
//! goes to stderr.
//!
//! Exit codes: 0 when every verdict passes, 1 when some verdict fails (the
//! report carries the certificates), 2 on usage or schema errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use nefcone::error::Error;
use nefcone::linalg::Vector;
use nefcone::scenario::{
    builtin_scenario, canonical_bytes, list_builtins, run_scenario, vector_from_json, Bounds,
    Report, Scenario,
};

#[derive(Parser)]
#[command(
    name = "nefcone",
    about = "Exact nef-cone computations: decomposition over fiber products and \
             fundamental domains for lattice group actions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document (JSON file).
    Run {
        /// Path to the scenario JSON document.
        scenario: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a built-in scenario by name.
    Builtin {
        /// Built-in name; see `nefcone list`.
        name: String,
        /// Seed for random sampling.
        #[arg(long)]
        seed: Option<u64>,
        /// Orbit-ball word length.
        #[arg(long)]
        word_bound: Option<i64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// List the built-in scenarios.
    List,
    /// Surface-lattice computations.
    Surface {
        #[command(subcommand)]
        command: SurfaceCommand,
    },
    /// Fiber-product computations.
    Fibprod {
        #[command(subcommand)]
        command: FibprodCommand,
    },
    /// Fundamental-domain computations.
    Fundomain {
        #[command(subcommand)]
        command: FundomainCommand,
    },
}

#[derive(Args)]
struct OutArg {
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SurfaceCommand {
    /// Enumerate the negative curve classes of a blown-up plane.
    Negcurves {
        /// Number of blown-up points (0..=8).
        #[arg(long)]
        k: usize,
    },
    /// Describe the nef cone of a blown-up plane.
    Nef {
        /// Number of blown-up points (0..=8).
        #[arg(long)]
        k: usize,
    },
    /// Test a class against the elliptic-surface nef oracle.
    ResNef {
        /// Class in natural coordinates, comma-separated rationals.
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        class: Vector,
    },
}

#[derive(Subcommand)]
enum FibprodCommand {
    /// Decompose a glued class into nef parts, or certify that none exists.
    Decompose {
        /// Left factor preset (f0, f1, hirzebruch:n, blowup:k, res, fiber-only).
        #[arg(long)]
        left: String,
        /// Right factor preset.
        #[arg(long)]
        right: String,
        /// Left part, comma-separated rationals.
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        d1: Vector,
        /// Right part, comma-separated rationals.
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        d2: Vector,
    },
    /// Verify the extremal-ray bijection on a polyhedral fiber product.
    CorrCheck {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// The base-change demonstration: a nef class on the four-point blowup
    /// that is not a sum of nef pullbacks from two-point blowups.
    BlowupBaseChange,
}

#[derive(Subcommand)]
enum FundomainCommand {
    /// Build a Dirichlet domain candidate for a preset action.
    Dirichlet {
        /// Action preset (swap, rank3, e8).
        #[arg(long)]
        action: String,
        /// Functional, comma-separated rationals (preset default otherwise).
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        xi: Option<Vector>,
        /// Orbit-ball word length.
        #[arg(long, default_value_t = 2)]
        word_bound: i64,
    },
    /// Check coverage and interior disjointness of the candidate's tiles.
    Tile {
        #[arg(long)]
        action: String,
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        xi: Option<Vector>,
        #[arg(long, default_value_t = 2)]
        word_bound: i64,
        /// Number of random interior samples.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Seed for the samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a stabilizer-free interior class and a separating functional.
    Stabilizer {
        #[arg(long)]
        action: String,
        #[arg(long, value_parser = parse_vector_arg, allow_hyphen_values = true)]
        xi: Option<Vector>,
        #[arg(long, default_value_t = 2)]
        word_bound: i64,
    },
}

fn parse_vector_arg(text: &str) -> Result<Vector, String> {
    let entries: Vec<Value> = text
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok.parse::<i64>() {
                Ok(n) => json!(n),
                Err(_) => json!(tok),
            }
        })
        .collect();
    vector_from_json(&Value::Array(entries)).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; real usage errors are 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::List => {
            for name in list_builtins() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { scenario, out } => {
            let text = std::fs::read_to_string(&scenario)?;
            let s: Scenario =
                serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
            emit(run_scenario(&s)?, out.out)
        }
        Command::Builtin { name, seed, word_bound, out } => {
            let s = builtin_scenario(&name, seed, word_bound)?;
            emit(run_scenario(&s)?, out.out)
        }
        Command::Surface { command } => {
            let (name, parameters) = match command {
                SurfaceCommand::Negcurves { k } => {
                    ("surface-negcurves", json!({"op": "negcurves", "k": k}))
                }
                SurfaceCommand::Nef { k } => ("surface-nef", json!({"op": "nef", "k": k})),
                SurfaceCommand::ResNef { class } => (
                    "surface-res-nef",
                    json!({"op": "res-nef", "class": nefcone::cone::vector_to_json(&class)}),
                ),
            };
            emit(run_kind(name, "surface", parameters, 0, Bounds::default())?, None)
        }
        Command::Fibprod { command } => {
            let (name, parameters) = match command {
                FibprodCommand::Decompose { left, right, d1, d2 } => (
                    "fibprod-decompose",
                    json!({
                        "op": "decompose",
                        "left": left,
                        "right": right,
                        "d1": nefcone::cone::vector_to_json(&d1),
                        "d2": nefcone::cone::vector_to_json(&d2),
                    }),
                ),
                FibprodCommand::CorrCheck { left, right } => (
                    "fibprod-corr-check",
                    json!({"op": "corr-check", "left": left, "right": right}),
                ),
                FibprodCommand::BlowupBaseChange => {
                    ("fibprod-blowup-base-change", json!({"op": "blowup-base-change"}))
                }
            };
            emit(run_kind(name, "fibprod", parameters, 0, Bounds::default())?, None)
        }
        Command::Fundomain { command } => {
            let (name, parameters, seed, bounds) = match command {
                FundomainCommand::Dirichlet { action, xi, word_bound } => (
                    "fundomain-dirichlet",
                    fundomain_params("dirichlet", &action, xi.as_ref()),
                    0,
                    Bounds { word_bound, ..Bounds::default() },
                ),
                FundomainCommand::Tile { action, xi, word_bound, samples, seed } => (
                    "fundomain-tile",
                    fundomain_params("tile", &action, xi.as_ref()),
                    seed,
                    Bounds { word_bound, samples, ..Bounds::default() },
                ),
                FundomainCommand::Stabilizer { action, xi, word_bound } => (
                    "fundomain-stabilizer",
                    fundomain_params("stabilizer", &action, xi.as_ref()),
                    0,
                    Bounds { word_bound, ..Bounds::default() },
                ),
            };
            emit(run_kind(name, "fundomain", parameters, seed, bounds)?, None)
        }
    }
}

fn fundomain_params(op: &str, action: &str, xi: Option<&Vector>) -> Value {
    let mut p = json!({"op": op, "action": action});
    if let Some(xi) = xi {
        p["xi"] = nefcone::cone::vector_to_json(xi);
    }
    p
}

fn run_kind(
    name: &str,
    kind: &str,
    parameters: Value,
    seed: u64,
    bounds: Bounds,
) -> Result<Report, Error> {
    run_scenario(&Scenario {
        name: name.to_string(),
        kind: kind.to_string(),
        parameters,
        seed,
        bounds,
    })
}

fn emit(report: Report, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    let bytes = canonical_bytes(&report);
    if let Some(path) = &out {
        std::fs::write(path, &bytes)?;
    }
    print!("{}", String::from_utf8_lossy(&bytes));
    eprintln!("completed in {} ms", report.timing_ms);
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
