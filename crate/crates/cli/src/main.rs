//! `semnum` command-line tool.
//!
//! Exit codes: 0 success or fixed point, 1 invalid input, 2 usage error,
//! 3 step limit reached, 4 I/O error, 5 engine divergence or broken conservation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use semnum::dsl::{export_dot, export_trace, parse_schedule, parse_with, serialize, TraceFormat};
use semnum::model::lint;
use semnum::simulator::{check_conservation, conserved_weights, radix_digits, SimError};
use semnum::{run, CaoSpec, Engine, RunConfig, Termination, ValidateOptions};

const EXIT_INVALID: u8 = 1;
const EXIT_STEP_LIMIT: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_DIVERGENCE: u8 = 5;

#[derive(Parser)]
#[command(name = "semnum", version, about = "Cardinal-arithmetic operator models: validate, simulate, analyse, export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report every problem found.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        allow_cycles: bool,
    },
    /// Run a model until its carries vanish and print the trace.
    Simulate(SimulateArgs),
    /// Print a primitive integer basis of the conserved weights.
    Weights {
        spec: PathBuf,
        #[arg(long)]
        allow_cycles: bool,
    },
    /// Write the model as Graphviz DOT or canonical text.
    Export {
        spec: PathBuf,
        #[arg(long, value_enum)]
        kind: ExportKind,
        /// Destination file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Digits of a value in a base, least significant first, via a chain of operators.
    Radix {
        #[arg(long)]
        value: BigUint,
        #[arg(long)]
        base: u64,
        #[arg(long)]
        length: usize,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    spec: PathBuf,
    /// Initial cardinals as `name=value` pairs; unlisted entities keep the
    /// model's `init` value or 0.
    #[arg(long, value_delimiter = ',')]
    init: Vec<String>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, value_enum, default_value_t = EngineArg::Both)]
    engine: EngineArg,
    /// JSON parameter schedule.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    allow_cycles: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Rows)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Matrix,
    Operational,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Rows,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    Dot,
    Canonical,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn invalid(error: anyhow::Error) -> Failure {
    fail(EXIT_INVALID, error)
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_IO, anyhow!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path, allow_cycles: bool) -> Result<CaoSpec, Failure> {
    let text = read(path)?;
    parse_with(&text, ValidateOptions { allow_cycles }).map_err(|err| {
        let lines: Vec<String> = err.diagnostics.iter().map(|d| format!("{}:{d}", path.display())).collect();
        invalid(anyhow!("{}", lines.join("\n")))
    })
}

fn cmd_validate(path: &Path, allow_cycles: bool) -> Outcome {
    let spec = load(path, allow_cycles)?;
    for warning in lint(&spec) {
        eprintln!("{}: warning: {warning}", path.display());
    }
    println!(
        "ok: cao {} ({} entities, {} operators)",
        spec.name(),
        spec.m(),
        spec.operators().len()
    );
    Ok(0)
}

fn initial_state(spec: &CaoSpec, pairs: &[String]) -> Result<semnum::StateVector, Failure> {
    let mut state = spec.initial_state();
    for pair in pairs.iter().filter(|p| !p.trim().is_empty()) {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| invalid(anyhow!("--init expects name=value, got `{pair}`")))?;
        let id = spec
            .entity_id(name.trim())
            .ok_or_else(|| invalid(anyhow!("--init names unknown entity `{}`", name.trim())))?;
        let value: BigUint = value
            .trim()
            .parse()
            .map_err(|_| invalid(anyhow!("--init value for `{}` is not a non-negative integer", name.trim())))?;
        state.set(id, value);
    }
    Ok(state)
}

fn sim_failure(err: SimError) -> Failure {
    let code = match err {
        SimError::EngineDivergence { .. } | SimError::ConservationViolated { .. } => EXIT_DIVERGENCE,
        _ => EXIT_INVALID,
    };
    fail(code, err.into())
}

fn cmd_simulate(args: &SimulateArgs) -> Outcome {
    let spec = load(&args.spec, args.allow_cycles)?;
    if spec.is_cyclic() && args.max_steps.is_none() {
        return Err(invalid(anyhow!("cyclic models need an explicit --max-steps")));
    }
    let initial = initial_state(&spec, &args.init)?;
    let schedule = match &args.schedule {
        Some(path) => {
            let text = read(path)?;
            Some(
                parse_schedule(&text, &spec)
                    .with_context(|| format!("schedule {}", path.display()))
                    .map_err(invalid)?,
            )
        }
        None => None,
    };
    let config = RunConfig {
        max_steps: args.max_steps.unwrap_or(1000),
        engine: match args.engine {
            EngineArg::Matrix => Engine::Matrix,
            EngineArg::Operational => Engine::Operational,
            EngineArg::Both => Engine::Both,
        },
        schedule: schedule.as_ref(),
    };
    let trace = run(&spec, &initial, &config).map_err(sim_failure)?;
    if schedule.is_none() {
        check_conservation(&trace, &conserved_weights(&spec)).map_err(sim_failure)?;
    }
    let format = match args.format {
        FormatArg::Rows => TraceFormat::Rows,
        FormatArg::Structured => TraceFormat::Structured,
    };
    print!("{}", export_trace(&trace, format));
    Ok(match trace.termination {
        Termination::FixedPoint => 0,
        Termination::StepLimit => {
            eprintln!("step limit of {} reached before a fixed point", config.max_steps);
            EXIT_STEP_LIMIT
        }
    })
}

fn cmd_weights(path: &Path, allow_cycles: bool) -> Outcome {
    let spec = load(path, allow_cycles)?;
    let names: Vec<&str> = spec.entities().iter().map(|e| e.name.as_str()).collect();
    println!("# entities ({})", names.join(", "));
    for w in conserved_weights(&spec) {
        println!("{w}");
    }
    Ok(0)
}

fn cmd_export(path: &Path, kind: ExportKind, output: Option<&Path>) -> Outcome {
    let spec = load(path, true)?;
    let text = match kind {
        ExportKind::Dot => export_dot(&spec),
        ExportKind::Canonical => serialize(&spec),
    };
    match output {
        Some(out) => fs::write(out, text).map_err(|e| fail(EXIT_IO, anyhow!("cannot write {}: {e}", out.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_radix(value: &BigUint, base: u64, length: usize) -> Outcome {
    if base < 2 {
        return Err(invalid(anyhow!("--base must be at least 2")));
    }
    if length == 0 {
        return Err(invalid(anyhow!("--length must be at least 1")));
    }
    let (digits, _) = radix_digits(value, base, length).map_err(sim_failure)?;
    let shown: Vec<String> = digits.iter().map(ToString::to_string).collect();
    println!("{}", shown.join(" "));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { spec, allow_cycles } => cmd_validate(spec, *allow_cycles),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Weights { spec, allow_cycles } => cmd_weights(spec, *allow_cycles),
        Command::Export { spec, kind, output } => cmd_export(spec, *kind, output.as_deref()),
        Command::Radix { value, base, length } => cmd_radix(value, *base, *length),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
