//! `ddb`: run the benchmark scenarios, convergence studies and method comparisons.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddb_core::harness::{
    builtin_scenario, compare_methods, convergence_study, parse_steppers, HarnessError,
    ScenarioConfig, BUILTIN_NAMES, DEFAULT_CONVERGENCE_T_END, DEFAULT_H_LIST,
};
use ddb_core::integrators::IntegrationError;
use ddb_core::{integrate, NewtonConfig, StepperKind};

#[derive(Parser)]
#[command(
    name = "ddb",
    version,
    about = "Discrete double-bracket integrators for the dissipative rigid body"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write one trajectory file per method.
    Run(RunArgs),
    /// Global error against the reference over a list of step sizes.
    Convergence(ConvergenceArgs),
    /// Run all methods on one grid; write trajectories, metrics.json and timing.csv.
    Compare(CompareArgs),
    /// Built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        command: ScenariosCommand,
    },
}

#[derive(Subcommand)]
enum ScenariosCommand {
    /// Print the built-in scenarios.
    List,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioSource {
    /// Built-in scenario name (A, B or C).
    #[arg(long)]
    scenario: Option<String>,
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Method names, comma separated, or `all`. Defaults to the scenario's list.
    #[arg(long, value_delimiter = ',')]
    stepper: Vec<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[arg(long, value_delimiter = ',', required = true)]
    stepper: Vec<String>,
    /// Step sizes, comma separated and decreasing.
    #[arg(long, value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[arg(long, value_delimiter = ',')]
    stepper: Vec<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Failure {
    /// Bad input or a solver failure.
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 1,
            Self::Io(_) => 2,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(err: HarnessError) -> Self {
        Self::Invalid(err.to_string())
    }
}

impl From<IntegrationError> for Failure {
    fn from(err: IntegrationError) -> Self {
        Self::Invalid(err.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn load_scenario(source: &ScenarioSource, t_end: Option<f64>) -> Result<ScenarioConfig, Failure> {
    let scenario = match (&source.scenario, &source.config) {
        (Some(name), None) => builtin_scenario(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::from_json(&text)?
        }
        _ => {
            return Err(Failure::Invalid(
                "give exactly one of --scenario and --config".into(),
            ))
        }
    };
    match t_end {
        Some(t) => Ok(scenario.with_t_end(t)?),
        None => Ok(scenario),
    }
}

fn check_step(h: f64) -> Result<f64, Failure> {
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(Failure::Invalid(format!("--h must be positive, got {h}")))
    }
}

fn prepare_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    output::write_atomic(path, contents)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn trajectory_file(
    dir: &Path,
    record: &ddb_core::TrajectoryRecord,
    scenario: &ScenarioConfig,
    format: Format,
) -> CmdResult {
    let name = record.stepper.name();
    match format {
        Format::Csv => write(
            &dir.join(format!("{name}.csv")),
            &output::trajectory_csv(record),
        ),
        Format::Json => write(
            &dir.join(format!("{name}.json")),
            &output::trajectory_json(record, scenario),
        ),
    }
}

/// `all` in `run` also brings in the reference.
fn run_steppers(names: &[String], scenario: &ScenarioConfig) -> Result<Vec<StepperKind>, Failure> {
    if names.is_empty() {
        return Ok(scenario.steppers.clone());
    }
    let mut steppers = parse_steppers(names)?;
    if names.iter().any(|n| n == "all") && !steppers.contains(&StepperKind::reference()) {
        steppers.push(StepperKind::reference());
    }
    Ok(steppers)
}

fn cmd_run(args: &RunArgs) -> CmdResult {
    let scenario = load_scenario(&args.source, args.t_end)?;
    let steppers = run_steppers(&args.stepper, &scenario)?;
    let h = check_step(args.h.unwrap_or(scenario.default_h()))?;
    let cfg = NewtonConfig::default();
    let m0 = scenario.m0();
    let mut records = Vec::with_capacity(steppers.len());
    for stepper in steppers {
        let record = integrate(
            stepper,
            &m0,
            &scenario.inertia,
            &scenario.metric,
            scenario.t0,
            scenario.t_end,
            h,
            &cfg,
        )
        .map_err(|e| Failure::Invalid(format!("{stepper}: {e}")))?;
        records.push(record);
    }
    prepare_dir(&args.out)?;
    for record in &records {
        trajectory_file(&args.out, record, &scenario, args.format)?;
    }
    Ok(())
}

fn cmd_convergence(args: &ConvergenceArgs) -> CmdResult {
    let scenario = load_scenario(&args.source, None)?;
    let t_end = args.t_end.unwrap_or(DEFAULT_CONVERGENCE_T_END);
    let h_list: Vec<f64> = if !args.h.is_empty() {
        args.h.clone()
    } else if scenario.h.len() >= 3 {
        scenario.h.clone()
    } else {
        DEFAULT_H_LIST.to_vec()
    };
    for &h in &h_list {
        check_step(h)?;
    }
    let steppers = parse_steppers(&args.stepper)?;
    let cfg = NewtonConfig::default();
    let mut tables = Vec::with_capacity(steppers.len());
    for stepper in steppers {
        tables.push(convergence_study(&scenario, stepper, &h_list, t_end, &cfg)?);
    }
    prepare_dir(&args.out)?;
    for table in &tables {
        let name = table.stepper.name();
        if matches!(args.format, Format::Csv) {
            write(
                &args.out.join(format!("convergence_{name}.csv")),
                &output::convergence_csv(table),
            )?;
        }
        write(
            &args.out.join(format!("convergence_{name}.json")),
            &output::convergence_json(table, &scenario),
        )?;
        match table.slope {
            Some(slope) => println!("{name}: slope {slope:.4}"),
            None => println!("{name}: slope not applicable"),
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let mut scenario = load_scenario(&args.source, args.t_end)?;
    if !args.stepper.is_empty() {
        scenario.steppers = parse_steppers(&args.stepper)?;
    }
    let h = check_step(args.h.unwrap_or(scenario.default_h()))?;
    let report = compare_methods(&scenario, h, &NewtonConfig::default())?;
    prepare_dir(&args.out)?;
    for run in &report.methods {
        match &run.outcome {
            Ok(metrics) => trajectory_file(&args.out, &metrics.record, &scenario, args.format)?,
            Err(err) => eprintln!("{}: {err}", run.stepper),
        }
    }
    write(
        &args.out.join("metrics.json"),
        &output::metrics_json(&report),
    )?;
    write(&args.out.join("timing.csv"), &output::timing_csv(&report))?;
    Ok(())
}

fn cmd_scenarios_list() -> CmdResult {
    for name in BUILTIN_NAMES {
        let s = builtin_scenario(name)?;
        let i = s.inertia.moments();
        let alpha = s.metric.as_isotropic().unwrap_or(f64::NAN);
        println!(
            "{name}: inertia=({}, {}, {}) alpha={alpha} omega0=({}, {}, {}) t=[{}, {}] h={}",
            i[0],
            i[1],
            i[2],
            s.omega0[0],
            s.omega0[1],
            s.omega0[2],
            s.t0,
            s.t_end,
            s.default_h()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Scenarios {
            command: ScenariosCommand::List,
        } => cmd_scenarios_list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Invalid(msg) | Failure::Io(msg)) = &failure;
            eprintln!("error: {msg}");
            ExitCode::from(failure.code())
        }
    }
}
