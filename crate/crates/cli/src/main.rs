//! `saasched`: validate instances, solve, evaluate and allocate rooms.
//!
//! Exit codes: 0 success, 1 domain failure (invalid instance, infeasible,
//! violations, solver failure), 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use saasched::evaluator::{check_feasibility, evaluate_cost};
use saasched::heuristics::{cold_two_phase, warmstart_two_phase, HeuristicConfig, Parity};
use saasched::instance::{lint_instance, parse_document, validate_instance, Instance, ScenarioSet};
use saasched::model::{build_saa, compute_big_m, preprocess_penalized_starts, relax_lambda};
use saasched::rooms::allocate_rooms;
use saasched::scenarios::{
    accuracy_cost_curve, curve_to_csv, load_scenarios, CurveConfig, CurveSolver, Noise,
};
use saasched::schedule::SolutionFile;
use saasched::solve::{
    branch_and_bound, export_mps, solve_exact_small, solve_external, BnbOptions, Limits, Problem,
    SolveResult, DEFAULT_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "saasched",
    version,
    about = "Battery and activity scheduling under load scenarios"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an instance file.
    Validate { instance: PathBuf },
    /// Solve an instance and write a solution file.
    Solve(SolveArgs),
    /// Price a solution file and list violated constraints.
    Evaluate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long = "scenarios", required = true, num_args = 1..)]
        scenarios: Vec<PathBuf>,
    },
    /// Add room lines to a feasible solution file.
    Allocate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the model as an MPS file.
    Export {
        instance: PathBuf,
        #[arg(long = "scenarios", required = true, num_args = 1..)]
        scenarios: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "on")]
        relax_lambda: Switch,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forecast accuracy against cost on perturbed scenario families.
    Curve(CurveArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Exact,
    Bnb,
    Warm,
    Cold,
    External,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long = "scenarios", required = true, num_args = 1..)]
    scenarios: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "cold")]
    algo: Algo,
    /// Use the warm-start heuristic path.
    #[arg(long)]
    setstart: bool,
    /// Initial solution file for the warm-start path.
    #[arg(long)]
    initial: Option<PathBuf>,
    /// External solver command with {mps} and {sol} placeholders.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Seconds per solve.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Branch-and-bound node expansions per solve.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Continuous peak levels while solving.
    #[arg(long, value_enum, default_value = "on")]
    relax_lambda: Switch,
    /// Slots a phase-one start may move in phase two (cold path).
    #[arg(long, default_value_t = 2)]
    flex: u32,
    /// Start slots kept in cold phase one.
    #[arg(long, value_enum, default_value = "even")]
    parity: ParityArg,
    /// Search-space budget of the exact solver.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Multiplicative,
    Additive,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveAlgo {
    Exact,
    Bnb,
}

#[derive(clap::Args)]
struct CurveArgs {
    instance: PathBuf,
    /// Scenario file whose first column is the true series.
    #[arg(long)]
    base: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "multiplicative")]
    noise: NoiseArg,
    #[arg(long, value_enum, default_value = "bnb")]
    solver: CurveAlgo,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: f64,
}

fn usage_error(message: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, message)
        .exit()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    saasched::instance::parse_instance(&read(path)?).with_context(|| path.display().to_string())
}

fn load_solution(path: &Path, instance: &Instance) -> Result<SolutionFile> {
    SolutionFile::parse(&read(path)?, instance).with_context(|| path.display().to_string())
}

fn scenarios_for(paths: &[PathBuf], instance: &Instance) -> Result<ScenarioSet> {
    Ok(load_scenarios(paths, instance.slots() as usize)?)
}

fn validate(path: &Path) -> Result<ExitCode> {
    let instance = match parse_document(&read(path)?) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Ok(ExitCode::from(1));
        }
    };
    let problems = validate_instance(&instance);
    for d in &problems {
        eprintln!("{d}");
    }
    for d in lint_instance(&instance) {
        eprintln!("warning: {d}");
    }
    Ok(if problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let algo = if args.setstart { Algo::Warm } else { args.algo };
    if args.setstart && !matches!(args.algo, Algo::Warm | Algo::Cold) {
        usage_error("--setstart applies to the heuristic algorithms only");
    }
    if algo == Algo::Warm && args.initial.is_none() {
        usage_error("--algo warm requires --initial <solution>");
    }
    if algo == Algo::External && args.solver_cmd.is_none() {
        usage_error("--algo external requires --solver-cmd <template>");
    }
    let limits = Limits {
        time: args.time_limit.map(Duration::from_secs_f64),
        nodes: args.node_limit,
    };
    let instance = load_instance(&args.instance)?;
    let scenarios = scenarios_for(&args.scenarios, &instance)?;
    let reduced = preprocess_penalized_starts(&instance);

    let model = || -> Result<_> {
        let m = build_saa(&reduced, &scenarios, compute_big_m(&reduced, &scenarios))?;
        Ok(if args.relax_lambda == Switch::On {
            relax_lambda(&m)
        } else {
            m
        })
    };
    let config = || HeuristicConfig {
        setstart: algo == Algo::Warm,
        phase1: limits,
        phase2: limits,
        window: args.flex,
        parity: match args.parity {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        },
        relax_lambda: args.relax_lambda == Switch::On,
        solver_cmd: args.solver_cmd.clone(),
        initial: None,
    };
    let result: SolveResult = match algo {
        Algo::Exact => solve_exact_small(&reduced, &scenarios, args.budget)?,
        Algo::Bnb => {
            let m = model()?;
            let p = Problem {
                model: &m,
                instance: &reduced,
                scenarios: &scenarios,
            };
            branch_and_bound(
                &p,
                &BnbOptions {
                    limits,
                    ..BnbOptions::default()
                },
            )?
        }
        Algo::External => {
            let m = model()?;
            let p = Problem {
                model: &m,
                instance: &reduced,
                scenarios: &scenarios,
            };
            solve_external(&p, args.solver_cmd.as_deref().unwrap_or_default())?
        }
        Algo::Warm => {
            let initial = load_solution(args.initial.as_deref().expect("checked"), &instance)?;
            let config = HeuristicConfig {
                initial: Some(initial.schedule),
                ..config()
            };
            warmstart_two_phase(&reduced, &scenarios, &config)?.result
        }
        Algo::Cold => cold_two_phase(&reduced, &scenarios, &config())?.result,
    };

    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    eprintln!(
        "status {} objective {} bound {} gap {}",
        result.status,
        fmt(result.objective),
        fmt(result.bound),
        fmt(result.gap)
    );
    let Some(schedule) = result.schedule else {
        eprintln!("no feasible schedule");
        return Ok(ExitCode::from(1));
    };
    let violations = check_feasibility(&instance, &schedule);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        bail!("solver returned an infeasible schedule");
    }
    let file = SolutionFile {
        schedule,
        rooms: None,
    };
    std::fs::write(&args.out, file.serialize(&instance))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let report = evaluate_cost(&instance, &file.schedule, &scenarios)?;
    print!("{}", report.to_csv());
    Ok(ExitCode::SUCCESS)
}

fn evaluate(instance: &Path, solution: &Path, scenarios: &[PathBuf]) -> Result<ExitCode> {
    let instance = load_instance(instance)?;
    let scenarios = scenarios_for(scenarios, &instance)?;
    let file = load_solution(solution, &instance)?;
    let report = evaluate_cost(&instance, &file.schedule, &scenarios)?;
    print!("{}", report.to_csv());
    let violations = check_feasibility(&instance, &file.schedule);
    for v in &violations {
        eprintln!("{v}");
    }
    Ok(if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn allocate(instance: &Path, solution: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let instance = load_instance(instance)?;
    let mut file = load_solution(solution, &instance)?;
    let violations = check_feasibility(&instance, &file.schedule);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Ok(ExitCode::from(1));
    }
    file.rooms = Some(allocate_rooms(&instance, &file.schedule)?);
    let text = file.serialize(&instance);
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn export(instance: &Path, scenarios: &[PathBuf], relax: Switch, out: &Path) -> Result<ExitCode> {
    let instance = preprocess_penalized_starts(&load_instance(instance)?);
    let scenarios = scenarios_for(scenarios, &instance)?;
    let mut model = build_saa(&instance, &scenarios, compute_big_m(&instance, &scenarios))?;
    if relax == Switch::On {
        model = relax_lambda(&model);
    }
    export_mps(&model, out).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn curve(args: &CurveArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let base = scenarios_for(std::slice::from_ref(&args.base), &instance)?;
    let config = CurveConfig {
        k: args.k,
        seed: args.seed,
        noise: match args.noise {
            NoiseArg::Multiplicative => Noise::Multiplicative,
            NoiseArg::Additive => Noise::Additive,
        },
        solver: match args.solver {
            CurveAlgo::Exact => CurveSolver::Exact {
                budget: args.budget,
            },
            CurveAlgo::Bnb => CurveSolver::BranchAndBound(Limits::default()),
        },
    };
    if args.k == 0 {
        usage_error("--k must be at least 1");
    }
    if args.sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
        usage_error("sigmas must be non-negative");
    }
    let points = accuracy_cost_curve(&instance, base.scenario(0), &args.sigmas, &config)?;
    print!("{}", curve_to_csv(&points));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let outcome = match &cli.command {
        Cmd::Validate { instance } => validate(instance),
        Cmd::Solve(args) => solve(args),
        Cmd::Evaluate {
            instance,
            solution,
            scenarios,
        } => evaluate(instance, solution, scenarios),
        Cmd::Allocate {
            instance,
            solution,
            out,
        } => allocate(instance, solution, out.as_deref()),
        Cmd::Export {
            instance,
            scenarios,
            relax_lambda,
            out,
        } => export(instance, scenarios, *relax_lambda, out),
        Cmd::Curve(args) => curve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
