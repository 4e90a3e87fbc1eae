use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use substock::optimizer::{optimize_monotone, Instance};
use substock::simulator::{estimate_profit, simulate_cycle_trace, EventStream};
use substock::{CapacityConstraint, DemandModel, Policy};
use substock_cli::config::{regime_tag, ConfigError, MonteCarloConfig, ScenarioConfig};
use substock_cli::report::emit_csv;
use substock_cli::sweep::run_sweep;
use substock_cli::validate::{self, ValidateError};

/// Order-quantity optimization for a two-product lost-sales inventory
/// system with Poisson demand and partial substitution.
#[derive(Parser)]
#[command(name = "substock", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal policy for every configured regime/substitution pair at
    /// a single capacity (defaults to c_max).
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Capacity to optimize at instead of the config's c_max.
        #[arg(long)]
        c: Option<f64>,
        /// Series truncation tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Capacity sweep over the configured range; emits CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo replication override.
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Monte Carlo profit estimate of an explicit policy.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        q1: u32,
        #[arg(long)]
        q2: u32,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dump the event trace of one cycle before estimating.
        #[arg(long)]
        trace: bool,
    },
    /// Run the full numerical validation suite.
    Validate {
        /// Directory holding the scenario config files.
        #[arg(long, default_value = "scenarios")]
        scenarios: PathBuf,
    },
}

enum AppError {
    Config(String),
    Validation(String),
    Io(String),
    /// Stdout reader went away (e.g. piped into `head`); exit quietly.
    ClosedPipe,
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Validation(_) => 2,
            AppError::Io(_) => 3,
            AppError::ClosedPipe => 0,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Validation(m) | AppError::Io(m) => m,
            AppError::ClosedPipe => "",
        }
    }
}

fn from_io(e: std::io::Error) -> AppError {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        AppError::ClosedPipe
    } else {
        AppError::Io(e.to_string())
    }
}

/// `println!` that survives the reader closing the pipe.
fn emit(line: std::fmt::Arguments) -> Result<(), AppError> {
    let mut out = std::io::stdout().lock();
    out.write_fmt(line)
        .and_then(|()| out.write_all(b"\n"))
        .map_err(from_io)
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => AppError::Io(e.to_string()),
            _ => AppError::Config(e.to_string()),
        }
    }
}

impl From<substock::Error> for AppError {
    fn from(e: substock::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<ValidateError> for AppError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Config(c) => c.into(),
            ValidateError::Core(c) => c.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::ClosedPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Optimize { config, c, tol } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(tol) = tol {
                cfg.tol = tol;
            }
            let capacity = c.unwrap_or(cfg.c_max);
            for regime in &cfg.regimes {
                for &(p12, p21) in &cfg.substitutions {
                    let demand =
                        DemandModel::new(cfg.demand.lambda1(), cfg.demand.lambda2(), p12, p21)?;
                    let instance = Instance {
                        demand,
                        econ: cfg.econ,
                        constraint: CapacityConstraint::new(cfg.a1, cfg.a2, capacity)?,
                        regime: *regime,
                        tol: cfg.tol,
                    };
                    let result = optimize_monotone(&instance)?;
                    emit(format_args!(
                        "C={capacity} regime={} p12={p12} p21={p21} -> Q1={} Q2={} profit={:.6} (evals={})",
                        regime_tag(regime),
                        result.best.q1,
                        result.best.q2,
                        result.best_rate,
                        result.evaluations
                    ))?;
                }
            }
            Ok(())
        }
        Command::Sweep {
            config,
            out,
            seed,
            reps,
            tol,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(tol) = tol {
                cfg.tol = tol;
            }
            match (reps, seed) {
                (None, None) => {}
                (reps, seed) => {
                    let base = cfg.mc;
                    let n_reps = reps
                        .or(base.map(|m| m.n_reps))
                        .ok_or_else(|| AppError::Config("--reps required with --seed".into()))?;
                    let seed = seed
                        .or(base.map(|m| m.seed))
                        .ok_or_else(|| AppError::Config("--seed required with --reps".into()))?;
                    cfg.mc = Some(MonteCarloConfig { n_reps, seed });
                }
            }
            let rows = run_sweep(&cfg)?;
            match out {
                Some(path) => {
                    let mut file = File::create(&path)
                        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
                    emit_csv(&rows, &mut file)
                        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    emit_csv(&rows, &mut lock)
                        .and_then(|()| lock.flush())
                        .map_err(from_io)?;
                }
            }
            Ok(())
        }
        Command::Simulate {
            config,
            q1,
            q2,
            reps,
            seed,
            trace,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let n_reps = reps.or(cfg.mc.map(|m| m.n_reps)).unwrap_or(10_000);
            let seed = seed.or(cfg.mc.map(|m| m.seed)).unwrap_or(0);
            let policy = Policy::new(q1, q2);
            let mut first = true;
            for regime in &cfg.regimes {
                for &(p12, p21) in &cfg.substitutions {
                    let demand =
                        DemandModel::new(cfg.demand.lambda1(), cfg.demand.lambda2(), p12, p21)?;
                    if trace && first {
                        let mut stream = EventStream::substream(seed, 0);
                        let (_, events) =
                            simulate_cycle_trace(policy, &demand, regime, &mut stream);
                        for event in &events {
                            emit(format_args!("{event}"))?;
                        }
                        first = false;
                    }
                    let est = estimate_profit(policy, &cfg.econ, &demand, regime, n_reps, seed)?;
                    emit(format_args!(
                        "regime={} p12={p12} p21={p21} Q1={q1} Q2={q2} rate={:.6} stderr={:.6} reps={}",
                        regime_tag(regime),
                        est.mean,
                        est.std_error,
                        est.replications
                    ))?;
                }
            }
            Ok(())
        }
        Command::Validate { scenarios } => {
            let reports = validate::run_all(&scenarios)?;
            let mut failed = 0usize;
            for report in &reports {
                emit(format_args!("{}", report.line()))?;
                if !report.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                Err(AppError::Validation(format!(
                    "{failed} of {} criteria failed",
                    reports.len()
                )))
            } else {
                emit(format_args!("all {} criteria passed", reports.len()))
            }
        }
    }
}
