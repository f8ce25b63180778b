use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spinbook::baseline::{self, BkfParams};
use spinbook::config::RunConfig;
use spinbook::engine::{self, RunOutput};
use spinbook::output::{self, HistogramSpec};
use spinbook::presets;
use spinbook::stats::{self, AnalysisRequest, IntervalReport};
use spinbook::Error;

const CONFIG_KEYS: &str = "\
Config files are TOML, one `key = value` per line. Every key is optional and
falls back to its default.

  seed            master seed (u64)
  T               number of time steps
  N_random        random (limit-order) traders
  N_ising         Ising traders, 0 or exactly L*L
  N_lt            liquidity takers (market orders on a fair coin)
  c               waiting-time scale: a kind with N traders waits c*N steps on average
  c_market        optional separate scale for Ising traders and liquidity takers
  mu_lt           mean limit-order lifetime, steps
  mu_vol          mean order volume, shares
  sigma_price     std of the random traders' limit-price offset, ticks
  J               spin coupling
  alpha           global coupling to |M|
  beta            inverse temperature
  L               lattice side
  q_sweep         probability of one lattice sweep per step
  tick_value      currency value of one tick
  p0              initial price, ticks
  dt_list         return intervals for statistics, e.g. [10, 60]
  window          volatility window, steps
  warmup          leading steps skipped by statistics
  sweep_order     \"random\" or \"sequential\"
  field_mode      \"per_update\" or \"per_sweep\"
  price_reference \"own_side\" or \"opposite_side\"
  order_events    write events.csv with the full order-event log (bool)";

#[derive(Parser)]
#[command(name = "spinbook", version, about = "Spin-lattice traders in a limit order book", after_help = CONFIG_KEYS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation
    #[command(after_help = CONFIG_KEYS)]
    Run(RunArgs),
    /// Run several seeds of one config in parallel
    #[command(after_help = CONFIG_KEYS)]
    Batch(BatchArgs),
    /// Run the equilibrium-pricing reference model on the same lattice
    #[command(after_help = CONFIG_KEYS)]
    Baseline(BaselineArgs),
    /// Return, volatility and autocorrelation statistics of saved runs
    Stats(StatsArgs),
    /// Find the waiting-time scale c that gives a target trade rate
    #[command(name = "calibrate-c", after_help = CONFIG_KEYS)]
    CalibrateC(CalibrateArgs),
    /// Expected fraction of Ising traders acting before the first sweep
    Qratio(QratioArgs),
    /// Run a named experiment and its statistics
    Preset(PresetArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file
    #[arg(long)]
    config: PathBuf,
    /// Override the number of steps
    #[arg(long = "T", value_name = "STEPS")]
    steps: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Override the seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    runs: usize,
    /// Run i uses seed seed_base + i
    #[arg(long)]
    seed_base: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// Lattice parameters (J, alpha, beta, L, sweep_order, field_mode); preset defaults otherwise
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "T", value_name = "PERIODS", default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fundamentalist reaction strength
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Interacting-trader strength
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Number of fundamentalists
    #[arg(long, default_value_t = 144.0)]
    m: f64,
    /// Number of interacting traders
    #[arg(long, default_value_t = 144.0)]
    n: f64,
    /// Fundamental price
    #[arg(long, default_value_t = 1.0)]
    p_star: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Run or baseline directory; repeat to pool several runs
    #[arg(long = "in", value_name = "DIR", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Return intervals, comma separated; defaults to the first input's config
    #[arg(long, value_delimiter = ',')]
    dt: Option<Vec<usize>>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    /// Largest autocorrelation lag
    #[arg(long, default_value_t = 1000)]
    max_tau: usize,
    /// Volatility window stride
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Target mean trades per step
    #[arg(long, default_value_t = 5.4)]
    target: f64,
    /// Relative tolerance on the trade rate
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
}

#[derive(Args)]
struct QratioArgs {
    #[arg(long)]
    q_sweep: f64,
    /// Mean Ising waiting time in steps
    #[arg(long)]
    mu: f64,
}

#[derive(Args)]
struct PresetArgs {
    /// One of: paper-fig1-3, paper-fig3-lt
    name: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long = "T", value_name = "STEPS", default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config file not found: {0}")]
    ConfigMissing(PathBuf),
    #[error("invalid config {0}: {1}")]
    ConfigInvalid(PathBuf, String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ConfigMissing(_) | CliError::ConfigInvalid(..) | CliError::Run(Error::Config(_)) => 3,
            CliError::Run(Error::OutputDir(..)) | CliError::Run(Error::Write(..)) => 4,
            CliError::Run(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(a) => {
            let mut cfg = load_config(&a.cfg)?;
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            output::prepare_dir(&a.out)?;
            let out = engine::run(&cfg).map_err(Error::from)?;
            output::write_run(&a.out, &out)?;
            print_summary(&out);
            Ok(())
        }
        Command::Batch(a) => {
            let cfg = load_config(&a.cfg)?;
            run_batch_to(&cfg, a.runs, a.seed_base, &a.out)?;
            Ok(())
        }
        Command::Baseline(a) => baseline_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::CalibrateC(a) => {
            let cfg = load_config(&a.cfg)?;
            if !(a.target > 0.0) {
                return Err(CliError::Usage(format!("--target must be > 0, got {}", a.target)));
            }
            let cal = engine::calibrate_c(&cfg, a.target, a.tol).map_err(Error::from)?;
            println!("c = {}", cal.c);
            println!("trades_per_step = {:.4}", cal.trades_per_step);
            println!("iterations = {}", cal.iterations);
            Ok(())
        }
        Command::Qratio(a) => {
            if !(a.q_sweep > 0.0 && a.q_sweep <= 1.0) {
                return Err(CliError::Usage(format!("--q-sweep must lie in (0, 1], got {}", a.q_sweep)));
            }
            if !(a.mu > 0.0 && a.mu.is_finite()) {
                return Err(CliError::Usage(format!("--mu must be finite and > 0, got {}", a.mu)));
            }
            println!("{:.10}", engine::first_action_ratio(a.q_sweep, a.mu));
            Ok(())
        }
        Command::Preset(a) => preset_cmd(a),
    }
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut cfg = read_config(&args.config)?;
    if let Some(t) = args.steps {
        cfg.T = t;
    }
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::ConfigMissing(path.to_path_buf()))
        }
        Err(e) => return Err(CliError::ConfigInvalid(path.to_path_buf(), e.to_string())),
    };
    RunConfig::parse(&text).map_err(|e| CliError::ConfigInvalid(path.to_path_buf(), e.to_string()))
}

fn print_summary(out: &RunOutput) {
    let s = &out.summary;
    println!(
        "seed {} steps {} final_price {} trades/step {:.3} sweeps {}",
        s.seed, s.steps, s.final_price, s.mean_trades_per_step, s.sweeps
    );
}

fn run_dir(out: &Path, i: usize) -> PathBuf {
    out.join(format!("run_{i:03}"))
}

/// Runs the batch and writes `run_XXX` directories; returns their paths.
fn run_batch_to(cfg: &RunConfig, runs: usize, seed_base: u64, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    output::prepare_dir(out)?;
    let outputs = engine::run_batch(cfg, runs, seed_base).map_err(Error::from)?;
    let dirs: Vec<PathBuf> = (0..runs).map(|i| run_dir(out, i)).collect();
    outputs
        .par_iter()
        .zip(dirs.par_iter())
        .try_for_each(|(o, d)| output::write_run(d, o))?;
    for o in &outputs {
        print_summary(o);
    }
    Ok(dirs)
}

fn baseline_cmd(a: BaselineArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(path) => read_config(path)?,
        None => presets::ising_market_config(),
    };
    let params = BkfParams::new(a.a, a.b, a.m, a.n, a.p_star).map_err(Error::from)?;
    output::prepare_dir(&a.out)?;
    let out = baseline::run_baseline(cfg.lattice_params(), &params, a.steps, a.seed);
    output::write_baseline(&a.out.join(output::RETURNS_CSV), &out)?;
    let summary = serde_json::json!({
        "seed": a.seed,
        "periods": a.steps,
        "params": params,
        "lambda": params.lambda(),
        "lattice": cfg.lattice_params(),
    });
    output::write_json(&a.out.join(output::SUMMARY_JSON), &summary)?;
    println!("lambda {} periods {}", params.lambda(), a.steps);
    Ok(())
}

struct StatsPlan {
    dt_list: Vec<usize>,
    window: usize,
    warmup: usize,
    max_tau: usize,
    stride: usize,
}

/// Per-interval reports pooled over every input series.
fn pooled_reports(series: &[Vec<f64>], plan: &StatsPlan) -> Result<Vec<IntervalReport>, Error> {
    plan.dt_list
        .iter()
        .map(|&dt| {
            let req = AnalysisRequest {
                dt,
                warmup: plan.warmup,
                window: plan.window,
                stride: plan.stride,
                max_tau: plan.max_tau,
            };
            let per_run = series
                .par_iter()
                .map(|p| stats::analyze(p, &req))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(stats::pool(&per_run)?)
        })
        .collect()
}

fn stats_cmd(a: StatsArgs) -> Result<(), CliError> {
    let cfg_path = a.inputs[0].join(output::CONFIG_TOML);
    let base = if cfg_path.exists() { Some(read_config(&cfg_path)?) } else { None };
    let plan = StatsPlan {
        dt_list: a
            .dt
            .or_else(|| base.as_ref().map(|c| c.dt_list.iter().map(|&d| d as usize).collect()))
            .unwrap_or_else(|| vec![10, 30, 60, 360, 540, 720]),
        window: a.window.or(base.as_ref().map(|c| c.window)).unwrap_or(1000),
        warmup: a.warmup.or(base.as_ref().map(|c| c.warmup as usize)).unwrap_or(10_000),
        max_tau: a.max_tau,
        stride: a.stride,
    };
    if plan.dt_list.is_empty() || plan.dt_list.contains(&0) {
        return Err(CliError::Usage("--dt needs intervals >= 1".into()));
    }
    let series = a
        .inputs
        .iter()
        .map(|d| output::load_price_input(d))
        .collect::<Result<Vec<_>, _>>()?;
    output::prepare_dir(&a.out)?;
    let reports = pooled_reports(&series, &plan)?;
    output::write_stats(&a.out, &reports, HistogramSpec::default())?;
    for r in &reports {
        println!("dt {} excess_kurtosis {:.4} n {}", r.dt, r.excess_kurtosis, r.returns.len());
    }
    Ok(())
}

fn preset_cmd(a: PresetArgs) -> Result<(), CliError> {
    let preset = presets::preset(&a.name).ok_or_else(|| {
        CliError::Usage(format!("unknown preset `{}`; known: {}", a.name, presets::NAMES.join(", ")))
    })?;
    let cfg = RunConfig { T: a.steps, ..preset.config };
    let dirs = run_batch_to(&cfg, a.runs, a.seed_base, &a.out)?;
    let series = dirs
        .iter()
        .map(|d| output::load_price_input(d))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = StatsPlan {
        dt_list: preset.dt_list.iter().map(|&d| d as usize).collect(),
        window: preset.window,
        warmup: cfg.warmup as usize,
        max_tau: 1000,
        stride: 1,
    };
    let reports = pooled_reports(&series, &plan)?;
    output::write_stats(&a.out.join("stats"), &reports, HistogramSpec::default())?;
    for r in &reports {
        println!("dt {} excess_kurtosis {:.4}", r.dt, r.excess_kurtosis);
    }
    Ok(())
}
