//! Command-line front end.
//!
//! Subcommands: `solve-hjb`, `run`, `compare`, `temp-profile`. Each writes
//! CSV outputs plus a JSON manifest that embeds the resolved configuration;
//! feeding that manifest back through `--config` reproduces the run
//! byte-for-byte. Exit codes: 0 success, 2 configuration error, 3 solver
//! failure.

mod config;
mod output;

pub use config::{derive_seed, Config, HjbCfg, PAPER_PRESET_TOML};
pub use output::{
    fmt_g, write_compare_csv, write_manifest, write_profile_csv, write_run_csv,
    write_solution_csv,
};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hjb::{self, HjbError, HjbSolution};
use crate::objective::{Objective1D, ObjectiveRegistry};
use crate::simulate::{self, IterStats, SimError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("HJB solver failed: {0}")]
    Hjb(#[from] HjbError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hjb(_) | CliError::Sim(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Everything needed to reproduce a run: the resolved config, the seeds that
/// were actually used, the chosen HJB initialization and its pilot score,
/// and per-algorithm excluded-trajectory counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created_unix: u64,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hjb: Option<HjbSummary>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub seeds: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exclusions: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
}

/// The HJB initialization a run settled on. `pilot_score` is the mean
/// objective value at the final pilot iteration; the selection rule among
/// surviving shooting candidates is "smallest pilot score".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HjbSummary {
    pub init: [f64; 2],
    pub init_was_explicit: bool,
    pub pilot_score: f64,
    pub pilot_seed: u64,
}

#[derive(Debug, Parser)]
#[command(
    name = "thermolang",
    version,
    about = "State-dependent temperature control for Langevin optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Config file (TOML), run manifest (JSON), or the literal `paper-preset`
    #[arg(long, default_value = "paper-preset")]
    config: String,
    /// Output directory for CSVs and manifests
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the objective name
    #[arg(long)]
    objective: Option<String>,
    /// Override the step size of every configured algorithm
    #[arg(long)]
    eta: Option<f64>,
    /// Override the discount rate of the HJB solve
    #[arg(long)]
    rho: Option<f64>,
    /// Override the entropy weight of the HJB solve
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the lower temperature bound
    #[arg(long)]
    temp_lo: Option<f64>,
    /// Override the upper temperature bound
    #[arg(long)]
    temp_hi: Option<f64>,
    /// Override the number of iterations
    #[arg(long)]
    steps: Option<usize>,
    /// Override the number of replications
    #[arg(long)]
    reps: Option<usize>,
    /// Override the initialization point
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Share one noise sequence across algorithms (variance-reduced
    /// comparisons)
    #[arg(long)]
    common_noise: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the HJB ODE; writes hjb_solution.csv and hjb_manifest.json
    SolveHjb {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one algorithm; writes <algo>.csv and <algo>_manifest.json
    Run {
        /// Algorithm name: constant, power-law, bang-bang, state-dependent,
        /// sampled-relaxed or replica-exchange
        #[arg(long)]
        algo: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every configured algorithm on the shared benchmark; writes
    /// per-algorithm CSVs, compare.csv and compare_manifest.json
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit x, v, v'', h and temperature over a grid; writes
    /// temp_profile.csv and temp_profile_manifest.json
    TempProfile {
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Parses arguments, dispatches, and maps errors to exit codes.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SolveHjb { common } => {
            let (cfg, out) = prepare(&common)?;
            cmd_solve_hjb(&cfg, &out)
        }
        Command::Run { algo, common } => {
            let (cfg, out) = prepare(&common)?;
            cmd_run(&cfg, &algo, &out)
        }
        Command::Compare { common } => {
            let (cfg, out) = prepare(&common)?;
            cmd_compare(&cfg, &out)
        }
        Command::TempProfile {
            x_min,
            x_max,
            points,
            common,
        } => {
            let (cfg, out) = prepare(&common)?;
            cmd_temp_profile(&cfg, x_min, x_max, points, &out)
        }
    }
}

fn prepare(common: &CommonArgs) -> Result<(Config, PathBuf), CliError> {
    let mut cfg = Config::load(&common.config)?;
    apply_overrides(&mut cfg, common)?;
    cfg.validate()?;
    fs::create_dir_all(&common.out)?;
    Ok((cfg, common.out.clone()))
}

fn apply_overrides(cfg: &mut Config, args: &CommonArgs) -> Result<(), CliError> {
    let e = &mut cfg.experiment;
    if let Some(seed) = args.seed {
        e.seed = seed;
    }
    if let Some(obj) = &args.objective {
        e.objective = obj.clone();
    }
    if let Some(x0) = args.x0 {
        e.x0 = x0;
    }
    if let Some(steps) = args.steps {
        e.n_steps = steps;
    }
    if let Some(reps) = args.reps {
        e.n_reps = reps;
    }
    if let Some(lo) = args.temp_lo {
        e.temp_lo = lo;
    }
    if let Some(hi) = args.temp_hi {
        e.temp_hi = hi;
    }
    if args.common_noise {
        e.common_noise = true;
    }
    if let Some(eta) = args.eta {
        if let Some(c) = cfg.constant.as_mut() {
            c.eta = eta;
        }
        if let Some(c) = cfg.power_law.as_mut() {
            c.eta = eta;
        }
        if let Some(c) = cfg.replica_exchange.as_mut() {
            c.eta = eta;
        }
        if let Some(c) = cfg.state_dependent.as_mut() {
            c.eta = eta;
        }
        if let Some(c) = cfg.bang_bang.as_mut() {
            c.eta = eta;
        }
        if let Some(c) = cfg.sampled_relaxed.as_mut() {
            c.eta = eta;
        }
    }
    if args.rho.is_some() || args.lambda.is_some() {
        let sd = cfg.state_dependent.as_mut().ok_or_else(|| {
            CliError::Config(
                "--rho/--lambda require a `[state-dependent]` section".to_string(),
            )
        })?;
        if let Some(rho) = args.rho {
            sd.rho = rho;
        }
        if let Some(lambda) = args.lambda {
            sd.lambda = lambda;
        }
    }
    Ok(())
}

fn build_objective(cfg: &Config) -> Result<Objective1D, CliError> {
    ObjectiveRegistry::with_builtins()
        .build(&cfg.experiment.objective)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn solve_hjb_once(cfg: &Config, obj: &Objective1D) -> Result<(HjbSolution, HjbSummary), CliError> {
    let params = cfg.hjb_params()?;
    let pilot = cfg.pilot_sim_config()?;
    let init = cfg.hjb_init_override();
    let sol = hjb::solve(obj, &params, &pilot, init)?;
    let summary = HjbSummary {
        init: [sol.init.0, sol.init.1],
        init_was_explicit: init.is_some(),
        pilot_score: sol.pilot_score,
        pilot_seed: pilot.seed,
    };
    Ok((sol, summary))
}

fn manifest_skeleton(cfg: &Config, command: &str) -> RunManifest {
    RunManifest {
        tool: "thermolang".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: cfg.clone(),
        hjb: None,
        seeds: BTreeMap::new(),
        exclusions: BTreeMap::new(),
        outputs: Vec::new(),
    }
}

fn cmd_solve_hjb(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let obj = build_objective(cfg)?;
    let (sol, summary) = solve_hjb_once(cfg, &obj)?;
    let csv = out.join("hjb_solution.csv");
    write_solution_csv(&csv, &sol)?;
    let mut manifest = manifest_skeleton(cfg, "solve-hjb");
    manifest.hjb = Some(summary);
    manifest.outputs.push("hjb_solution.csv".to_string());
    write_manifest(&out.join("hjb_manifest.json"), &manifest)?;
    println!(
        "solved HJB on [{}, {}] from init ({}, {}), pilot score {}",
        fmt_g(sol.params.x_min),
        fmt_g(sol.params.x_max),
        fmt_g(sol.init.0),
        fmt_g(sol.init.1),
        fmt_g(sol.pilot_score)
    );
    println!("wrote {}", csv.display());
    Ok(())
}

fn run_one(
    cfg: &Config,
    algo: &str,
    obj: &Objective1D,
    sol: Option<&HjbSolution>,
) -> Result<(Vec<IterStats>, usize), CliError> {
    let sim_cfg = cfg.sim_config(algo)?;
    let output = simulate::run(&sim_cfg, obj, sol)?;
    Ok((output.stats, output.excluded))
}

fn cmd_run(cfg: &Config, algo: &str, out: &Path) -> Result<(), CliError> {
    cfg.policy_spec(algo)?;
    let obj = build_objective(cfg)?;
    let needs = cfg.needs_hjb(&[algo.to_string()]);
    let solved = if needs {
        Some(solve_hjb_once(cfg, &obj)?)
    } else {
        None
    };
    let (stats, excluded) = run_one(cfg, algo, &obj, solved.as_ref().map(|(s, _)| s))?;
    let csv = out.join(format!("{algo}.csv"));
    write_run_csv(&csv, &stats)?;
    let mut manifest = manifest_skeleton(cfg, "run");
    manifest.hjb = solved.map(|(_, summary)| summary);
    manifest.seeds.insert(algo.to_string(), cfg.algo_seed(algo));
    manifest.exclusions.insert(algo.to_string(), excluded);
    manifest.outputs.push(format!("{algo}.csv"));
    write_manifest(&out.join(format!("{algo}_manifest.json")), &manifest)?;
    let last = stats.last().expect("n_steps >= 1");
    println!(
        "{algo}: {} iterations x {} replications, final mean f = {} ({} excluded)",
        cfg.experiment.n_steps,
        cfg.experiment.n_reps,
        fmt_g(last.mean_f),
        excluded
    );
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_compare(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let algorithms = cfg.experiment.algorithms.clone();
    if algorithms.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two algorithms in experiment.algorithms".to_string(),
        ));
    }
    let obj = build_objective(cfg)?;
    let solved = if cfg.needs_hjb(&algorithms) {
        let (sol, summary) = solve_hjb_once(cfg, &obj)?;
        write_solution_csv(&out.join("hjb_solution.csv"), &sol)?;
        Some((sol, summary))
    } else {
        None
    };

    let mut manifest = manifest_skeleton(cfg, "compare");
    manifest.seeds = cfg.algo_seeds(&algorithms);
    let mut runs: Vec<(String, Vec<IterStats>)> = Vec::new();
    for algo in &algorithms {
        let (stats, excluded) = run_one(cfg, algo, &obj, solved.as_ref().map(|(s, _)| s))?;
        write_run_csv(&out.join(format!("{algo}.csv")), &stats)?;
        manifest.exclusions.insert(algo.clone(), excluded);
        manifest.outputs.push(format!("{algo}.csv"));
        let last = stats.last().expect("n_steps >= 1");
        println!(
            "{algo}: final mean f = {} (std err {})",
            fmt_g(last.mean_f),
            fmt_g(last.std_err)
        );
        runs.push((algo.clone(), stats));
    }
    write_compare_csv(&out.join("compare.csv"), &runs)?;
    manifest.outputs.push("compare.csv".to_string());
    if let Some((_, summary)) = solved {
        manifest.hjb = Some(summary);
        manifest.outputs.push("hjb_solution.csv".to_string());
    }
    write_manifest(&out.join("compare_manifest.json"), &manifest)?;
    println!("wrote {}", out.join("compare.csv").display());
    Ok(())
}

fn cmd_temp_profile(
    cfg: &Config,
    x_min: f64,
    x_max: f64,
    points: usize,
    out: &Path,
) -> Result<(), CliError> {
    if points == 0 || !(x_min.is_finite() && x_max.is_finite()) || x_min > x_max {
        return Err(CliError::Config(format!(
            "invalid profile grid: [{x_min}, {x_max}] with {points} points"
        )));
    }
    let obj = build_objective(cfg)?;
    let (sol, summary) = solve_hjb_once(cfg, &obj)?;
    let grid: Vec<f64> = if points == 1 {
        vec![x_min]
    } else {
        (0..points)
            .map(|i| x_min + (x_max - x_min) * i as f64 / (points - 1) as f64)
            .collect()
    };
    let csv = out.join("temp_profile.csv");
    write_profile_csv(&csv, &sol, &grid)?;
    let mut manifest = manifest_skeleton(cfg, "temp-profile");
    manifest.hjb = Some(summary);
    manifest.outputs.push("temp_profile.csv".to_string());
    write_manifest(&out.join("temp_profile_manifest.json"), &manifest)?;
    println!("wrote {}", csv.display());
    Ok(())
}
