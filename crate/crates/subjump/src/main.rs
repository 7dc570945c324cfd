//! Batch front end over [`subjump::driver`]: flag parsing, config-file
//! resolution, and file emission.
//!
//! Every flag can also be supplied by a `key = value` config file
//! (`--config`); explicit flags win, then config keys, then (for the seed)
//! the `SUBJUMP_SEED` environment variable, then built-in defaults.
//!
//! Exit codes: `0` success (for `verify`: every check passed), `1` a verify
//! check failed statistically, `2` operational error (bad arguments, model
//! or config parse failure, I/O, non-convergent quadrature or series).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subjump::config::{self, ConfigFile, SEED_ENV_VAR};
use subjump::driver::{self, LimitsSetup, VerifySetup};
use subjump::error::{Error, Result};
use subjump::laws::Theorem;
use subjump::modelspec::{load_model, parse_direction, parse_regime};
use subjump::report::Report;
use subjump::sim::RatioKind;
use subjump::stats::ExperimentSpec;
use subjump::tail::TailModel;

#[derive(Parser)]
#[command(
    name = "subjump",
    version,
    about = "Simulate ordered-jump ratios of driftless subordinators and \
             verify them against their exact and limiting laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit raw ratio samples over a horizon grid.
    Simulate(SimulateArgs),
    /// Run an experiment and score it against the law its regime prescribes.
    Verify(VerifyArgs),
    /// Tabulate closed-form limit laws and exact finite-horizon values.
    Limits(LimitsArgs),
    /// Print a model card: integrability, dominated-tail diagnostic, regimes.
    Classify(ClassifyArgs),
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct IoArgs {
    /// Config file with `key = value` defaults for the other flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Flags shared by the sampling subcommands (`simulate`, `verify`).
#[derive(Args)]
struct ExperimentArgs {
    /// Tail model, e.g. "stable(alpha=0.5,c=1)" or "table(tail.csv)".
    #[arg(long)]
    model: Option<String>,
    /// Jump index / trim depth.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated horizon grid, e.g. "1e-1,1e-2,1e-3".
    #[arg(long)]
    t: Option<String>,
    /// Replicates per horizon.
    #[arg(long)]
    n: Option<usize>,
    /// Master seed (default: config key, then $SUBJUMP_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Limit direction of the model: "at-zero" or "at-infinity".
    #[arg(long)]
    direction: Option<String>,
    /// Relative tolerance of the series stopping rule.
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Compensated stopping rule (add back the expected remainder).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    compensate: Option<bool>,
    /// Run replicates single-threaded (results are identical either way).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    serial: Option<bool>,
    /// Trimmed ratios at or above this value are recorded as capped.
    #[arg(long = "value-cap")]
    value_cap: Option<f64>,
    /// Maximum series terms per replicate before a truncation failure.
    #[arg(long = "hard-cap")]
    hard_cap: Option<usize>,
    /// Tolerated fraction of truncation failures per horizon cell.
    #[arg(long = "max-failure-fraction")]
    max_failure_fraction: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Statistic: "trimmed" or "consecutive".
    #[arg(long)]
    stat: Option<String>,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which limit theorem to score against: 1 (trimmed sum over next jump)
    /// or 2 (consecutive jumps).
    #[arg(long)]
    theorem: Option<String>,
    /// Declared regime for models without a tabulated one, e.g.
    /// "regvar(alpha=0.5)", "slowvar", "rapid", "cond-iii".
    #[arg(long)]
    regime: Option<String>,
    /// λ grid for Laplace-transform checks.
    #[arg(long)]
    lambda: Option<String>,
    /// x grid for CDF checks.
    #[arg(long)]
    x: Option<String>,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct LimitsArgs {
    /// Law table to emit: "gk", "betacdf", "finite-t-laplace", "finite-t-cdf".
    #[arg(long)]
    law: Option<String>,
    /// Jump index / trim depth.
    #[arg(long)]
    k: Option<usize>,
    /// Regular-variation index for the closed-form laws.
    #[arg(long)]
    alpha: Option<f64>,
    /// Tail model for the finite-horizon laws.
    #[arg(long)]
    model: Option<String>,
    /// λ grid (Laplace laws).
    #[arg(long)]
    lambda: Option<String>,
    /// x grid (CDF laws).
    #[arg(long)]
    x: Option<String>,
    /// Horizon grid (finite-horizon laws).
    #[arg(long)]
    t: Option<String>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Tail model to describe.
    #[arg(long)]
    model: Option<String>,
    /// x grid for the dominated-tail diagnostic (default: e^{∓1..10} along
    /// the model's direction).
    #[arg(long)]
    x: Option<String>,
    /// Limit direction of the model: "at-zero" or "at-infinity".
    #[arg(long)]
    direction: Option<String>,
    #[command(flatten)]
    io: IoArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate(args) => {
            let cfg = load_config(&args.io)?;
            let stat = require("stat", opt_str(&args.stat, &cfg, "stat"))?;
            let k = require("k", args.experiment.k.or(cfg.get_usize("k")?))?;
            let kind = parse_stat(&stat, k)?;
            let spec = build_spec(&args.experiment, kind, &cfg)?;
            let report = driver::simulate(&spec)?;
            emit(&report, out_path(&args.io, &cfg).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let cfg = load_config(&args.io)?;
            let theorem = parse_theorem(&require(
                "theorem",
                opt_str(&args.theorem, &cfg, "theorem"),
            )?)?;
            let k = require("k", args.experiment.k.or(cfg.get_usize("k")?))?;
            let kind = match theorem {
                Theorem::TrimmedSum => RatioKind::TrimmedOverJump { k },
                Theorem::ConsecutiveJumps => RatioKind::ConsecutiveJumps { k },
            };
            let spec = build_spec(&args.experiment, kind, &cfg)?;
            let mut setup = VerifySetup::new(
                spec.model.clone(),
                theorem,
                k,
                spec.t_grid.clone(),
                spec.replicates,
            );
            setup.spec = spec;
            if let Some(s) = opt_str(&args.regime, &cfg, "regime") {
                setup.regime_override = Some(parse_regime(&s)?);
            }
            if let Some(grid) = grid_opt(&args.lambda, &cfg, "lambda")? {
                setup.lambda_grid = grid;
            }
            if let Some(grid) = grid_opt(&args.x, &cfg, "x")? {
                setup.x_grid = grid;
            }
            let outcome = driver::verify(&setup)?;
            emit(&outcome.report, out_path(&args.io, &cfg).as_deref())?;
            let results = outcome.report.str_column("result")?;
            let failed = results.iter().filter(|r| **r != "pass").count();
            if outcome.all_pass {
                eprintln!("verify: all {} checks passed", results.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "verify: {failed} of {} checks failed",
                    results.len()
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Limits(args) => {
            let cfg = load_config(&args.io)?;
            let law = driver::parse_law(&require("law", opt_str(&args.law, &cfg, "law"))?)?;
            let k = require("k", args.k.or(cfg.get_usize("k")?))?;
            let mut setup = LimitsSetup::new(law, k);
            setup.alpha = args.alpha.or(cfg.get_f64("alpha")?);
            if let Some(spec) = opt_str(&args.model, &cfg, "model") {
                setup.model = Some(load_model(&spec)?);
            }
            if let Some(grid) = grid_opt(&args.lambda, &cfg, "lambda")? {
                setup.lambda_grid = grid;
            }
            if let Some(grid) = grid_opt(&args.x, &cfg, "x")? {
                setup.x_grid = grid;
            }
            if let Some(grid) = grid_opt(&args.t, &cfg, "t")? {
                setup.t_grid = grid;
            }
            let report = driver::limits(&setup)?;
            emit(&report, out_path(&args.io, &cfg).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify(args) => {
            let cfg = load_config(&args.io)?;
            let model = resolve_model(&args.model, &args.direction, &cfg)?;
            let x_grid = grid_opt(&args.x, &cfg, "x")?;
            let report = driver::classify(&model, x_grid.as_deref())?;
            emit(&report, out_path(&args.io, &cfg).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

// ===== option resolution (flag > config > default) =====

fn load_config(io: &IoArgs) -> Result<ConfigFile> {
    match &io.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::empty()),
    }
}

fn opt_str(flag: &Option<String>, cfg: &ConfigFile, key: &str) -> Option<String> {
    flag.clone().or_else(|| cfg.get(key).map(String::from))
}

fn grid_opt(flag: &Option<String>, cfg: &ConfigFile, key: &str) -> Result<Option<Vec<f64>>> {
    match flag {
        Some(text) => config::parse_grid(key, text).map(Some),
        None => cfg.get_grid(key),
    }
}

fn require<T>(key: &str, value: Option<T>) -> Result<T> {
    value.ok_or_else(|| {
        Error::Config(format!(
            "missing required option '--{key}' (or config key '{key}')"
        ))
    })
}

fn out_path(io: &IoArgs, cfg: &ConfigFile) -> Option<PathBuf> {
    io.out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from))
}

fn resolve_model(
    flag: &Option<String>,
    direction: &Option<String>,
    cfg: &ConfigFile,
) -> Result<TailModel> {
    let spec = require("model", opt_str(flag, cfg, "model"))?;
    let mut model = load_model(&spec)?;
    if let Some(d) = opt_str(direction, cfg, "direction") {
        model = model.with_direction(parse_direction(&d)?);
    }
    Ok(model)
}

fn parse_stat(stat: &str, k: usize) -> Result<RatioKind> {
    match stat.trim() {
        "trimmed" | "trimmed-over-jump" => Ok(RatioKind::TrimmedOverJump { k }),
        "consecutive" | "consecutive-jumps" => Ok(RatioKind::ConsecutiveJumps { k }),
        other => Err(Error::Config(format!(
            "unknown stat '{other}'; expected trimmed or consecutive"
        ))),
    }
}

fn parse_theorem(s: &str) -> Result<Theorem> {
    match s.trim() {
        "1" => Ok(Theorem::TrimmedSum),
        "2" => Ok(Theorem::ConsecutiveJumps),
        other => Err(Error::Config(format!(
            "unknown theorem '{other}'; expected 1 (trimmed sum over next jump) \
             or 2 (consecutive jumps)"
        ))),
    }
}

/// Assemble the experiment from flags and config, shared by simulate/verify.
fn build_spec(
    args: &ExperimentArgs,
    kind: RatioKind,
    cfg: &ConfigFile,
) -> Result<ExperimentSpec> {
    let model = resolve_model(&args.model, &args.direction, cfg)?;
    let t_grid = require("t", grid_opt(&args.t, cfg, "t")?)?;
    let n = require("n", args.n.or(cfg.get_usize("n")?))?;
    let env = std::env::var(SEED_ENV_VAR).ok();
    let seed = config::resolve_seed(args.seed, cfg.get_u64("seed")?, env.as_deref())?;

    let mut spec = ExperimentSpec::new(model, kind, t_grid, n);
    spec.master_seed = seed;
    if let Some(v) = args.rel_tol.or(cfg.get_f64("rel-tol")?) {
        spec.ctrl.rel_tol = v;
    }
    if let Some(v) = args.compensate.or(cfg.get_bool("compensate")?) {
        spec.ctrl.compensate = v;
    }
    if let Some(v) = args.value_cap.or(cfg.get_f64("value-cap")?) {
        spec.ctrl.value_cap = v;
    }
    if let Some(v) = args.hard_cap.or(cfg.get_usize("hard-cap")?) {
        spec.ctrl.hard_cap = v;
    }
    if let Some(v) = args.serial.or(cfg.get_bool("serial")?) {
        spec.serial = v;
    }
    if let Some(v) = args
        .max_failure_fraction
        .or(cfg.get_f64("max-failure-fraction")?)
    {
        spec.max_failure_fraction = v;
    }
    Ok(spec)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    let text = report.render();
    match out {
        Some(path) => std::fs::write(path, &text).map_err(|e| {
            Error::Io(format!("cannot write '{}': {e}", path.display()))
        }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(Error::from)
        }
    }
}
