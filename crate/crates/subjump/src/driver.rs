//! Command implementations behind the CLI front end.
//!
//! Each subcommand is a plain function from a typed setup to a [`Report`],
//! so the binary stays a thin argument-parsing shell and the whole command
//! surface is exercisable in-process by tests:
//!
//! - [`simulate`]: raw ratio samples over a horizon grid.
//! - [`verify`]: runs an experiment and scores it against the limit law its
//!   regime prescribes, plus the exact finite-horizon formulas where they
//!   exist; returns per-check pass/fail rows and an overall flag.
//! - [`limits`]: tabulates the closed-form laws and finite-horizon
//!   quadrature values over grids, for plotting and cross-checks.
//! - [`classify`]: a model card — small-jump integral, dominated-tail
//!   diagnostic over an x-grid, and tabulated regimes.
//!
//! Scoring conventions in `verify` mirror how each law is testable: Laplace
//! comparisons for the trimmed ratio (its limit has no closed CDF), KS for
//! the consecutive ratio, neighborhood mass for point-mass limits at finite
//! constants, and median trends for limits approached along the grid (the
//! degenerate regimes carry no convergence rate, so trends — not distances —
//! are the honest check).

use crate::error::{Error, Result};
use crate::laws::{
    beta_cdf, finite_t_consecutive_cdf, finite_t_trimmed_laplace, gk_laplace, limit_law_for,
    limit_law_from_regime, LimitLaw, Theorem,
};
use crate::modelspec::describe_regime;
use crate::report::{fmt_f64, sample_report, Report, FORMAT_VERSION};
use crate::sim::RatioKind;
use crate::stats::{
    increasing_median_verdict, ks_verdict, laplace_verdict, neighborhood_verdict, run_experiment,
    Cell, ExperimentSpec, LaplaceMode, Verdict,
};
use crate::tail::{Direction, Regime, TailModel};

/// Default λ grid for Laplace-transform comparisons.
pub const DEFAULT_LAMBDA_GRID: &[f64] = &[0.25, 0.5, 1.0, 2.0, 4.0];

/// Default x grid for CDF comparisons.
pub const DEFAULT_X_GRID: &[f64] = &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

// ===== simulate =====

/// Run the experiment and lay the raw samples out as a table.
pub fn simulate(spec: &ExperimentSpec) -> Result<Report> {
    let cells = run_experiment(spec)?;
    let mut report = sample_report(&cells);
    annotate_spec(&mut report, spec, "simulate");
    Ok(report)
}

// ===== verify =====

/// Everything a verification run needs beyond the experiment itself.
#[derive(Debug, Clone)]
pub struct VerifySetup {
    pub spec: ExperimentSpec,
    pub theorem: Theorem,
    /// Declared regime for models without a tabulated one (step and table
    /// measures), or to override the tabulation.
    pub regime_override: Option<Regime>,
    /// λ grid for Laplace checks (trimmed-ratio laws).
    pub lambda_grid: Vec<f64>,
    /// x grid for CDF cross-checks (consecutive-ratio laws).
    pub x_grid: Vec<f64>,
    /// Neighborhood half-width for point-mass limits at finite constants.
    pub delta: f64,
    /// Required sample mass inside that neighborhood.
    pub min_mass: f64,
    /// Required sample median for limits approached from below.
    pub min_median: f64,
}

impl VerifySetup {
    /// A setup with default grids and thresholds.
    pub fn new(
        model: TailModel,
        theorem: Theorem,
        k: usize,
        t_grid: Vec<f64>,
        replicates: usize,
    ) -> Self {
        let kind = match theorem {
            Theorem::TrimmedSum => RatioKind::TrimmedOverJump { k },
            Theorem::ConsecutiveJumps => RatioKind::ConsecutiveJumps { k },
        };
        VerifySetup {
            spec: ExperimentSpec::new(model, kind, t_grid, replicates),
            theorem,
            regime_override: None,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            x_grid: DEFAULT_X_GRID.to_vec(),
            delta: 0.05,
            min_mass: 0.95,
            min_median: 0.9,
        }
    }
}

/// Result of a verification run: the summary table and the overall flag
/// (true iff every check row passed).
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: Report,
    pub all_pass: bool,
}

/// Run the experiment behind `setup` and score it against its limit law.
pub fn verify(setup: &VerifySetup) -> Result<VerifyOutcome> {
    let spec = &setup.spec;
    let k = setup.spec.kind.k();
    let law = match setup.regime_override {
        Some(regime) => limit_law_from_regime(regime, setup.theorem, k)?,
        None => limit_law_for(&spec.model, setup.theorem, k)?,
    };
    if !(setup.delta > 0.0) {
        return Err(Error::Domain(format!(
            "neighborhood half-width must be positive, got {}",
            setup.delta
        )));
    }
    for (name, v) in [("min-mass", setup.min_mass), ("min-median", setup.min_median)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0,1], got {v}")));
        }
    }
    let cells = run_experiment(spec)?;

    let mut checks: Vec<(String, &'static str, Verdict)> = Vec::new();
    match law {
        LimitLaw::TrimmedRegVar { k, alpha } => {
            for cell in &cells {
                let against_limit = laplace_verdict(
                    &cell.samples,
                    &setup.lambda_grid,
                    LaplaceMode::Defective,
                    |lam| gk_laplace(k, lam, alpha),
                )?;
                checks.push((fmt_f64(cell.t), "laplace-vs-limit", against_limit));
                let against_exact = laplace_verdict(
                    &cell.samples,
                    &setup.lambda_grid,
                    LaplaceMode::Conditional,
                    |lam| finite_t_trimmed_laplace(&spec.model, k, cell.t, lam),
                )?;
                checks.push((fmt_f64(cell.t), "laplace-vs-finite-t", against_exact));
            }
        }
        LimitLaw::ConsecutiveBeta { k, alpha } => {
            for cell in &cells {
                let against_limit = ks_verdict(&cell.samples, |x| beta_cdf(k, alpha, x))?;
                checks.push((fmt_f64(cell.t), "ks-vs-limit", against_limit));
                let against_exact = cdf_crosscheck(cell, &spec.model, k, &setup.x_grid)?;
                checks.push((fmt_f64(cell.t), "cdf-vs-finite-t", against_exact));
            }
        }
        LimitLaw::PointMass(center) => {
            if center.is_infinite() {
                // A limit at infinity shows up only as motion along the
                // grid; a single horizon has nothing to compare.
                if cells.len() < 2 {
                    return Err(Error::Experiment(
                        "a point mass at infinity is verified by a trend; \
                         give at least two horizons"
                            .into(),
                    ));
                }
                checks.push(("all".into(), "median-trend", increasing_median_verdict(&cells)?));
            } else if setup.theorem == Theorem::ConsecutiveJumps && center == 1.0 {
                // Ratios are ≤ 1, so the limit is approached from below:
                // score the median level and its motion toward 1.
                for cell in &cells {
                    checks.push((
                        fmt_f64(cell.t),
                        "median-near-limit",
                        median_at_least(cell, setup.min_median)?,
                    ));
                }
                if cells.len() >= 2 {
                    checks.push((
                        "all".into(),
                        "median-trend",
                        increasing_median_verdict(&cells)?,
                    ));
                }
            } else {
                let mut masses = Vec::new();
                for cell in &cells {
                    let near = neighborhood_verdict(
                        &cell.samples,
                        center,
                        setup.delta,
                        setup.min_mass,
                    )?;
                    masses.push(near.statistic);
                    checks.push((fmt_f64(cell.t), "mass-near-limit", near));
                }
                if cells.len() >= 2 {
                    checks.push(("all".into(), "mass-trend", nondecreasing_verdict(&masses)));
                }
            }
        }
    }

    let mut report = Report::new(["t", "check", "result", "statistic", "threshold", "detail"]);
    let mut all_pass = true;
    for (t_label, name, verdict) in checks {
        all_pass &= verdict.pass;
        report.push_row([
            t_label,
            name.to_string(),
            if verdict.pass { "pass" } else { "fail" }.to_string(),
            fmt_f64(verdict.statistic),
            fmt_f64(verdict.threshold),
            verdict.detail.replace(',', ";"),
        ]);
    }
    annotate_spec(&mut report, spec, "verify");
    report.set_meta("theorem", setup.theorem.to_string());
    report.set_meta("law", law.describe());
    if let Some(regime) = setup.regime_override {
        report.set_meta("regime", describe_regime(regime));
    }
    match law {
        LimitLaw::TrimmedRegVar { .. } => {
            report.set_meta("lambda-grid", join_f64(&setup.lambda_grid));
        }
        LimitLaw::ConsecutiveBeta { .. } => {
            report.set_meta("x-grid", join_f64(&setup.x_grid));
        }
        LimitLaw::PointMass(_) => {}
    }
    for (i, cell) in cells.iter().enumerate() {
        annotate_cell(&mut report, i, cell);
    }
    report.set_meta("overall", if all_pass { "pass" } else { "fail" });
    Ok(VerifyOutcome { report, all_pass })
}

/// Empirical conditional CDF against the exact finite-horizon law at each
/// grid point, within three binomial standard errors (computed under the
/// exact law) plus the quadrature allowance.
fn cdf_crosscheck(cell: &Cell, model: &TailModel, k: usize, xs: &[f64]) -> Result<Verdict> {
    if xs.is_empty() {
        return Err(Error::Domain("empty x grid".into()));
    }
    let ecdf = cell.ecdf()?;
    let n = ecdf.len() as f64;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_gap = f64::NAN;
    let mut worst_allow = f64::NAN;
    let mut worst_x = f64::NAN;
    let mut pass = true;
    for &x in xs {
        let want = finite_t_consecutive_cdf(model, k, cell.t, x)?;
        let got = ecdf.eval(x);
        let se = (want * (1.0 - want) / n).sqrt();
        let allow = 3.0 * se + 1e-6;
        let gap = (got - want).abs();
        if gap - allow >= worst_margin {
            worst_margin = gap - allow;
            worst_gap = gap;
            worst_allow = allow;
            worst_x = x;
        }
        pass &= gap <= allow;
    }
    Ok(Verdict {
        pass,
        statistic: worst_gap,
        threshold: worst_allow,
        detail: format!(
            "max CDF gap {worst_gap:.3e} at x={worst_x} (allowance {worst_allow:.3e})"
        ),
    })
}

fn median_at_least(cell: &Cell, min_median: f64) -> Result<Verdict> {
    let median = cell.median()?;
    Ok(Verdict {
        pass: median >= min_median,
        statistic: median,
        threshold: min_median,
        detail: format!("sample median {median:.4} (need ≥ {min_median})"),
    })
}

fn nondecreasing_verdict(masses: &[f64]) -> Verdict {
    let mut min_step = f64::INFINITY;
    for w in masses.windows(2) {
        min_step = min_step.min(w[1] - w[0]);
    }
    Verdict {
        pass: min_step >= 0.0,
        statistic: min_step,
        threshold: 0.0,
        detail: format!(
            "neighborhood masses along grid: {masses:?} (smallest step {min_step:.3e})"
        ),
    }
}

// ===== limits =====

/// Which law table to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// Trimmed-ratio limit Laplace transform over a λ grid.
    Gk,
    /// Consecutive-ratio limit CDF over an x grid.
    BetaCdf,
    /// Exact finite-horizon trimmed-ratio Laplace transform over t × λ.
    FiniteTLaplace,
    /// Exact finite-horizon consecutive-ratio CDF over t × x.
    FiniteTCdf,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::Gk => "gk",
            LawKind::BetaCdf => "betacdf",
            LawKind::FiniteTLaplace => "finite-t-laplace",
            LawKind::FiniteTCdf => "finite-t-cdf",
        }
    }
}

/// Parse a law name as used by `--law`.
pub fn parse_law(s: &str) -> Result<LawKind> {
    match s.trim() {
        "gk" => Ok(LawKind::Gk),
        "betacdf" => Ok(LawKind::BetaCdf),
        "finite-t-laplace" => Ok(LawKind::FiniteTLaplace),
        "finite-t-cdf" => Ok(LawKind::FiniteTCdf),
        other => Err(Error::Config(format!(
            "unknown law '{other}'; expected gk, betacdf, finite-t-laplace, or finite-t-cdf"
        ))),
    }
}

/// Inputs for the `limits` tabulation.
#[derive(Debug, Clone)]
pub struct LimitsSetup {
    pub law: LawKind,
    pub k: usize,
    /// Regular-variation index, for the closed-form laws.
    pub alpha: Option<f64>,
    /// Tail model, for the finite-horizon laws.
    pub model: Option<TailModel>,
    pub lambda_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
}

impl LimitsSetup {
    pub fn new(law: LawKind, k: usize) -> Self {
        LimitsSetup {
            law,
            k,
            alpha: None,
            model: None,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            x_grid: DEFAULT_X_GRID.to_vec(),
            t_grid: vec![1.0],
        }
    }

    fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| {
            Error::Config(format!("law '{}' needs --alpha", self.law.name()))
        })
    }

    fn model(&self) -> Result<&TailModel> {
        self.model.as_ref().ok_or_else(|| {
            Error::Config(format!("law '{}' needs --model", self.law.name()))
        })
    }
}

/// Tabulate a law over its grids.
pub fn limits(setup: &LimitsSetup) -> Result<Report> {
    let k = setup.k;
    let mut report = match setup.law {
        LawKind::Gk => {
            let alpha = setup.alpha()?;
            let mut r = Report::new(["lambda", "value"]);
            for &lam in &setup.lambda_grid {
                r.push_row([fmt_f64(lam), fmt_f64(gk_laplace(k, lam, alpha)?)]);
            }
            r
        }
        LawKind::BetaCdf => {
            let alpha = setup.alpha()?;
            let mut r = Report::new(["x", "value"]);
            for &x in &setup.x_grid {
                r.push_row([fmt_f64(x), fmt_f64(beta_cdf(k, alpha, x)?)]);
            }
            r
        }
        LawKind::FiniteTLaplace => {
            let model = setup.model()?;
            let mut r = Report::new(["t", "lambda", "value"]);
            for &t in &setup.t_grid {
                for &lam in &setup.lambda_grid {
                    let v = finite_t_trimmed_laplace(model, k, t, lam)?;
                    r.push_row([fmt_f64(t), fmt_f64(lam), fmt_f64(v)]);
                }
            }
            r
        }
        LawKind::FiniteTCdf => {
            let model = setup.model()?;
            let mut r = Report::new(["t", "x", "value"]);
            for &t in &setup.t_grid {
                for &x in &setup.x_grid {
                    let v = finite_t_consecutive_cdf(model, k, t, x)?;
                    r.push_row([fmt_f64(t), fmt_f64(x), fmt_f64(v)]);
                }
            }
            r
        }
    };
    report.set_meta("version", FORMAT_VERSION);
    report.set_meta("command", "limits");
    report.set_meta("law", setup.law.name());
    report.set_meta("k", k.to_string());
    if let Some(alpha) = setup.alpha {
        report.set_meta("alpha", fmt_f64(alpha));
    }
    if let Some(model) = &setup.model {
        report.set_meta("model", model.describe());
    }
    Ok(report)
}

// ===== classify =====

/// Model card: the dominated-tail diagnostic over an x-grid plus the
/// summary quantities that decide which statistics and regimes apply.
///
/// Grid points where the diagnostic is undefined (no measure mass in
/// `(0, x]`) render as `nan` rather than failing the whole card.
pub fn classify(model: &TailModel, x_grid: Option<&[f64]>) -> Result<Report> {
    let default_grid: Vec<f64> = (1..=10)
        .map(|i| match model.direction() {
            Direction::AtZero => (-(i as f64)).exp(),
            Direction::AtInfinity => (i as f64).exp(),
        })
        .collect();
    let xs = x_grid.unwrap_or(&default_grid);
    if xs.is_empty() {
        return Err(Error::Domain("empty x grid".into()));
    }
    let mut report = Report::new(["x", "cond-iii-ratio"]);
    for &x in xs {
        let cell = match model.condition_iii_ratio(x) {
            Ok(v) => fmt_f64(v),
            Err(Error::Domain(_)) => "nan".to_string(),
            Err(e) => return Err(e),
        };
        report.push_row([fmt_f64(x), cell]);
    }
    report.set_meta("version", FORMAT_VERSION);
    report.set_meta("command", "classify");
    report.set_meta("model", model.describe());
    report.set_meta("direction", model.direction().to_string());
    report.set_meta("is-levy", model.is_levy().to_string());
    report.set_meta("min-integral", fmt_f64(model.min_integral()));
    if let Some(mass) = model.total_mass() {
        report.set_meta("total-mass", fmt_f64(mass));
    }
    for (key, theorem) in [
        ("regime-trimmed-sum", Theorem::TrimmedSum),
        ("regime-consecutive-jumps", Theorem::ConsecutiveJumps),
    ] {
        let label = match model.regime(theorem) {
            Some(regime) => describe_regime(regime),
            None => "unknown".to_string(),
        };
        report.set_meta(key, label);
    }
    Ok(report)
}

// ===== shared footer plumbing =====

fn join_f64(grid: &[f64]) -> String {
    grid.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

fn annotate_spec(report: &mut Report, spec: &ExperimentSpec, command: &str) {
    report.set_meta("version", FORMAT_VERSION);
    report.set_meta("command", command);
    report.set_meta("model", spec.model.describe());
    report.set_meta("direction", spec.model.direction().to_string());
    report.set_meta("stat", spec.kind.label());
    report.set_meta("k", spec.kind.k().to_string());
    report.set_meta("n", spec.replicates.to_string());
    report.set_meta("seed", spec.master_seed.to_string());
    report.set_meta("t-grid", join_f64(&spec.t_grid));
    report.set_meta("rel-tol", fmt_f64(spec.ctrl.rel_tol));
    report.set_meta("compensate", spec.ctrl.compensate.to_string());
    report.set_meta("value-cap", fmt_f64(spec.ctrl.value_cap));
    report.set_meta("hard-cap", spec.ctrl.hard_cap.to_string());
    report.set_meta("max-failure-fraction", fmt_f64(spec.max_failure_fraction));
    report.set_meta("serial", spec.serial.to_string());
}

fn annotate_cell(report: &mut Report, i: usize, cell: &Cell) {
    report.set_meta(&format!("cell.{i}.t"), fmt_f64(cell.t));
    report.set_meta(&format!("cell.{i}.kept"), cell.samples.len().to_string());
    report.set_meta(&format!("cell.{i}.capped"), cell.capped_count().to_string());
    report.set_meta(
        &format!("cell.{i}.degenerate"),
        cell.degenerate_count().to_string(),
    );
    report.set_meta(
        &format!("cell.{i}.truncation-failures"),
        cell.truncation_failures.to_string(),
    );
    if let Ok(median) = cell.median() {
        report.set_meta(&format!("cell.{i}.median"), fmt_f64(median));
    }
}
