//! Empirical statistics and the experiment runner.
//!
//! This module turns raw [`RatioSample`]s into the quantities the verifier
//! compares against theory: empirical CDFs, Kolmogorov–Smirnov distances,
//! empirical Laplace transforms, neighborhood masses for point-mass limits,
//! and median trends for limits that escape to 0, 1, or ∞.
//!
//! # Sample bookkeeping
//!
//! *Degenerate* samples (0/0 ratios — the process produced too few jumps)
//! carry no value. They are excluded from every statistic here and their
//! count is reported; for statistics of the k-th jump this exclusion is
//! precisely conditioning on "at least k jumps", which is also how the exact
//! fixed-`t` formulas for finite measures are normalized.
//!
//! *Capped* samples (trimmed ratios at or beyond the cap, or whose
//! denominator jump was zero) represent mass escaping to infinity. The
//! defective-limit convention applies: they contribute `e^{−λ·∞} = 0` to
//! Laplace means and sit at the cap value in ECDFs, so mass at infinity is
//! visible to every test instead of being dropped. Comparisons against the
//! exact *conditional* laws use [`LaplaceMode::Conditional`], which excludes
//! them and renormalizes.
//!
//! # Determinism
//!
//! [`run_experiment`] addresses every Monte Carlo draw by
//! `(master seed, grid index, replicate)`, so the sample set is a pure
//! function of the experiment spec — replicates may be computed serially or
//! on any number of threads with bit-identical results.

use crate::error::{Error, Result};
use crate::rng::{ExpSpacings, SeedPath};
use crate::sim::{consecutive_ratio, trimmed_ratio, RatioKind, RatioSample, SeriesControl};
use crate::tail::{Direction, TailModel};
use rayon::prelude::*;

/// Empirical CDF over a fixed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Build from raw values. NaNs are rejected; every statistic in this
    /// crate produces finite-or-capped values, so a NaN is a caller bug.
    pub fn new(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut sorted: Vec<f64> = values.into_iter().collect();
        if sorted.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("ECDF input contains NaN".into()));
        }
        if sorted.is_empty() {
            return Err(Error::Experiment(
                "cannot build an ECDF from zero usable samples".into(),
            ));
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample ≤ `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.sorted.partition_point(|&v| v <= x);
        idx as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile: the smallest order statistic `x` with
    /// `F̂(x) ≥ q`. No interpolation, so the result is always a sample point.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!(
                "quantile level must lie in [0,1], got {q}"
            )));
        }
        let n = self.sorted.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        Ok(self.sorted[idx])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid level")
    }

    /// Kolmogorov–Smirnov distance `sup_x |F̂(x) − F(x)|` against a
    /// right-continuous reference CDF.
    ///
    /// Both functions are càdlàg, so the supremum is attained at a sample
    /// point from the right (`F̂(x)` vs `F(x)`) or from the left
    /// (`F̂(x⁻)` vs `F(x⁻)`). Tied samples are treated as one block, and the
    /// reference's left limit is taken numerically at the previous float, so
    /// reference laws with atoms (finite measures have one at 0) are scored
    /// correctly rather than conservatively.
    pub fn ks_distance_to(&self, cdf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let check = |f: f64, x: f64| -> Result<f64> {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Domain(format!(
                    "reference CDF returned {f} at {x}, outside [0,1]"
                )));
            }
            Ok(f)
        };
        let n = self.sorted.len() as f64;
        let mut d = 0.0f64;
        let mut i = 0usize;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i + 1;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let f_right = check(cdf(x)?, x)?;
            let f_left = check(cdf(x.next_down())?, x)?;
            d = d.max((j as f64 / n - f_right).abs());
            d = d.max((i as f64 / n - f_left).abs());
            i = j;
        }
        Ok(d)
    }
}

/// Critical KS distance used by the verifier: the asymptotic 1%-level value
/// `1.628/√n` plus a cushion of `0.0014` for finite-sample and atom effects.
pub fn ks_threshold(n: usize) -> f64 {
    1.628 / (n as f64).sqrt() + 0.0014
}

/// How capped samples enter a Laplace mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceMode {
    /// Capped samples contribute 0 — the mean estimates `E e^{−λW}` for a
    /// possibly defective law with mass at infinity. Use against limit laws.
    Defective,
    /// Capped samples are excluded and the mean renormalized — estimates the
    /// law conditioned on the statistic existing and being finite. Use
    /// against the exact fixed-`t` formulas, which carry the matching
    /// normalization.
    Conditional,
}

fn usable(samples: &[RatioSample]) -> impl Iterator<Item = &RatioSample> {
    samples.iter().filter(|s| !s.degenerate)
}

/// Empirical Laplace transform `mean(e^{−λ·value})` at one point.
///
/// Degenerate samples are excluded; capped ones enter per `mode`.
pub fn empirical_laplace(samples: &[RatioSample], lambda: f64, mode: LaplaceMode) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "Laplace argument must be a nonnegative finite number, got {lambda}"
        )));
    }
    let (mut sum, mut comp, mut n) = (0.0f64, 0.0f64, 0usize);
    for s in usable(samples) {
        let contrib = if s.capped {
            match mode {
                LaplaceMode::Defective => 0.0,
                LaplaceMode::Conditional => continue,
            }
        } else {
            (-lambda * s.value).exp()
        };
        kahan_add(&mut sum, &mut comp, contrib);
        n += 1;
    }
    if n == 0 {
        return Err(Error::Experiment(
            "no usable samples for a Laplace estimate".into(),
        ));
    }
    Ok(sum / n as f64)
}

/// Standard error of [`empirical_laplace`] at the same point: sample
/// standard deviation of the per-sample contributions over `√n`.
pub fn laplace_se(samples: &[RatioSample], lambda: f64, mode: LaplaceMode) -> Result<f64> {
    let mean = empirical_laplace(samples, lambda, mode)?;
    let (mut ss, mut comp, mut n) = (0.0f64, 0.0f64, 0usize);
    for s in usable(samples) {
        let contrib = if s.capped {
            match mode {
                LaplaceMode::Defective => 0.0,
                LaplaceMode::Conditional => continue,
            }
        } else {
            (-lambda * s.value).exp()
        };
        kahan_add(&mut ss, &mut comp, (contrib - mean).powi(2));
        n += 1;
    }
    if n < 2 {
        return Err(Error::Experiment(
            "need at least two usable samples for a standard error".into(),
        ));
    }
    Ok((ss / (n - 1) as f64 / n as f64).sqrt())
}

fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    /// The observed test statistic (meaning depends on the check).
    pub statistic: f64,
    /// The allowance it was compared against.
    pub threshold: f64,
    /// Human-readable one-liner describing what was measured.
    pub detail: String,
}

/// Compare an empirical Laplace transform against a target transform on a
/// λ-grid. Passes when `|L̂(λ) − L(λ)| ≤ 3·SE(λ) + 1e-6` at every grid
/// point; the verdict reports the worst excess over that allowance.
pub fn laplace_verdict(
    samples: &[RatioSample],
    lambdas: &[f64],
    mode: LaplaceMode,
    target: impl Fn(f64) -> Result<f64>,
) -> Result<Verdict> {
    if lambdas.is_empty() {
        return Err(Error::Domain("empty λ grid".into()));
    }
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_allow = f64::NAN;
    let mut worst_lambda = f64::NAN;
    let mut pass = true;
    for &lambda in lambdas {
        let est = empirical_laplace(samples, lambda, mode)?;
        let se = laplace_se(samples, lambda, mode)?;
        let want = target(lambda)?;
        let gap = (est - want).abs();
        let allow = 3.0 * se + 1e-6;
        if gap - allow > worst_gap - worst_allow {
            worst_gap = gap;
            worst_allow = allow;
            worst_lambda = lambda;
        }
        pass &= gap <= allow;
    }
    Ok(Verdict {
        pass,
        statistic: worst_gap,
        threshold: worst_allow,
        detail: format!(
            "max Laplace gap {worst_gap:.3e} at λ={worst_lambda} (allowance {worst_allow:.3e})"
        ),
    })
}

/// Kolmogorov–Smirnov check of the (non-degenerate) sample against a
/// reference CDF at the [`ks_threshold`] level.
pub fn ks_verdict(
    samples: &[RatioSample],
    cdf: impl Fn(f64) -> Result<f64>,
) -> Result<Verdict> {
    let ecdf = Ecdf::new(usable(samples).map(|s| s.value))?;
    let d = ecdf.ks_distance_to(cdf)?;
    let threshold = ks_threshold(ecdf.len());
    Ok(Verdict {
        pass: d <= threshold,
        statistic: d,
        threshold,
        detail: format!(
            "KS distance {d:.5} over {} samples (threshold {threshold:.5})",
            ecdf.len()
        ),
    })
}

/// Check that at least `min_mass` of the non-degenerate sample lies within
/// `delta` of `center` — the testable form of a point-mass limit. Capped
/// samples sit at the cap value and therefore count against the mass.
pub fn neighborhood_verdict(
    samples: &[RatioSample],
    center: f64,
    delta: f64,
    min_mass: f64,
) -> Result<Verdict> {
    if !(delta > 0.0) || !(0.0..=1.0).contains(&min_mass) {
        return Err(Error::Domain(format!(
            "neighborhood test needs delta > 0 and min_mass in [0,1], got ({delta}, {min_mass})"
        )));
    }
    let (mut inside, mut total) = (0usize, 0usize);
    for s in usable(samples) {
        total += 1;
        if (s.value - center).abs() <= delta {
            inside += 1;
        }
    }
    if total == 0 {
        return Err(Error::Experiment(
            "no usable samples for a neighborhood test".into(),
        ));
    }
    let mass = inside as f64 / total as f64;
    Ok(Verdict {
        pass: mass >= min_mass,
        statistic: mass,
        threshold: min_mass,
        detail: format!(
            "mass {mass:.4} within ±{delta} of {center} over {total} samples (need ≥ {min_mass})"
        ),
    })
}

/// One grid cell of an experiment: every sample drawn at a single horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub t: f64,
    /// Successful draws in replicate order (failed replicates are absent).
    pub samples: Vec<RatioSample>,
    /// Replicates that failed the series stopping rule within the hard cap.
    pub truncation_failures: usize,
}

impl Cell {
    pub fn capped_count(&self) -> usize {
        self.samples.iter().filter(|s| s.capped).count()
    }

    pub fn degenerate_count(&self) -> usize {
        self.samples.iter().filter(|s| s.degenerate).count()
    }

    /// ECDF of the non-degenerate values.
    pub fn ecdf(&self) -> Result<Ecdf> {
        Ecdf::new(usable(&self.samples).map(|s| s.value))
    }

    /// Median of the non-degenerate values.
    pub fn median(&self) -> Result<f64> {
        Ok(self.ecdf()?.median())
    }
}

/// Check that cell medians strictly increase in the given order — the
/// testable trend for limits that escape along the horizon grid (to ∞, or
/// upward to a constant). The verdict's statistic is the smallest adjacent
/// increment (negative when the trend breaks).
pub fn increasing_median_verdict(cells: &[Cell]) -> Result<Verdict> {
    if cells.len() < 2 {
        return Err(Error::Domain(
            "a median trend needs at least two cells".into(),
        ));
    }
    let medians: Vec<f64> = cells
        .iter()
        .map(|c| c.median())
        .collect::<Result<Vec<_>>>()?;
    let mut min_step = f64::INFINITY;
    for w in medians.windows(2) {
        min_step = min_step.min(w[1] - w[0]);
    }
    Ok(Verdict {
        pass: min_step > 0.0,
        statistic: min_step,
        threshold: 0.0,
        detail: format!("medians along grid: {medians:?} (smallest step {min_step:.3e})"),
    })
}

/// Full description of a Monte Carlo experiment over a horizon grid.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub model: TailModel,
    pub kind: RatioKind,
    /// Horizons, one cell per entry, in the caller's preferred order.
    pub t_grid: Vec<f64>,
    /// Independent replicates per cell.
    pub replicates: usize,
    pub ctrl: SeriesControl,
    pub master_seed: u64,
    /// Run replicates on one thread. The results are bit-identical either
    /// way; the switch exists so that claim is testable.
    pub serial: bool,
    /// Tolerated fraction of replicates (per cell) that may fail series
    /// truncation before the experiment itself errors.
    pub max_failure_fraction: f64,
}

impl ExperimentSpec {
    pub fn new(model: TailModel, kind: RatioKind, t_grid: Vec<f64>, replicates: usize) -> Self {
        ExperimentSpec {
            model,
            kind,
            t_grid,
            replicates,
            ctrl: SeriesControl::default(),
            master_seed: 0,
            serial: false,
            max_failure_fraction: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::Domain("experiment needs a nonempty t grid".into()));
        }
        for w in self.t_grid.windows(2) {
            let toward_limit = match self.model.direction() {
                Direction::AtZero => w[1] < w[0],
                Direction::AtInfinity => w[1] > w[0],
            };
            if !toward_limit {
                return Err(Error::Domain(format!(
                    "the horizon grid must run strictly toward the declared limit \
                     ({}); got {} then {}",
                    self.model.direction(),
                    w[0],
                    w[1]
                )));
            }
        }
        if self.replicates == 0 {
            return Err(Error::Domain(
                "experiment needs at least one replicate".into(),
            ));
        }
        if self.replicates as u64 >= 1 << 40 {
            return Err(Error::Domain(
                "replicate count exceeds the 2^40 stream-packing range".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return Err(Error::Domain(format!(
                "max_failure_fraction must lie in [0,1], got {}",
                self.max_failure_fraction
            )));
        }
        Ok(())
    }

    fn draw(&self, t: f64, grid_index: usize, replicate: u64) -> Result<RatioSample> {
        let path = SeedPath::for_grid_cell(self.master_seed, grid_index, replicate);
        let mut src = ExpSpacings::new(&path);
        match self.kind {
            RatioKind::TrimmedOverJump { k } => trimmed_ratio(&self.model, t, k, &self.ctrl, &mut src),
            RatioKind::ConsecutiveJumps { k } => consecutive_ratio(&self.model, t, k, &mut src),
        }
    }
}

/// Run the experiment: one [`Cell`] per grid horizon, every draw addressed
/// by `(master seed, grid index, replicate)`.
///
/// Truncation failures are tolerated up to the configured per-cell fraction
/// and reported in the cell; any other sampling error aborts the run. Each
/// cell is checked against the Laplace coherence bound
/// `L̂(1) ≤ e^{−min value}` (an identity for any genuine sample set, so a
/// violation means corrupted bookkeeping, not bad luck).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Cell>> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(spec.t_grid.len());
    for (gi, &t) in spec.t_grid.iter().enumerate() {
        let draws: Vec<Option<RatioSample>> = if spec.serial {
            let mut out = Vec::with_capacity(spec.replicates);
            for rep in 0..spec.replicates {
                out.push(settle(spec.draw(t, gi, rep as u64))?);
            }
            out
        } else {
            (0..spec.replicates)
                .into_par_iter()
                .map(|rep| settle(spec.draw(t, gi, rep as u64)))
                .collect::<Result<Vec<_>>>()?
        };
        let truncation_failures = draws.iter().filter(|d| d.is_none()).count();
        let samples: Vec<RatioSample> = draws.into_iter().flatten().collect();
        if truncation_failures as f64 > spec.max_failure_fraction * spec.replicates as f64 {
            return Err(Error::Experiment(format!(
                "{truncation_failures} of {} replicates at t={t} failed series truncation \
                 (tolerated fraction {})",
                spec.replicates, spec.max_failure_fraction
            )));
        }
        let cell = Cell {
            t,
            samples,
            truncation_failures,
        };
        check_laplace_coherence(&cell)?;
        cells.push(cell);
    }
    Ok(cells)
}

/// `Ok(Some)` for a usable draw, `Ok(None)` for a tolerable truncation
/// failure, `Err` for anything that indicates misuse rather than bad luck.
fn settle(r: Result<RatioSample>) -> Result<Option<RatioSample>> {
    match r {
        Ok(s) => Ok(Some(s)),
        Err(Error::Truncation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check_laplace_coherence(cell: &Cell) -> Result<()> {
    let min = usable(&cell.samples)
        .map(|s| s.value)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Ok(()); // no usable samples; scorers will report that properly
    }
    let l1 = empirical_laplace(&cell.samples, 1.0, LaplaceMode::Defective)?;
    if l1 > (-min).exp() + 1e-12 {
        return Err(Error::Experiment(format!(
            "Laplace coherence violated at t={}: L̂(1)={l1} exceeds e^{{−min}}={}",
            cell.t,
            (-min).exp()
        )));
    }
    Ok(())
}
