//! Tail functions of jump measures and their generalized inverses.
//!
//! A model is a nonincreasing, right-continuous tail `Λ̄(x) = Λ((x, ∞))`,
//! `x > 0`, with `Λ̄(x) → 0` as `x → ∞`. Its generalized inverse
//!
//! ```text
//!     φ(s) = sup{ y : Λ̄(y) > s }          (sup ∅ = 0)
//! ```
//!
//! is again nonincreasing and right-continuous, and the pair satisfies the
//! Galois relation `φ(s) ≤ x  ⟺  Λ̄(x) ≤ s`. Plateaus of one function are
//! jumps of the other.
//!
//! The model is the Lévy measure of a driftless subordinator exactly when
//! `∫ min{1, x} Λ(dx) = ∫_0^1 Λ̄(u) du < ∞`; equivalently `∫_δ^∞ φ(s) ds < ∞`
//! for every `δ > 0`. [`TailModel::min_integral`] evaluates that integral and
//! [`TailModel::is_levy`] reports the family's classification.
//!
//! Built-in families (canonical small-jump regimes in parentheses):
//!
//! * **stable** `Λ̄(x) = c·x^{-α}`, `α ∈ (0,1)` — regularly varying at both
//!   ends; every fixed-`t` ratio law already equals its limit law.
//! * **gamma** `Λ̄(x) = ∫_x^∞ u^{-1} e^{-bu} du = E₁(bx)` — slowly varying
//!   at zero, so the largest jump swallows the trimmed sum as `t ↓ 0`.
//! * **logcorr** `Λ̄(x) = x^{-1} (ln 1/x)^{-p}`, `p > 1`, on `(0, e^{-p-1}]`,
//!   continued by a constant level and then an exponential tail — index −1
//!   with a logarithmic correction; the trimmed-sum ratio diverges while the
//!   consecutive-jump ratio still has a Beta limit.
//! * **rapid0** `Π̄(x) = e^{1/x} − 1` — rapidly varying at zero and *not* a
//!   Lévy measure; only the consecutive-jump statistic applies.
//! * **steps** — a finite atomic measure (finite activity; degenerate jump
//!   ratios at small `t` are expected and flagged downstream).
//! * **table** — a user-supplied right-continuous step tail, interpreted
//!   exactly like a step measure.

use crate::error::{Error, Result};
use crate::laws::Theorem;
use crate::special::{exp_integral_e1, exp_integral_e1_scaled, EULER_GAMMA};

/// Which end of the time axis an experiment targets: `t ↓ 0` probes the
/// small-jump behaviour of the tail, `t → ∞` the large-jump behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AtZero,
    AtInfinity,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::AtZero => write!(f, "at-zero"),
            Direction::AtInfinity => write!(f, "at-infinity"),
        }
    }
}

/// Variation regime of a tail at the targeted end, which determines the
/// limiting law of each ratio statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Regularly varying with index `-alpha`.
    RegVar { alpha: f64 },
    /// Slowly varying.
    SlowVar,
    /// Rapidly varying (index −∞).
    Rapid,
    /// The dominated-tail condition `x Λ̄(x) / ∫_0^x u Λ(du) → 0`.
    CondIii,
}

/// Finite atomic tail shared by the step-measure and table families.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTail {
    /// Atom positions, strictly increasing.
    positions: Vec<f64>,
    /// Atom masses, strictly positive.
    masses: Vec<f64>,
    /// `level[j] = Σ_{i≥j} masses[i]`; `level[n] = 0`. This is the value of
    /// the tail just below `positions[j]`.
    level: Vec<f64>,
}

impl StepTail {
    fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("step measure needs at least one atom".into()));
        }
        let mut prev = 0.0;
        for (i, &(x, m)) in atoms.iter().enumerate() {
            if !x.is_finite() || !m.is_finite() {
                return Err(Error::Domain(format!("atom {i} is not finite")));
            }
            if x <= prev {
                return Err(Error::Domain(format!(
                    "atom positions must be strictly increasing and positive; \
                     atom {i} at {x} follows {prev}"
                )));
            }
            if m <= 0.0 {
                return Err(Error::Domain(format!("atom {i} has nonpositive mass {m}")));
            }
            prev = x;
        }
        let positions: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let masses: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let mut level = vec![0.0; positions.len() + 1];
        for j in (0..positions.len()).rev() {
            level[j] = level[j + 1] + masses[j];
        }
        Ok(StepTail {
            positions,
            masses,
            level,
        })
    }

    fn total(&self) -> f64 {
        self.level[0]
    }

    /// `Λ̄(x)`: total mass strictly above `x`.
    fn tail(&self, x: f64) -> f64 {
        // First atom index with position > x.
        let j = self.positions.partition_point(|&p| p <= x);
        self.level[j]
    }

    /// `φ(s) = sup{y : Λ̄(y) > s}`: the largest atom position whose level
    /// exceeds `s`, or 0.
    fn phi(&self, s: f64) -> f64 {
        // level is nonincreasing; find the last j with level[j] > s.
        let j = self.level.partition_point(|&l| l > s);
        if j == 0 {
            0.0
        } else {
            self.positions[j - 1]
        }
    }

    /// `∫_0^x Λ̄(y) dy` — piecewise-constant area.
    fn tail_area(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut left = 0.0;
        for (j, &p) in self.positions.iter().enumerate() {
            let right = p.min(x);
            if right <= left {
                break;
            }
            acc += self.level[j] * (right - left);
            left = right;
        }
        acc
    }

    fn min_integral(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.masses)
            .map(|(&x, &m)| x.min(1.0) * m)
            .sum()
    }

    fn lower_moment(&self, x: f64) -> f64 {
        self.positions
            .iter()
            .zip(&self.masses)
            .take_while(|(&p, _)| p <= x)
            .map(|(&p, &m)| p * m)
            .sum()
    }
}

/// The built-in tail families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Stable { alpha: f64, c: f64 },
    GammaSub { rate: f64 },
    LogCorrected { p: f64 },
    RapidAtZero,
    Steps(StepTail),
}

/// A tail function together with the limit direction an experiment targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel {
    family: Family,
    direction: Direction,
}

// ===== constructors =====

impl TailModel {
    /// `Λ̄(x) = c x^{-α}`, `α ∈ (0, 1)`, `c > 0`.
    pub fn stable(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "stable index must lie in (0,1), got {alpha}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("stable scale must be positive, got {c}")));
        }
        Ok(Self::of(Family::Stable { alpha, c }))
    }

    /// `Λ̄(x) = E₁(b x)`, the gamma-subordinator tail, `b > 0`.
    pub fn gamma_sub(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("gamma rate must be positive, got {rate}")));
        }
        Ok(Self::of(Family::GammaSub { rate }))
    }

    /// `Λ̄(x) = x^{-1} (ln 1/x)^{-p}` on `(0, e^{-p-1}]`, `p > 1`, continued
    /// by the constant `h₀ = Λ̄(e^{-p-1})` up to 1 and by `h₀ e^{-(x-1)}`
    /// beyond, so the tail is continuous, nonincreasing, and integrable.
    pub fn log_corrected(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!(
                "log-corrected exponent must exceed 1, got {p}"
            )));
        }
        Ok(Self::of(Family::LogCorrected { p }))
    }

    /// `Π̄(x) = e^{1/x} − 1`: rapidly varying at zero; not a Lévy measure.
    pub fn rapid_at_zero() -> Self {
        Self::of(Family::RapidAtZero)
    }

    /// Finite atomic measure with the given `(position, mass)` atoms.
    pub fn step_measure(atoms: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::of(Family::Steps(StepTail::new(atoms)?)))
    }

    /// Right-continuous step tail through the given `(x, Λ̄(x))` samples:
    /// the tail equals `v_i` on `[x_i, x_{i+1})` and `v_1` below `x_1`.
    /// The last value must be 0 (append a final `(X, 0)` row to say "no mass
    /// beyond X"); otherwise the tail never vanishes and the measure would
    /// carry jumps of infinite size.
    pub fn from_table(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Table(
                "need at least two rows (one tail level and its endpoint)".into(),
            ));
        }
        let mut prev_x = 0.0;
        let mut prev_v = f64::INFINITY;
        for (i, &(x, v)) in pairs.iter().enumerate() {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::Table(format!("row {i} is not finite")));
            }
            if x <= prev_x {
                return Err(Error::Table(format!(
                    "x must be strictly increasing and positive; row {i} has x={x} after {prev_x}"
                )));
            }
            if v < 0.0 {
                return Err(Error::Table(format!("row {i} has negative tail value {v}")));
            }
            if v > prev_v {
                return Err(Error::Table(format!(
                    "tail values must be nonincreasing; row {i} has {v} after {prev_v}"
                )));
            }
            prev_x = x;
            prev_v = v;
        }
        let last = pairs[pairs.len() - 1].1;
        if last != 0.0 {
            return Err(Error::Table(format!(
                "last tail value must be 0 so the tail vanishes at infinity, got {last}"
            )));
        }
        // Drops of the step function are the atoms.
        let mut atoms = Vec::new();
        for i in 1..pairs.len() {
            let drop = pairs[i - 1].1 - pairs[i].1;
            if drop > 0.0 {
                atoms.push((pairs[i].0, drop));
            }
        }
        if atoms.is_empty() {
            return Err(Error::Table("table defines an empty measure".into()));
        }
        Ok(Self::of(Family::Steps(StepTail::new(&atoms)?)))
    }

    fn of(family: Family) -> Self {
        TailModel {
            family,
            direction: Direction::AtZero,
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }
}

// ===== basic accessors =====

impl TailModel {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Stable { .. } => "stable",
            Family::GammaSub { .. } => "gamma",
            Family::LogCorrected { .. } => "logcorr",
            Family::RapidAtZero => "rapid0",
            Family::Steps(_) => "steps",
        }
    }

    /// Canonical model-grammar form of this model.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Stable { alpha, c } => format!("stable(alpha={alpha},c={c})"),
            Family::GammaSub { rate } => format!("gamma(rate={rate})"),
            Family::LogCorrected { p } => format!("logcorr(p={p})"),
            Family::RapidAtZero => "rapid0".to_string(),
            Family::Steps(st) => {
                let atoms: Vec<String> = st
                    .positions
                    .iter()
                    .zip(&st.masses)
                    .map(|(x, m)| format!("{x}:{m}"))
                    .collect();
                format!("steps({})", atoms.join(","))
            }
        }
    }

    /// Whether the small-jump integral `∫ min{1,x} Λ(dx)` converges, i.e.
    /// whether the model is the Lévy measure of a driftless subordinator.
    pub fn is_levy(&self) -> bool {
        !matches!(self.family, Family::RapidAtZero)
    }

    /// `Λ̄(0+)`, possibly infinite.
    pub fn tail_at_zero(&self) -> f64 {
        match &self.family {
            Family::Steps(st) => st.total(),
            _ => f64::INFINITY,
        }
    }

    /// Total mass for finite measures, `None` for infinite ones.
    pub fn total_mass(&self) -> Option<f64> {
        match &self.family {
            Family::Steps(st) => Some(st.total()),
            _ => None,
        }
    }

    /// `e^{-p-1}`: right end of the power piece of the log-corrected tail.
    fn logcorr_x0(p: f64) -> f64 {
        (-p - 1.0).exp()
    }

    /// `h₀ = Λ̄(x₀) = e^{p+1} (p+1)^{-p}`.
    fn logcorr_h0(p: f64) -> f64 {
        (p + 1.0 - p * (p + 1.0).ln()).exp()
    }
}

// ===== the tail and its inverse =====

impl TailModel {
    /// `Λ̄(x)` for `x > 0`. May be `+∞` (extended-real convention).
    pub fn tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("tail requires x > 0, got {x}")));
        }
        Ok(self.tail_pos(x))
    }

    pub(crate) fn tail_pos(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match &self.family {
            Family::Stable { alpha, c } => c * x.powf(-alpha),
            Family::GammaSub { rate } => exp_integral_e1(rate * x),
            Family::LogCorrected { p } => {
                let x0 = Self::logcorr_x0(*p);
                let h0 = Self::logcorr_h0(*p);
                if x <= x0 {
                    let ell = (1.0 / x).ln();
                    // x^{-1} L^{-p} = exp(L - p ln L); overflows to +∞ for
                    // astronomically small x, which is the honest answer.
                    (ell - p * ell.ln()).exp()
                } else if x <= 1.0 {
                    h0
                } else {
                    h0 * (-(x - 1.0)).exp()
                }
            }
            Family::RapidAtZero => (1.0 / x).exp_m1(),
            Family::Steps(st) => st.tail(x),
        }
    }

    /// `φ(s) = sup{y : Λ̄(y) > s}` for `s > 0` (`φ(0+)` may be infinite,
    /// which is why `s = 0` is rejected).
    pub fn tail_inverse(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!(
                "tail_inverse requires s > 0, got {s}"
            )));
        }
        Ok(self.phi(s))
    }

    pub(crate) fn phi(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0);
        match &self.family {
            Family::Stable { alpha, c } => ((c / s).ln() / alpha).exp(),
            Family::GammaSub { rate } => invert_e1(s) / rate,
            Family::LogCorrected { p } => {
                let h0 = Self::logcorr_h0(*p);
                if s < h0 {
                    1.0 + (h0 / s).ln()
                } else {
                    // Solve L - p ln L = ln s on [p+1, ∞), then x = e^{-L}.
                    (-logcorr_solve_ell(*p, s)).exp()
                }
            }
            Family::RapidAtZero => 1.0 / s.ln_1p(),
            Family::Steps(st) => st.phi(s),
        }
    }

    /// `ln φ(s)` evaluated without underflow; `-∞` where `φ(s) = 0`.
    ///
    /// The exact-law integrals only ever need φ through ratios
    /// `φ(x)/φ(u) = exp(ln φ(x) − ln φ(u))`, which stay representable even
    /// when each factor underflows f64 on its own (gamma marks beyond ~744).
    pub(crate) fn ln_phi(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0);
        match &self.family {
            Family::Stable { alpha, c } => (c / s).ln() / alpha,
            Family::GammaSub { rate } => invert_e1_ln(s) - rate.ln(),
            Family::LogCorrected { p } => {
                let h0 = Self::logcorr_h0(*p);
                if s < h0 {
                    (1.0 + (h0 / s).ln()).ln()
                } else {
                    -logcorr_solve_ell(*p, s)
                }
            }
            Family::RapidAtZero => -s.ln_1p().ln(),
            Family::Steps(st) => {
                let x = st.phi(s);
                if x == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x.ln()
                }
            }
        }
    }

    /// `Λ̄(e^{ln_y})` evaluated without forming `e^{ln_y}` where that would
    /// underflow. May return `+∞` (the exact-law integrands then vanish).
    pub(crate) fn tail_ln_arg(&self, ln_y: f64) -> f64 {
        if ln_y == f64::NEG_INFINITY {
            return self.tail_at_zero();
        }
        match &self.family {
            Family::Stable { alpha, c } => c * (-alpha * ln_y).exp(),
            Family::GammaSub { rate } => {
                let ln_z = rate.ln() + ln_y;
                if ln_z < -36.0 {
                    // E₁(z) = -γ - ln z + O(z); the O(z) term is below 1e-15.
                    -EULER_GAMMA - ln_z
                } else {
                    exp_integral_e1(ln_z.exp())
                }
            }
            Family::LogCorrected { p } => {
                if ln_y <= -p - 1.0 {
                    let ell = -ln_y;
                    (ell - p * ell.ln()).exp()
                } else {
                    self.tail_pos(ln_y.exp())
                }
            }
            Family::RapidAtZero => (-ln_y).exp().exp_m1(),
            Family::Steps(st) => st.tail(ln_y.exp()),
        }
    }
}

/// Solve `E₁(z) = s` for `z > 0` by safeguarded Newton iteration on `ln z`.
///
/// Returns 0 when the solution underflows f64 (`s` ≳ 744).
fn invert_e1(s: f64) -> f64 {
    debug_assert!(s > 0.0);
    if s >= 744.0 {
        return 0.0;
    }
    // Bracket in log space; E₁(e^t) is strictly decreasing in t.
    let mut t_lo = -744.0; // E₁ ≈ 743.8 here
    let mut t_hi = 6.7; // E₁(812) < 5e-324
    let mut t = if s > 2.5 {
        -EULER_GAMMA - s // E₁(z) ≈ -γ - ln z for small z
    } else if s < 0.05 {
        // E₁(z) ≈ e^{-z}/z for large z: z ≈ w - ln w, w = -ln s.
        let w = -s.ln();
        (w - w.ln()).ln()
    } else {
        -1.0
    };
    t = t.clamp(t_lo + 1e-9, t_hi - 1e-9);
    for _ in 0..80 {
        let z = t.exp();
        let scaled = exp_integral_e1_scaled(z); // e^z E₁(z)
        let ln_e1 = scaled.ln() - z;
        let resid = ln_e1 - s.ln();
        if resid > 0.0 {
            t_lo = t; // E₁ too big → z too small
        } else {
            t_hi = t;
        }
        // d/dt ln E₁(e^t) = z·E₁'(z)/E₁(z) = -e^{-z}/E₁(z) = -1/(e^z E₁(z))
        let step = resid * scaled;
        let mut t_next = t + step;
        if !(t_next > t_lo && t_next < t_hi) {
            t_next = 0.5 * (t_lo + t_hi);
        }
        if (t_next - t).abs() <= 1e-14 * t.abs().max(1.0) {
            t = t_next;
            break;
        }
        t = t_next;
    }
    t.exp()
}

/// `ln E₁^{-1}(s)` without underflow: for `s ≥ 50` the expansion
/// `E₁(z) = -γ - ln z + O(z)` is exact to machine precision at the root, so
/// `ln z = -γ - s` directly; otherwise the root itself is representable.
fn invert_e1_ln(s: f64) -> f64 {
    debug_assert!(s > 0.0);
    if s >= 50.0 {
        -EULER_GAMMA - s
    } else {
        invert_e1(s).ln()
    }
}

/// Solve `L - p ln L = ln s` for `L ≥ p + 1` (the log-corrected power piece).
fn logcorr_solve_ell(p: f64, s: f64) -> f64 {
    let target = s.ln();
    let f = |l: f64| l - p * l.ln() - target;
    let mut lo = p + 1.0;
    debug_assert!(f(lo) <= 1e-9 * (1.0 + target.abs()));
    // Expand an upper bracket.
    let mut hi = (p + 2.0).max(2.0 * target.abs() + 2.0 * p + 2.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut l = lo.max(target + p * lo.ln().max(1.0)).min(hi);
    for _ in 0..60 {
        let fl = f(l);
        if fl > 0.0 {
            hi = l;
        } else {
            lo = l;
        }
        let deriv = 1.0 - p / l;
        let mut next = if deriv > 0.0 { l - fl / deriv } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - l).abs() <= 1e-14 * l {
            return next;
        }
        l = next;
    }
    l
}

// ===== integral functionals =====

impl TailModel {
    /// `∫ min{1, x} Λ(dx) = ∫_0^1 Λ̄(u) du`, possibly `+∞`.
    pub fn min_integral(&self) -> f64 {
        match &self.family {
            Family::Stable { alpha, c } => c / (1.0 - alpha),
            Family::GammaSub { rate } => {
                exp_integral_e1(*rate) + (1.0 - (-rate).exp()) / rate
            }
            Family::LogCorrected { p } => {
                let x0 = Self::logcorr_x0(*p);
                let h0 = Self::logcorr_h0(*p);
                // Power piece: ∫_{p+1}^∞ L^{-p} dL = (p+1)^{1-p}/(p-1).
                (p + 1.0).powf(1.0 - p) / (p - 1.0) + h0 * (1.0 - x0) + h0
            }
            Family::RapidAtZero => f64::INFINITY,
            Family::Steps(st) => st.min_integral(),
        }
    }

    /// `∫_0^x Λ̄(y) dy` in closed form (finite whenever the model is Lévy).
    fn tail_area(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match &self.family {
            Family::Stable { alpha, c } => c * x.powf(1.0 - alpha) / (1.0 - alpha),
            Family::GammaSub { rate } => {
                // ∫_0^z E₁ = z E₁(z) - e^{-z} + 1 at z = b x, scaled by 1/b.
                let z = rate * x;
                (z * exp_integral_e1(z) - (-z).exp() + 1.0) / rate
            }
            Family::LogCorrected { p } => {
                let x0 = Self::logcorr_x0(*p);
                let h0 = Self::logcorr_h0(*p);
                let power_all = (p + 1.0).powf(1.0 - p) / (p - 1.0);
                if x <= x0 {
                    // ∫_{L(x)}^∞ l^{-p} dl
                    (1.0 / x).ln().powf(1.0 - p) / (p - 1.0)
                } else if x <= 1.0 {
                    power_all + h0 * (x - x0)
                } else {
                    power_all + h0 * (1.0 - x0) + h0 * (1.0 - (-(x - 1.0)).exp())
                }
            }
            Family::RapidAtZero => f64::INFINITY,
            Family::Steps(st) => st.tail_area(x),
        }
    }

    /// `x·Λ̄(x)` computed without intermediate overflow.
    fn x_times_tail(&self, x: f64) -> f64 {
        match &self.family {
            Family::Stable { alpha, c } => c * x.powf(1.0 - alpha),
            Family::LogCorrected { p } => {
                let x0 = Self::logcorr_x0(*p);
                if x <= x0 {
                    let ell = (1.0 / x).ln();
                    (-p * ell.ln()).exp()
                } else {
                    x * self.tail_pos(x)
                }
            }
            _ => x * self.tail_pos(x),
        }
    }

    /// `∫_0^x u Λ(du)`, possibly `+∞` (non-Lévy small-jump divergence).
    ///
    /// Evaluated as `∫_0^x Λ̄(y) dy − x Λ̄(x)` through the closed-form areas.
    pub fn lower_moment_integral(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "lower_moment_integral requires x > 0, got {x}"
            )));
        }
        if !self.is_levy() {
            return Ok(f64::INFINITY);
        }
        if let Family::Steps(st) = &self.family {
            return Ok(st.lower_moment(x)); // exact finite sum, no cancellation
        }
        Ok((self.tail_area(x) - self.x_times_tail(x)).max(0.0))
    }

    /// The dominated-tail diagnostic `x Λ̄(x) / ∫_0^x u Λ(du)`.
    ///
    /// → 0 characterizes the regime where the trimmed sum grows without
    /// bound relative to the largest jump; a positive limit or divergence
    /// rules it out.
    pub fn condition_iii_ratio(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "condition_iii_ratio requires x > 0, got {x}"
            )));
        }
        let denom = self.lower_moment_integral(x)?;
        if denom.is_infinite() {
            return Ok(0.0);
        }
        if denom <= 0.0 {
            return Err(Error::Domain(format!(
                "condition_iii_ratio is undefined at x={x}: no mass in (0, x]"
            )));
        }
        Ok(self.x_times_tail(x) / denom)
    }

    /// `∫_u^∞ φ(s) ds` for `u > 0` — the expected total value of the jumps
    /// whose arrival marks exceed `u` (per unit time horizon).
    ///
    /// Uses the layer-cake identity `∫_u^∞ φ(s) ds = ∫_0^{φ(u)} (Λ̄(y) − u) dy`,
    /// which the closed-form areas above make exact for every family.
    pub fn tail_phi_integral(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::Domain(format!(
                "tail_phi_integral requires u > 0, got {u}"
            )));
        }
        if !self.is_levy() {
            return Err(Error::Unsupported(
                "tail_phi_integral diverges: the small-jump integral of this model is infinite"
                    .into(),
            ));
        }
        if let Family::GammaSub { rate } = &self.family {
            // Exact: with z = rate·φ(u) and u = Λ̄(φ(u)), the layer cake
            // collapses to (1 − e^{−z})/rate, free of cancellation.
            let z = rate * self.phi(u);
            return Ok(-(-z).exp_m1() / rate);
        }
        let x = self.phi(u);
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok((self.tail_area(x) - u * x).max(0.0))
    }

    /// `ln ∫_u^∞ φ(s) ds`, evaluated without underflow for the families
    /// whose `φ` sinks below f64 range (the exponential-type tails); `-∞`
    /// where the integral is genuinely zero. Elsewhere it is the log of
    /// [`TailModel::tail_phi_integral`].
    pub(crate) fn ln_tail_phi_integral(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::Domain(format!(
                "tail_phi_integral requires u > 0, got {u}"
            )));
        }
        match &self.family {
            Family::Stable { alpha, c: _ } => {
                // ∫_u^∞ φ = φ(u)·u·α/(1−α) exactly.
                Ok(self.ln_phi(u) + u.ln() + (alpha / (1.0 - alpha)).ln())
            }
            Family::GammaSub { rate } => {
                let ln_z = rate.ln() + self.ln_phi(u);
                if ln_z < -37.0 {
                    // (1 − e^{−z})/rate = φ(u)·(1 − z/2 + …); the correction
                    // is below f64 resolution here.
                    Ok(self.ln_phi(u))
                } else {
                    Ok((-(-ln_z.exp()).exp_m1()).ln() - rate.ln())
                }
            }
            _ => Ok(self.tail_phi_integral(u)?.ln()),
        }
    }

    /// Limit regime of this tail at the model's direction, per theorem.
    /// `None` means no regime is known (finite atomic tails, or a non-Lévy
    /// model asked about the trimmed-sum statistic).
    pub fn regime(&self, theorem: Theorem) -> Option<Regime> {
        use Direction::*;
        use Family::*;
        match (&self.family, self.direction, theorem) {
            (Stable { alpha, .. }, _, _) => Some(Regime::RegVar { alpha: *alpha }),

            (GammaSub { .. }, AtZero, _) => Some(Regime::SlowVar),
            // E₁ decays like e^{-bx}/bx at infinity: rapid variation, and the
            // dominated-tail condition holds for the trimmed statistic.
            (GammaSub { .. }, AtInfinity, Theorem::TrimmedSum) => Some(Regime::CondIii),
            (GammaSub { .. }, AtInfinity, Theorem::ConsecutiveJumps) => Some(Regime::Rapid),

            (LogCorrected { .. }, AtZero, Theorem::TrimmedSum) => Some(Regime::CondIii),
            // x^{-1}·(slowly varying): index -1 under the consecutive-jump law.
            (LogCorrected { .. }, AtZero, Theorem::ConsecutiveJumps) => {
                Some(Regime::RegVar { alpha: 1.0 })
            }
            (LogCorrected { .. }, AtInfinity, Theorem::TrimmedSum) => Some(Regime::CondIii),
            (LogCorrected { .. }, AtInfinity, Theorem::ConsecutiveJumps) => Some(Regime::Rapid),

            // Not a Lévy measure: the trimmed-sum statistic does not exist.
            (RapidAtZero, _, Theorem::TrimmedSum) => None,
            (RapidAtZero, AtZero, Theorem::ConsecutiveJumps) => Some(Regime::Rapid),
            // e^{1/x} - 1 ~ 1/x at infinity.
            (RapidAtZero, AtInfinity, Theorem::ConsecutiveJumps) => {
                Some(Regime::RegVar { alpha: 1.0 })
            }

            (Steps(_), _, _) => None,
        }
    }
}

// ===== tests =====
