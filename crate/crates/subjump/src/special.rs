//! Scalar special functions used by the tail families and exact laws.
//!
//! Only what the crate actually needs: the exponential integral E₁, the log
//! Gamma function, factorials, and the regularized lower incomplete gamma at
//! integer shape (equivalently, Poisson tail probabilities). All routines
//! target full double precision on their used domains.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = ∫_x^∞ e^{-u}/u du` for `x > 0`.
///
/// Power series around zero for `x ≤ 1`, modified-Lentz continued fraction
/// for `x > 1`; both converge to ~1e-16 relative on their ranges.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires a positive argument, got {x}");
    if x <= 1.0 {
        // E1(x) = -γ - ln x + Σ_{n≥1} (-1)^{n+1} x^n / (n · n!)
        let mut sum = 0.0;
        let mut term = 1.0; // x^n / n! carried iteratively
        for n in 1..=60 {
            term *= x / n as f64;
            let contrib = term / n as f64;
            if n % 2 == 1 {
                sum += contrib;
            } else {
                sum -= contrib;
            }
            if contrib < 1e-18 * (1.0 + sum.abs()) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else if x > 745.0 {
        // e^{-x} underflows; the true value is below the smallest subnormal.
        0.0
    } else {
        e1_continued_fraction(x) * (-x).exp()
    }
}

/// The scaled exponential integral `e^x · E1(x)`, which stays representable
/// for every positive `x` (it behaves like `1/x` at infinity).
pub fn exp_integral_e1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires a positive argument, got {x}");
    if x <= 1.0 {
        exp_integral_e1(x) * x.exp()
    } else {
        e1_continued_fraction(x)
    }
}

/// `e^x E1(x) = 1 / (x + 1 - 1²/(x + 3 - 2²/(x + 5 - …)))` via modified
/// Lentz; accurate for `x ≳ 1`.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=200u32 {
        let a = -((i as f64) * (i as f64));
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Natural log of the Gamma function for `z > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(z: f64) -> f64 {
    assert!(z > 0.0, "ln_gamma requires a positive argument, got {z}");
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = z - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `k!` as a float: exact table through 20!, `exp(ln_gamma)` beyond.
pub fn factorial(k: usize) -> f64 {
    const EXACT: [f64; 21] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
        6227020800.0,
        87178291200.0,
        1307674368000.0,
        20922789888000.0,
        355687428096000.0,
        6402373705728000.0,
        121645100408832000.0,
        2432902008176640000.0,
    ];
    if k <= 20 {
        EXACT[k]
    } else {
        ln_gamma(k as f64 + 1.0).exp()
    }
}

/// Regularized lower incomplete gamma `P(k, x) = P{Gamma(k,1) ≤ x}` for
/// integer shape `k ≥ 1`, i.e. `1 - Σ_{j<k} e^{-x} x^j / j!`.
///
/// The complement is accumulated from Poisson weights, each of which is ≤ 1,
/// so the sum is stable for any `x ≥ 0`.
pub fn gamma_p_int(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "integer gamma shape must be >= 1");
    assert!(x >= 0.0, "gamma_p_int requires x >= 0, got {x}");
    let mut weight = (-x).exp(); // e^{-x} x^j / j! at j = 0
    let mut tail = weight;
    for j in 1..k {
        weight *= x / j as f64;
        tail += weight;
    }
    (1.0 - tail).clamp(0.0, 1.0)
}
