//! Survival functions used to calibrate the tests.
//!
//! Both functions are self-contained: beyond `exp`/`ln`/`sqrt`/`powf` they do
//! not delegate to any platform or third-party special-function code, so
//! results are identical everywhere the crate builds.
//!
//! - [`chisq1_sf`] evaluates the χ²₁ upper tail as `erfc(sqrt(x/2))`, with
//!   `erfc` computed by a series for small arguments and a Lentz continued
//!   fraction for large ones.
//! - [`f_sf`] evaluates the F(d1, d2) upper tail through the regularized
//!   incomplete beta function, continued fraction with the standard symmetry
//!   switch at `x = (a+1)/(a+b+2)`.

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PValue(f64);

impl PValue {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidConfig(format!(
                "p-value {value} outside [0, 1]"
            )));
        }
        Ok(PValue(value))
    }

    /// Clamp rounding spill from numeric evaluation back into `[0, 1]`.
    fn from_computed(value: f64) -> Self {
        PValue(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Survival function of the χ² distribution with one degree of freedom:
/// `P(X > x) = erfc(sqrt(x/2))`.
pub fn chisq1_sf(x: f64) -> Result<PValue> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "chi-square statistic must be finite and >= 0, got {x}"
        )));
    }
    Ok(PValue::from_computed(erfc((x / 2.0).sqrt())))
}

/// Survival function of the F(d1, d2) distribution:
/// `P(F > x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2)`.
pub fn f_sf(x: f64, d1: u64, d2: u64) -> Result<PValue> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidConfig(
            "F degrees of freedom must be >= 1".into(),
        ));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "F statistic must be finite and >= 0, got {x}"
        )));
    }
    let a = d2 as f64 / 2.0;
    let b = d1 as f64 / 2.0;
    let t = d2 as f64 / (d2 as f64 + d1 as f64 * x);
    Ok(PValue::from_computed(inc_beta_reg(a, b, t)))
}

/// Complementary error function, accurate to a few ulp over the real line.
///
/// `|x| < 2.5`: non-alternating Taylor series for `erf`
/// (`erf(x) = 2x e^{-x^2}/sqrt(pi) * sum_k (2x^2)^k / (1*3*...*(2k+1))`).
/// `|x| >= 2.5`: Lentz evaluation of the classical continued fraction
/// `erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;
    if x < 2.5 {
        if x == 0.0 {
            return 1.0;
        }
        let x2 = 2.0 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0u32;
        loop {
            k += 1;
            term *= x2 / (2 * k + 1) as f64;
            sum += term;
            if term < sum * 1e-17 || k > 200 {
                break;
            }
        }
        let erf = 2.0 * x * (-x * x).exp() * INV_SQRT_PI * sum;
        1.0 - erf
    } else {
        // Modified Lentz on the CF with partial numerators n/2, n = 1, 2, ...
        const TINY: f64 = 1e-300;
        let mut c = x;
        let mut d = 0.0;
        let mut h = x;
        for n in 1..200 {
            let an = n as f64 / 2.0;
            d = x + an * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = x + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() * INV_SQRT_PI / h
    }
}

/// Lanczos approximation of `ln Γ(z)` for `z > 0` (g = 7, 9 terms).
#[allow(clippy::excessive_precision)] // published coefficient table
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > 0.0);
    let mut acc = 0.999_999_999_999_809_93;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + i as f64);
    }
    let t = z + 6.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z - 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function `I_t(a, b)`.
fn inc_beta_reg(a: f64, b: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let ln_prefactor =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * t.ln() + b * (1.0 - t).ln();
    let prefactor = ln_prefactor.exp();
    if t < (a + 1.0) / (a + b + 2.0) {
        prefactor * beta_cf(a, b, t) / a
    } else {
        1.0 - prefactor * beta_cf(b, a, 1.0 - t) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
