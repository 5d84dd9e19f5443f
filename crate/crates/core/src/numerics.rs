//! Special functions used by the tests and the Watson model.
//!
//! Every routine here is a pure function of its arguments. Power series share
//! one stopping rule: summation ends once three consecutive terms each
//! contribute less than `SERIES_EPS` relative to the running sum, and fails
//! after `SERIES_TERM_CAP` terms.

use crate::error::{domain, Error, Result};

const SERIES_EPS: f64 = 1e-16;
const SERIES_TERM_CAP: usize = 10_000;
const SERIES_QUIET_RUN: usize = 3;

/// Largest |x| accepted by [`kummer_m`] and [`bessel_i0`].
pub const MAX_SERIES_ARGUMENT: f64 = 500.0;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// A chi-squared reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChiSquared {
    df: u32,
}

impl ChiSquared {
    pub fn new(df: u32) -> Result<Self> {
        if df == 0 {
            return Err(domain("chi-squared degrees of freedom must be at least 1"));
        }
        Ok(Self { df })
    }

    pub fn df(&self) -> u32 {
        self.df
    }

    /// Upper tail probability `P(X > x)`.
    pub fn sf(&self, x: f64) -> Result<f64> {
        chi2_sf(x, self.df)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - chi2_sf(x, self.df)?)
    }
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires a finite x > 0, got {x}")));
    }
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x keeps the Lanczos sum in its accurate range.
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// Survival function of the chi-squared distribution, `P(X > x)`.
///
/// Evaluated as the regularized upper incomplete gamma function `Q(df/2, x/2)`:
/// the lower-gamma series when `x <= df`, a Lentz continued fraction otherwise.
pub fn chi2_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(domain("chi-squared degrees of freedom must be at least 1"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("chi2_sf requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let a = f64::from(df) / 2.0;
    let y = x / 2.0;
    let q = if x <= f64::from(df) {
        1.0 - lower_gamma_series(a, y)?
    } else {
        upper_gamma_continued_fraction(a, y)?
    };
    Ok(q.clamp(0.0, 1.0))
}

/// Regularized lower incomplete gamma `P(a, y)` by its power series.
fn lower_gamma_series(a: f64, y: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut quiet = 0;
    for k in 1..SERIES_TERM_CAP {
        term *= y / (a + k as f64);
        sum += term;
        if term.abs() < sum.abs() * SERIES_EPS {
            quiet += 1;
            if quiet == SERIES_QUIET_RUN {
                let log_prefactor = -y + a * y.ln() - ln_gamma(a)?;
                return Ok(sum * log_prefactor.exp());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged {
        routine: "lower incomplete gamma series",
        limit: SERIES_TERM_CAP,
    })
}

/// Regularized upper incomplete gamma `Q(a, y)` by modified Lentz.
fn upper_gamma_continued_fraction(a: f64, y: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = y + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut quiet = 0;
    for i in 1..SERIES_TERM_CAP {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < SERIES_EPS * 4.0 {
            quiet += 1;
            if quiet == SERIES_QUIET_RUN {
                let log_prefactor = -y + a * y.ln() - ln_gamma(a)?;
                return Ok(h * log_prefactor.exp());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged {
        routine: "upper incomplete gamma continued fraction",
        limit: SERIES_TERM_CAP,
    })
}

fn check_kummer_args(b: f64, x: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain(format!("kummer_m requires b > 0, got {b}")));
    }
    if !x.is_finite() || x.abs() > MAX_SERIES_ARGUMENT {
        return Err(domain(format!(
            "kummer_m argument {x} outside supported range [-{MAX_SERIES_ARGUMENT}, {MAX_SERIES_ARGUMENT}]"
        )));
    }
    Ok(())
}

/// Sums `M(a, b, x)` and its term-wise derivative together.
fn kummer_series_with_derivative(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    let mut term = 1.0;
    let mut sum = 1.0;
    // Derivative series: d/dx of c_{k+1} x^{k+1} = (k + 1) c_{k+1} x^k.
    let mut dterm = a / b;
    let mut dsum = dterm;
    let mut quiet = 0;
    for k in 0..SERIES_TERM_CAP {
        let kf = k as f64;
        term *= (a + kf) * x / ((b + kf) * (kf + 1.0));
        sum += term;
        dterm *= (a + kf + 1.0) * x / ((b + kf + 1.0) * (kf + 1.0));
        dsum += dterm;
        let small = term.abs() <= sum.abs() * SERIES_EPS;
        let dsmall = dterm.abs() <= dsum.abs() * SERIES_EPS;
        if small && dsmall {
            quiet += 1;
            if quiet == SERIES_QUIET_RUN {
                return Ok((sum, dsum));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged {
        routine: "Kummer series",
        limit: SERIES_TERM_CAP,
    })
}

/// Kummer's confluent hypergeometric function `M(a, b, x)`.
///
/// Negative arguments go through the Kummer transform
/// `M(a, b, x) = e^x M(b - a, b, -x)` so the summed series never alternates.
pub fn kummer_m(a: f64, b: f64, x: f64) -> Result<f64> {
    check_kummer_args(b, x)?;
    if x >= 0.0 {
        Ok(kummer_series_with_derivative(a, b, x)?.0)
    } else {
        Ok(x.exp() * kummer_series_with_derivative(b - a, b, -x)?.0)
    }
}

/// `ln M(a, b, x)`; avoids underflow of the `e^x` factor for large negative `x`.
pub fn ln_kummer_m(a: f64, b: f64, x: f64) -> Result<f64> {
    check_kummer_args(b, x)?;
    let (value, shift) = if x >= 0.0 {
        (kummer_series_with_derivative(a, b, x)?.0, 0.0)
    } else {
        (kummer_series_with_derivative(b - a, b, -x)?.0, x)
    };
    if !(value > 0.0) {
        return Err(domain(format!("M({a}, {b}, {x}) is not positive")));
    }
    Ok(shift + value.ln())
}

/// `d/dx ln M(a, b, x)` from the term-wise differentiated series.
pub fn kummer_log_derivative(a: f64, b: f64, x: f64) -> Result<f64> {
    check_kummer_args(b, x)?;
    if x >= 0.0 {
        let (m, dm) = kummer_series_with_derivative(a, b, x)?;
        Ok(dm / m)
    } else {
        // ln M(a, b, x) = x + ln M(b - a, b, -x)
        let (m, dm) = kummer_series_with_derivative(b - a, b, -x)?;
        Ok(1.0 - dm / m)
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > MAX_SERIES_ARGUMENT {
        return Err(domain(format!(
            "bessel_i0 argument {x} outside supported range [-{MAX_SERIES_ARGUMENT}, {MAX_SERIES_ARGUMENT}]"
        )));
    }
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for k in 1..SERIES_TERM_CAP {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term <= sum * SERIES_EPS {
            quiet += 1;
            if quiet == SERIES_QUIET_RUN {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged {
        routine: "Bessel I0 series",
        limit: SERIES_TERM_CAP,
    })
}
