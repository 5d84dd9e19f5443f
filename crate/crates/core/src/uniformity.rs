//! Rayleigh and Bingham tests of uniformity on S^{d-1}, plus a seeded Monte
//! Carlo harness for calibrating them under the uniform null.
//!
//! All p-values use the asymptotic chi-squared reference regardless of `n`;
//! [`TestResult::n`] is carried so callers can judge whether the sample is
//! large enough for that approximation.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numerics::chi2_sf;
use crate::rng::{stream_rng, uniform_on_sphere};
use crate::sphere::{moment_summary, SampleSet, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestMethod {
    Rayleigh,
    ModifiedRayleigh,
    Bingham,
}

impl TestMethod {
    pub const ALL: [TestMethod; 3] = [TestMethod::Rayleigh, TestMethod::ModifiedRayleigh, TestMethod::Bingham];

    /// Degrees of freedom of the asymptotic reference in dimension `d`.
    pub fn df(self, d: usize) -> u32 {
        match self {
            TestMethod::Rayleigh | TestMethod::ModifiedRayleigh => d as u32,
            TestMethod::Bingham => ((d - 1) * (d + 2) / 2) as u32,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestMethod::Rayleigh => "rayleigh",
            TestMethod::ModifiedRayleigh => "modified-rayleigh",
            TestMethod::Bingham => "bingham",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub n: usize,
}

impl TestResult {
    /// Whether uniformity is rejected at significance `level`.
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn finish(method: TestMethod, statistic: f64, d: usize, n: usize) -> TestResult {
    let df = method.df(d);
    // df >= 1 and statistic >= 0 here, so the tail cannot fail.
    let p_value = chi2_sf(statistic, df).expect("valid chi-squared arguments");
    TestResult {
        method,
        statistic,
        df,
        p_value,
        n,
    }
}

fn rayleigh_core(sample: &SampleSet) -> (f64, f64, f64) {
    let d = sample.dim() as f64;
    let n = sample.len() as f64;
    let r2 = moment_summary(sample).mean.iter().map(|m| m * m).sum::<f64>();
    (d, n, r2)
}

/// `d n r̄²`, asymptotically χ²_d under uniformity.
pub fn rayleigh_test(sample: &SampleSet) -> TestResult {
    let (d, n, r2) = rayleigh_core(sample);
    finish(TestMethod::Rayleigh, d * n * r2, sample.dim(), sample.len())
}

/// Rayleigh statistic with the second-order correction, χ²_d with O(n⁻²) error.
pub fn modified_rayleigh_test(sample: &SampleSet) -> TestResult {
    let (d, n, r2) = rayleigh_core(sample);
    let plain = d * n * r2;
    let statistic = (1.0 - 1.0 / (2.0 * n)) * plain + plain * plain / (2.0 * n * (d + 2.0));
    finish(TestMethod::ModifiedRayleigh, statistic, sample.dim(), sample.len())
}

/// `(d(d+2)/2) n (tr(T²) - 1/d)` with `T` the scatter matrix.
pub fn bingham_test(sample: &SampleSet) -> TestResult {
    let d = sample.dim();
    let df = d as f64;
    let scatter = moment_summary(sample).scatter;
    let excess = scatter.frobenius_norm_sq() - 1.0 / df;
    // tr(T²) >= 1/d holds exactly; rounding can dip a hair below.
    let statistic = (0.5 * df * (df + 2.0) * sample.len() as f64 * excess).max(0.0);
    finish(TestMethod::Bingham, statistic, d, sample.len())
}

pub fn run_test(method: TestMethod, sample: &SampleSet) -> TestResult {
    match method {
        TestMethod::Rayleigh => rayleigh_test(sample),
        TestMethod::ModifiedRayleigh => modified_rayleigh_test(sample),
        TestMethod::Bingham => bingham_test(sample),
    }
}

/// `n` uniform points on S^{d-1} drawn from stream `index` of `seed`.
pub fn uniform_sample(n: usize, d: usize, seed: u64, index: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut rng = stream_rng(seed, index);
    SampleSet::new(
        (0..n)
            .map(|_| UnitVector::new(uniform_on_sphere(&mut rng, d)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Test statistics of `trials` independent uniform samples of size `n`.
///
/// Trial `t` draws from stream `t` of `seed`; the output is ordered by trial
/// index and does not depend on the number of worker threads.
pub fn monte_carlo_null(n: usize, d: usize, trials: usize, method: TestMethod, seed: u64) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| uniform_sample(n, d, seed, t as u64).map(|s| run_test(method, &s).statistic))
        .collect()
}
