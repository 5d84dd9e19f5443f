//! Watson axial distributions on S^{d-1} and their mixtures.
//!
//! Densities are taken with respect to surface measure:
//!
//! ```text
//! f(x) = c_d(κ) exp(κ ⟨z, x⟩²),   c_d(κ) = Γ(d/2) / (2 π^{d/2} M(1/2, d/2, κ))
//! ```
//!
//! which integrates to one over the sphere. `κ > 0` concentrates mass near
//! `±z` (bipolar), `κ < 0` near the great circle orthogonal to `z` (girdle).
//!
//! The concentration enters most derived quantities through the moment
//! function `m(κ) = E⟨z, x⟩² = d/dκ ln M(1/2, d/2, κ)`, which increases from 0
//! to 1 and equals `1/d` at `κ = 0`.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{domain, invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::numerics::{kummer_log_derivative, ln_gamma, ln_kummer_m, MAX_SERIES_ARGUMENT};
use crate::quadrature::{gauss_legendre, periodic_trapezoid};
use crate::rng::{stream_rng, uniform_on_sphere, StreamRng};
use crate::sphere::{dot, SampleSet, UnitVector};

/// Largest |κ| supported (the Kummer series range).
pub const MAX_CONCENTRATION: f64 = MAX_SERIES_ARGUMENT;

#[derive(Debug, Clone, PartialEq)]
pub struct WatsonParams {
    director: UnitVector,
    concentration: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(domain(format!(
            "Watson concentration must be finite and nonzero, got {kappa}"
        )));
    }
    if kappa.abs() > MAX_CONCENTRATION {
        return Err(domain(format!(
            "Watson concentration {kappa} exceeds the supported range ±{MAX_CONCENTRATION}"
        )));
    }
    Ok(())
}

impl WatsonParams {
    pub fn new(director: UnitVector, concentration: f64) -> Result<Self> {
        check_kappa(concentration)?;
        Ok(Self {
            director,
            concentration,
        })
    }

    pub fn director(&self) -> &UnitVector {
        &self.director
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn dim(&self) -> usize {
        self.director.dim()
    }
}

/// `ln c_d(κ)`; `κ = 0` is allowed and gives the uniform density.
pub fn ln_watson_normalizer(kappa: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(d));
    }
    let half_d = d as f64 / 2.0;
    Ok(ln_gamma(half_d)? - 2f64.ln() - half_d * PI.ln() - ln_kummer_m(0.5, half_d, kappa)?)
}

pub fn watson_normalizer(kappa: f64, d: usize) -> Result<f64> {
    Ok(ln_watson_normalizer(kappa, d)?.exp())
}

/// `m(κ) = E⟨z, x⟩²` under Watson(z, κ) on S^{d-1}.
pub fn watson_moment(kappa: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(d));
    }
    kummer_log_derivative(0.5, d as f64 / 2.0, kappa)
}

pub fn watson_log_density(x: &UnitVector, params: &WatsonParams) -> Result<f64> {
    if x.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: x.dim(),
        });
    }
    let t = x.dot(&params.director);
    Ok(ln_watson_normalizer(params.concentration, params.dim())? + params.concentration * t * t)
}

/// Result of inverting the moment function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationEstimate {
    pub kappa: f64,
    /// The root lay beyond ±[`MAX_CONCENTRATION`] and was clamped.
    pub capped: bool,
}

/// Solves `m(κ) = target` for κ by bisection (m is strictly increasing).
pub fn concentration_for_moment(target: f64, d: usize) -> Result<ConcentrationEstimate> {
    if !(0.0..=1.0).contains(&target) {
        return Err(domain(format!("axial moment {target} outside [0, 1]")));
    }
    let hi_m = watson_moment(MAX_CONCENTRATION, d)?;
    if target >= hi_m {
        return Ok(ConcentrationEstimate {
            kappa: MAX_CONCENTRATION,
            capped: target > hi_m,
        });
    }
    let lo_m = watson_moment(-MAX_CONCENTRATION, d)?;
    if target <= lo_m {
        return Ok(ConcentrationEstimate {
            kappa: -MAX_CONCENTRATION,
            capped: target < lo_m,
        });
    }
    let (mut lo, mut hi) = (-MAX_CONCENTRATION, MAX_CONCENTRATION);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if watson_moment(mid, d)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(lo.abs()).max(1e-3) {
            break;
        }
    }
    Ok(ConcentrationEstimate {
        kappa: 0.5 * (lo + hi),
        capped: false,
    })
}

fn check_sampling_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// One Watson draw by rejection from the uniform proposal with envelope
/// `exp(max(κ, 0))`.
fn draw_watson(rng: &mut StreamRng, director: &[f64], kappa: f64) -> Vec<f64> {
    let ceiling = kappa.max(0.0);
    loop {
        let x = uniform_on_sphere(rng, director.len());
        let t = dot(director, &x);
        let u: f64 = rng.random();
        if u.ln() < kappa * t * t - ceiling {
            return x;
        }
    }
}

fn collect_sample(points: Vec<Vec<f64>>) -> Result<SampleSet> {
    SampleSet::new(points.into_iter().map(UnitVector::from_unit_unchecked).collect())
}

/// `n` Watson draws; draw `k` uses stream `k` of `seed`.
pub fn sample_watson(params: &WatsonParams, n: usize, seed: u64) -> Result<SampleSet> {
    check_sampling_dim(params.dim())?;
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let z = params.director.coords();
    let kappa = params.concentration;
    collect_sample(
        (0..n as u64)
            .into_par_iter()
            .map(|k| draw_watson(&mut stream_rng(seed, k), z, kappa))
            .collect(),
    )
}

/// A finite mixture of Watson components on a common sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct WatsonMixture {
    directors: Vec<UnitVector>,
    kappas: Vec<f64>,
    weights: Vec<f64>,
    shared_kappa: bool,
}

impl WatsonMixture {
    /// Equal weights `1/N` and one shared concentration.
    pub fn equal_weights(directors: Vec<UnitVector>, kappa: f64) -> Result<Self> {
        let n = directors.len();
        let mut mix = Self::new(directors, vec![kappa; n], vec![1.0 / n.max(1) as f64; n])?;
        mix.shared_kappa = true;
        Ok(mix)
    }

    /// General mixture; weights must be nonnegative and sum to 1 within 1e-12.
    pub fn new(directors: Vec<UnitVector>, kappas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let first = directors
            .first()
            .ok_or_else(|| invalid("a mixture needs at least one component"))?;
        let d = first.dim();
        if let Some(z) = directors.iter().find(|z| z.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: z.dim(),
            });
        }
        if kappas.len() != directors.len() || weights.len() != directors.len() {
            return Err(invalid("one concentration and one weight per director are required"));
        }
        for &k in &kappas {
            check_kappa(k)?;
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("mixture weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        let shared_kappa = kappas.windows(2).all(|w| w[0] == w[1]);
        Ok(Self {
            directors,
            kappas,
            weights,
            shared_kappa,
        })
    }

    pub fn directors(&self) -> &[UnitVector] {
        &self.directors
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The common concentration, when all components share one.
    pub fn shared_kappa(&self) -> Option<f64> {
        self.shared_kappa.then_some(self.kappas[0])
    }

    pub fn len(&self) -> usize {
        self.directors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directors[0].dim()
    }

    pub fn component(&self, i: usize) -> WatsonParams {
        WatsonParams {
            director: self.directors[i].clone(),
            concentration: self.kappas[i],
        }
    }

    /// Per-component `ln w_i + ln c_d(κ_i)`.
    fn log_prefactors(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        self.kappas
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| Ok(w.ln() + ln_watson_normalizer(k, d)?))
            .collect()
    }

    /// Log mixture density with respect to surface measure.
    pub fn log_density(&self, x: &UnitVector) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let pre = self.log_prefactors()?;
        Ok(log_mixture_density(x.coords(), &self.directors, &self.kappas, &pre))
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_mixture_density(x: &[f64], directors: &[UnitVector], kappas: &[f64], pre: &[f64]) -> f64 {
    let terms: Vec<f64> = directors
        .iter()
        .zip(kappas)
        .zip(pre)
        .map(|((z, k), p)| {
            let t = dot(z.coords(), x);
            p + k * t * t
        })
        .collect();
    log_sum_exp(&terms)
}

/// `n` mixture draws. Draw `k` uses stream `k` of `seed`: it first picks a
/// component (skipped for a single component) and then samples it.
pub fn sample_mixture(mix: &WatsonMixture, n: usize, seed: u64) -> Result<SampleSet> {
    check_sampling_dim(mix.dim())?;
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let cumulative: Vec<f64> = mix
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let last = mix.len() - 1;
    collect_sample(
        (0..n as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, k);
                let i = if mix.len() == 1 {
                    0
                } else {
                    let u: f64 = rng.random::<f64>() * cumulative[last];
                    cumulative.iter().position(|&c| u < c).unwrap_or(last)
                };
                draw_watson(&mut rng, mix.directors[i].coords(), mix.kappas[i])
            })
            .collect(),
    )
}

/// Second-moment matrix `∫ x xᵀ dμ` of the mixture, by quadrature.
///
/// On the circle the full mixture density is integrated over the angle with
/// an adaptive periodic trapezoidal rule. On S² each component is integrated
/// in a frame whose polar axis is its director (Gauss–Legendre in the polar
/// cosine, trapezoidal in azimuth), refined until successive orders agree.
pub fn mixture_second_moments(mix: &WatsonMixture) -> Result<SymMatrix> {
    match mix.dim() {
        2 => circle_second_moments(mix),
        3 => sphere_second_moments(mix),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn circle_second_moments(mix: &WatsonMixture) -> Result<SymMatrix> {
    let pre = mix.log_prefactors()?;
    let out = periodic_trapezoid(
        |theta, o| {
            let (s, c) = theta.sin_cos();
            let f = log_mixture_density(&[c, s], &mix.directors, &mix.kappas, &pre).exp();
            o[0] = f * c * c;
            o[1] = f * c * s;
            o[2] = f * s * s;
        },
        3,
        1e-13,
    );
    Ok(SymMatrix::from_rows(&[&[out[0], out[1]], &[out[1], out[2]]]))
}

/// Two unit vectors completing `z` to an orthonormal basis of R³.
fn orthonormal_complement(z: &[f64]) -> ([f64; 3], [f64; 3]) {
    let pivot = if z[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let proj = dot(&pivot, z);
    let mut u = [pivot[0] - proj * z[0], pivot[1] - proj * z[1], pivot[2] - proj * z[2]];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|c| *c /= nu);
    let v = [
        z[1] * u[2] - z[2] * u[1],
        z[2] * u[0] - z[0] * u[2],
        z[0] * u[1] - z[1] * u[0],
    ];
    (u, v)
}

fn watson_s2_moments(z: &[f64], kappa: f64, order: usize, ln_c: f64) -> SymMatrix {
    const AZIMUTH_NODES: usize = 8;
    let (u, v) = orthonormal_complement(z);
    let (ts, ws) = gauss_legendre(order);
    let h = 2.0 * PI / AZIMUTH_NODES as f64;
    let mut m = SymMatrix::zeros(3);
    for (t, w) in ts.iter().zip(&ws) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        let density = (ln_c + kappa * t * t).exp();
        for k in 0..AZIMUTH_NODES {
            let (sp, cp) = (k as f64 * h).sin_cos();
            let x = [
                t * z[0] + s * (cp * u[0] + sp * v[0]),
                t * z[1] + s * (cp * u[1] + sp * v[1]),
                t * z[2] + s * (cp * u[2] + sp * v[2]),
            ];
            m.add_outer(&x, w * h * density);
        }
    }
    m
}

fn sphere_second_moments(mix: &WatsonMixture) -> Result<SymMatrix> {
    let mut total = SymMatrix::zeros(3);
    for ((z, &kappa), &weight) in mix.directors.iter().zip(&mix.kappas).zip(&mix.weights) {
        let ln_c = ln_watson_normalizer(kappa, 3)?;
        let mut order = 32;
        let mut prev = watson_s2_moments(z.coords(), kappa, order, ln_c);
        loop {
            order *= 2;
            let next = watson_s2_moments(z.coords(), kappa, order, ln_c);
            let done = next.max_abs_diff(&prev) <= 1e-13 || order >= 4096;
            prev = next;
            if done {
                break;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                total[(i, j)] += weight * prev[(i, j)];
            }
        }
    }
    Ok(total)
}

/// A directional mode and its angular width.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWidth {
    pub direction: UnitVector,
    pub kappa: f64,
    /// `arccos √m(κ)` in radians; absent for girdle components (κ <= 0).
    pub width: Option<f64>,
}

/// Modes and widths, one per component in component order.
pub fn mode_widths(mix: &WatsonMixture) -> Result<Vec<ModeWidth>> {
    let d = mix.dim();
    mix.directors
        .iter()
        .zip(&mix.kappas)
        .map(|(z, &kappa)| {
            let width = if kappa > 0.0 {
                Some(watson_moment(kappa, d)?.clamp(0.0, 1.0).sqrt().acos())
            } else {
                None
            };
            Ok(ModeWidth {
                direction: z.clone(),
                kappa,
                width,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::harmonic_fntf_r2;
    use crate::numerics::bessel_i0;
    use crate::sphere::moment_summary;

    fn e(d: usize, i: usize) -> UnitVector {
        UnitVector::basis(d, i).unwrap()
    }

    #[test]
    fn normalizer_values() {
        assert!((watson_normalizer(0.0, 2).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((watson_normalizer(0.0, 3).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let expected = 1.0 / (2.0 * PI * 0.5f64.exp() * bessel_i0(0.5).unwrap());
        assert!((watson_normalizer(1.0, 2).unwrap() - expected).abs() < 1e-14);
        assert!((watson_normalizer(1.0, 2).unwrap() - 0.090_770_0).abs() < 1e-7);
        assert!(watson_normalizer(600.0, 2).is_err());
    }

    #[test]
    fn log_density_examples() {
        let p = WatsonParams::new(e(2, 0), 3.0).unwrap();
        let ortho = e(2, 1);
        assert_eq!(
            watson_log_density(&ortho, &p).unwrap(),
            ln_watson_normalizer(3.0, 2).unwrap()
        );
        let x = UnitVector::from_angle(0.7);
        assert_eq!(
            watson_log_density(&x, &p).unwrap(),
            watson_log_density(&x.antipode(), &p).unwrap()
        );
        let p1 = WatsonParams::new(e(2, 0), 1.0).unwrap();
        let expected = -(2.0 * PI * 0.5f64.exp() * bessel_i0(0.5).unwrap()).ln() + 1.0;
        assert!((watson_log_density(&e(2, 0), &p1).unwrap() - expected).abs() < 1e-13);
        assert!(WatsonParams::new(e(2, 0), 0.0).is_err());
        assert!(watson_log_density(&e(3, 0), &p).is_err());
    }

    #[test]
    fn moment_function_limits() {
        assert!((watson_moment(0.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((watson_moment(0.0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(watson_moment(200.0, 2).unwrap() > 0.99);
        assert!(watson_moment(-50.0, 2).unwrap() < 0.02);
    }

    #[test]
    fn concentration_inverts_moment() {
        for &k in &[-40.0, -3.0, -0.01, 0.2, 5.0, 60.0] {
            for d in [2usize, 3] {
                let m = watson_moment(k, d).unwrap();
                let est = concentration_for_moment(m, d).unwrap();
                assert!(!est.capped);
                assert!((est.kappa - k).abs() < 1e-8 * k.abs().max(1.0), "k={k} d={d}");
            }
        }
        assert!(concentration_for_moment(1.0, 2).unwrap().capped);
        assert!(concentration_for_moment(1.5, 2).is_err());
    }

    #[test]
    fn sampler_concentration() {
        let p = WatsonParams::new(e(2, 0), 200.0).unwrap();
        let s = sample_watson(&p, 10_000, 3).unwrap();
        let m: f64 = s.points().iter().map(|x| x.coords()[0].powi(2)).sum::<f64>() / 1e4;
        assert!(m >= 0.99);
        let g = WatsonParams::new(e(2, 0), -50.0).unwrap();
        let s = sample_watson(&g, 10_000, 3).unwrap();
        let m: f64 = s.points().iter().map(|x| x.coords()[0].powi(2)).sum::<f64>() / 1e4;
        assert!(m <= 0.02);
    }

    #[test]
    fn sampler_second_moments_match_quadrature() {
        for d in [2usize, 3] {
            let z = UnitVector::new((0..d).map(|i| 1.0 + i as f64).collect()).unwrap();
            let mix = WatsonMixture::equal_weights(vec![z.clone()], 5.0).unwrap();
            let exact = mixture_second_moments(&mix).unwrap();
            let s = sample_watson(&mix.component(0), 100_000, 17).unwrap();
            let emp = moment_summary(&s).scatter;
            assert!(emp.sub(&exact).frobenius_norm() < 0.01, "d = {d}");
        }
    }

    #[test]
    fn sampler_dimension_guard() {
        let p = WatsonParams::new(e(4, 0), 1.0).unwrap();
        assert_eq!(sample_watson(&p, 5, 0).unwrap_err(), Error::UnsupportedDimension(4));
    }

    #[test]
    fn single_component_mixture_matches_watson_sampler() {
        let p = WatsonParams::new(UnitVector::from_angle(0.4), 7.0).unwrap();
        let mix = WatsonMixture::equal_weights(vec![p.director().clone()], 7.0).unwrap();
        assert_eq!(
            sample_watson(&p, 500, 99).unwrap(),
            sample_mixture(&mix, 500, 99).unwrap()
        );
    }

    #[test]
    fn harmonic_directors_give_tight_moments() {
        for kappa in [-5.0, 1.0, 10.0] {
            let mix = WatsonMixture::equal_weights(harmonic_fntf_r2(3).unwrap(), kappa).unwrap();
            let m = mixture_second_moments(&mix).unwrap();
            let half = SymMatrix::identity(2).scaled(0.5);
            assert!(m.max_abs_diff(&half) < 1e-8, "kappa = {kappa}");
        }
    }

    #[test]
    fn near_uniform_and_concentrated_moments() {
        for kappa in [1e-6, -1e-6] {
            let mix = WatsonMixture::equal_weights(vec![e(2, 0)], kappa).unwrap();
            let m = mixture_second_moments(&mix).unwrap();
            assert!(m.max_abs_diff(&SymMatrix::identity(2).scaled(0.5)) < 1e-5);
        }
        let mix = WatsonMixture::equal_weights(vec![e(2, 0)], 200.0).unwrap();
        assert!(mixture_second_moments(&mix).unwrap()[(0, 0)] >= 0.99);
    }

    #[test]
    fn s2_moments_match_moment_function() {
        for kappa in [-20.0, -1.0, 2.0, 30.0, 200.0] {
            let z = UnitVector::new(vec![0.3, -0.5, 0.8]).unwrap();
            let mix = WatsonMixture::equal_weights(vec![z.clone()], kappa).unwrap();
            let m = mixture_second_moments(&mix).unwrap();
            let mk = watson_moment(kappa, 3).unwrap();
            let zc = z.coords();
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let expected = mk * zc[i] * zc[j] + (1.0 - mk) / 2.0 * (delta - zc[i] * zc[j]);
                    assert!((m[(i, j)] - expected).abs() < 1e-9, "kappa={kappa}");
                }
            }
        }
    }

    #[test]
    fn widths() {
        let mix = WatsonMixture::new(
            vec![e(2, 0), e(2, 1), e(2, 0), e(2, 0)],
            vec![100.0, 400.0, 1e-6, -3.0],
            vec![0.25; 4],
        )
        .unwrap();
        let w = mode_widths(&mix).unwrap();
        assert!(w[1].width.unwrap() < w[0].width.unwrap());
        assert!((w[2].width.unwrap() - PI / 4.0).abs() < 1e-6);
        assert!(w[3].width.is_none());
        assert_eq!(w[1].direction, e(2, 1));
    }

    #[test]
    fn mixture_validation() {
        assert!(WatsonMixture::new(vec![], vec![], vec![]).is_err());
        assert!(WatsonMixture::new(vec![e(2, 0)], vec![1.0], vec![0.5]).is_err());
        assert!(WatsonMixture::new(vec![e(2, 0), e(3, 0)], vec![1.0; 2], vec![0.5; 2]).is_err());
        let shared = WatsonMixture::equal_weights(vec![e(2, 0), e(2, 1)], 2.0).unwrap();
        assert_eq!(shared.shared_kappa(), Some(2.0));
        let free = WatsonMixture::new(vec![e(2, 0), e(2, 1)], vec![1.0, 2.0], vec![0.5; 2]).unwrap();
        assert_eq!(free.shared_kappa(), None);
    }
}
