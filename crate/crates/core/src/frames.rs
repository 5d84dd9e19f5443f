//! Finite and probabilistic frames on the sphere.
//!
//! Covers optimal frame bounds, finite unit norm tight frames (FNTFs), the
//! frame / Riesz-2 / fractional potentials of a discrete measure, the
//! pairwise directional force, and a descent routine that tightens a spanning
//! set of unit vectors toward directional equilibrium.
//!
//! The O(n²) double sums are evaluated row by row (each row summed serially
//! in index order) and the rows are combined by [`pairwise_sum`], whose
//! splitting is fixed. Rows may be computed on any number of threads without
//! changing a single bit of the result.

use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::stream_rng;
use crate::sphere::{dot, l2_norm, measure_moments, moment_deviation, DiscreteMeasure, UnitVector};

/// Riesz potentials below this make the fractional potential undefined.
pub const RIESZ_FLOOR: f64 = 1e-14;

/// Below this total tangential force a non-tight configuration is treated as
/// a saddle and nudged.
const SADDLE_FORCE: f64 = 1e-14;
const SADDLE_NUDGE: f64 = 1e-8;
const SADDLE_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    /// A frame needs a positive lower bound (the vectors span).
    pub fn is_frame(&self) -> bool {
        self.lower > 0.0
    }

    /// `B - A <= 1e-10 max(1, B)`.
    pub fn is_tight(&self) -> bool {
        self.upper - self.lower <= 1e-10 * self.upper.max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialReport {
    pub frame_potential: f64,
    pub riesz_potential: f64,
    /// Absent for (near) point masses.
    pub fractional: Option<f64>,
    pub moment_deviation: f64,
}

/// Sum with a fixed recursive halving topology (blocks of at most 8 summed
/// left to right).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

fn common_dim(vectors: &[UnitVector]) -> Result<usize> {
    let d = vectors
        .first()
        .ok_or_else(|| invalid("at least one vector is required"))?
        .dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    Ok(d)
}

/// `S = Σ x_i x_iᵀ`.
pub fn frame_operator(vectors: &[UnitVector]) -> Result<SymMatrix> {
    let d = common_dim(vectors)?;
    let mut s = SymMatrix::zeros(d);
    for v in vectors {
        s.add_outer(v.coords(), 1.0);
    }
    Ok(s)
}

/// Optimal frame bounds: the extreme eigenvalues of the frame operator.
pub fn frame_bounds(vectors: &[UnitVector]) -> Result<FrameBounds> {
    let eig = frame_operator(vectors)?.eigenvalues();
    Ok(FrameBounds {
        lower: eig[0].max(0.0),
        upper: *eig.last().expect("nonempty spectrum"),
    })
}

/// `‖S/n - I/d‖_F <= tol`.
pub fn is_fntf(vectors: &[UnitVector], tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let d = common_dim(vectors)?;
    let scatter = frame_operator(vectors)?.scaled(1.0 / vectors.len() as f64);
    let dev = scatter
        .sub(&SymMatrix::identity(d).scaled(1.0 / d as f64))
        .frobenius_norm();
    Ok(dev <= tol)
}

/// Angles `kπ/n`, `k = 0..n`, of the harmonic FNTF for R².
pub fn harmonic_angles(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain("a tight frame for R² needs at least two vectors"));
    }
    Ok((0..n).map(|k| k as f64 * PI / n as f64).collect())
}

/// `n` directions equally spaced on the half circle; a FNTF for R².
pub fn harmonic_fntf_r2(n: usize) -> Result<Vec<UnitVector>> {
    Ok(harmonic_angles(n)?.into_iter().map(UnitVector::from_angle).collect())
}

/// `|Σ e^{2iα_k}|`; zero exactly for FNTFs of R².
pub fn fntf_defect_r2(angles: &[f64]) -> Result<f64> {
    if angles.is_empty() {
        return Err(invalid("at least one angle is required"));
    }
    let (re, im) = angles.iter().fold((0.0, 0.0), |(re, im), a| {
        let (s, c) = (2.0 * a).sin_cos();
        (re + c, im + s)
    });
    Ok(f64::hypot(re, im))
}

fn double_sum(mu: &DiscreteMeasure, kernel: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> f64 {
    let atoms = mu.atoms();
    let rows: Vec<f64> = atoms
        .par_iter()
        .map(|(xi, wi)| {
            let row: f64 = atoms.iter().map(|(xj, wj)| wj * kernel(xi.coords(), xj.coords())).sum();
            wi * row
        })
        .collect();
    pairwise_sum(&rows)
}

/// `Σ_ij w_i w_j ⟨x_i, x_j⟩²`.
pub fn frame_potential(mu: &DiscreteMeasure) -> f64 {
    double_sum(mu, |a, b| dot(a, b).powi(2))
}

/// `Σ_ij w_i w_j ‖x_i - x_j‖²`.
pub fn riesz_potential(mu: &DiscreteMeasure) -> f64 {
    double_sum(mu, |a, b| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum())
}

/// Frame potential divided by Riesz-2 potential; undefined for point masses.
pub fn fractional_potential(mu: &DiscreteMeasure) -> Result<f64> {
    let riesz = riesz_potential(mu);
    if riesz < RIESZ_FLOOR {
        return Err(domain(format!(
            "fractional potential undefined: Riesz potential {riesz} is zero (point mass)"
        )));
    }
    Ok(frame_potential(mu) / riesz)
}

pub fn potential_report(mu: &DiscreteMeasure) -> PotentialReport {
    let frame_potential = frame_potential(mu);
    let riesz_potential = riesz_potential(mu);
    PotentialReport {
        frame_potential,
        riesz_potential,
        fractional: (riesz_potential >= RIESZ_FLOOR).then(|| frame_potential / riesz_potential),
        moment_deviation: moment_deviation(mu),
    }
}

/// `F(a, b) = 2|⟨a, b⟩|(a - b)`.
pub fn directional_force(a: &UnitVector, b: &UnitVector) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let s = 2.0 * a.dot(b).abs();
    Ok(a.coords().iter().zip(b.coords()).map(|(x, y)| s * (x - y)).collect())
}

/// Gradient of the physical potential `Σ_ij ⟨x_i, x_j⟩²` at each vector,
/// projected onto the tangent space of the sphere there.
pub fn tangential_gradients(vectors: &[UnitVector]) -> Result<Vec<Vec<f64>>> {
    let s = frame_operator(vectors)?;
    Ok(vectors
        .iter()
        .map(|v| {
            let x = v.coords();
            let sx = s.mul_vec(x);
            let radial = dot(x, &sx);
            sx.iter().zip(x).map(|(a, b)| 4.0 * (a - radial * b)).collect()
        })
        .collect())
}

/// Norm of the tangential force on each vector.
pub fn tangential_residuals(vectors: &[UnitVector]) -> Result<Vec<f64>> {
    Ok(tangential_gradients(vectors)?.iter().map(|g| l2_norm(g)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightenOptions {
    pub max_steps: usize,
    /// Initial (and largest) step along the negative physical-potential gradient.
    pub step_size: f64,
    /// Stop once the frame potential is within this of `1/d`.
    pub tol: f64,
    /// Seeds the nudges applied at saddle points.
    pub seed: u64,
}

impl TightenOptions {
    /// Defaults scaled to `n` vectors: the physical-potential gradient grows
    /// linearly in `n`, so the step shrinks as `1/n`.
    pub fn for_count(n: usize) -> Self {
        Self {
            max_steps: 10_000,
            step_size: 0.25 / n.max(1) as f64,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightenOutcome {
    pub vectors: Vec<UnitVector>,
    /// Frame potential of the counting measure: the start value, then one
    /// entry per accepted step. Nonincreasing.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
    pub saddle_nudges: usize,
}

/// Frame potential of the counting measure via the scatter matrix, `‖S/n‖_F²`.
fn counting_potential(vectors: &[Vec<f64>], d: usize) -> f64 {
    let mut s = SymMatrix::zeros(d);
    let w = 1.0 / vectors.len() as f64;
    for v in vectors {
        s.add_outer(v, w);
    }
    s.frobenius_norm_sq()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = l2_norm(&v);
    v.iter_mut().for_each(|c| *c /= n);
    v
}

/// Projected gradient descent of the frame potential on (S^{d-1})^n with a
/// halving line search, so every accepted step leaves the potential no larger.
pub fn gradient_tighten(vectors: &[UnitVector], opts: TightenOptions) -> Result<TightenOutcome> {
    if !(opts.step_size > 0.0) || !opts.step_size.is_finite() {
        return Err(invalid("step size must be positive"));
    }
    if !(opts.tol >= 0.0) {
        return Err(invalid("tolerance must be nonnegative"));
    }
    let d = common_dim(vectors)?;
    let bounds = frame_bounds(vectors)?;
    if bounds.lower <= 1e-10 * bounds.upper {
        return Err(domain("input vectors do not span R^d"));
    }
    let target = 1.0 / d as f64;
    let mut xs: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    let mut potential = counting_potential(&xs, d);
    let mut trace = vec![potential];
    let mut eta = opts.step_size;
    let mut steps = 0;
    let mut nudges = 0;
    let mut converged = potential - target <= opts.tol;

    while !converged && steps < opts.max_steps {
        let current: Vec<UnitVector> = xs.iter().cloned().map(UnitVector::from_unit_unchecked).collect();
        let grads = tangential_gradients(&current)?;
        let force: f64 = grads.iter().map(|g| dot(g, g)).sum::<f64>().sqrt();
        let reference = *trace.last().expect("trace starts nonempty");
        if force < SADDLE_FORCE {
            // Keep the first nudge that does not raise the potential.
            let mut escaped = None;
            for _ in 0..SADDLE_ATTEMPTS {
                let mut rng = stream_rng(opts.seed, nudges as u64);
                nudges += 1;
                let candidate: Vec<Vec<f64>> = xs
                    .iter()
                    .map(|x| {
                        normalize(
                            x.iter()
                                .map(|c| c + SADDLE_NUDGE * rng.sample::<f64, _>(StandardNormal))
                                .collect(),
                        )
                    })
                    .collect();
                let p = counting_potential(&candidate, d);
                if p <= reference {
                    escaped = Some((candidate, p));
                    break;
                }
            }
            let Some((next, p)) = escaped else {
                log::warn!("frame tightening stuck at a critical point after {nudges} nudges");
                break;
            };
            log::debug!("frame tightening nudged a saddle configuration ({nudges})");
            xs = next;
            potential = p;
            trace.push(p);
            steps += 1;
            converged = potential - target <= opts.tol;
            continue;
        }
        let mut accepted = None;
        while eta >= opts.step_size * 1e-30 {
            let candidate: Vec<Vec<f64>> = xs
                .iter()
                .zip(&grads)
                .map(|(x, g)| normalize(x.iter().zip(g).map(|(a, b)| a - eta * b).collect()))
                .collect();
            let p = counting_potential(&candidate, d);
            if p <= reference {
                accepted = Some((candidate, p));
                break;
            }
            eta *= 0.5;
        }
        let Some((next, p)) = accepted else {
            log::warn!("frame tightening stalled after {steps} steps: line search exhausted");
            break;
        };
        xs = next;
        potential = p;
        trace.push(p);
        steps += 1;
        eta = (eta * 2.0).min(opts.step_size);
        converged = potential - target <= opts.tol;
    }

    Ok(TightenOutcome {
        vectors: xs.into_iter().map(UnitVector::from_unit_unchecked).collect(),
        trace,
        converged,
        steps,
        saddle_nudges: nudges,
    })
}

/// `PFP(μ) = ‖M(μ)‖_F²` computed from the second-moment matrix in O(n d²).
pub fn frame_potential_from_moments(mu: &DiscreteMeasure) -> f64 {
    measure_moments(mu).scatter.frobenius_norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::uniform_on_sphere;

    fn v(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    fn equal(points: Vec<UnitVector>) -> DiscreteMeasure {
        let w = 1.0 / points.len() as f64;
        DiscreteMeasure::new(points.into_iter().map(|p| (p, w)).collect()).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let b = frame_bounds(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(b.is_tight() && b.is_frame());
        let b = frame_bounds(&[v(&[1.0, 0.0])]).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
        assert!(!b.is_frame());
        let b = frame_bounds(&harmonic_fntf_r2(3).unwrap()).unwrap();
        assert!((b.lower - 1.5).abs() < 1e-12 && (b.upper - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fntf_checks() {
        assert!(is_fntf(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 1e-12).unwrap());
        assert!(!is_fntf(&[v(&[1.0, 0.0]), v(&[1.0, 0.0])], 1e-12).unwrap());
        assert!(is_fntf(&harmonic_fntf_r2(5).unwrap(), 1e-12).unwrap());
        assert!(is_fntf(&[v(&[1.0, 0.0])], 0.0).is_err());
    }

    #[test]
    fn harmonic_frames() {
        let two = harmonic_fntf_r2(2).unwrap();
        assert_eq!(two[0].coords(), &[1.0, 0.0]);
        assert!(two[1].coords()[0].abs() < 1e-16 && two[1].coords()[1] == 1.0);
        let three = harmonic_angles(3).unwrap();
        assert!((three[1] - PI / 3.0).abs() < 1e-15 && (three[2] - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(fntf_defect_r2(&harmonic_angles(4).unwrap()).unwrap() < 1e-15);
        assert!(harmonic_fntf_r2(1).is_err());
    }

    #[test]
    fn defect_examples() {
        assert!(fntf_defect_r2(&[0.0, PI / 2.0]).unwrap() < 1e-15);
        assert!((fntf_defect_r2(&[0.0, PI / 4.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(fntf_defect_r2(&[0.0, PI / 3.0, 2.0 * PI / 3.0]).unwrap() < 1e-15);
        assert!(fntf_defect_r2(&[]).is_err());
    }

    #[test]
    fn potential_examples() {
        let point = equal(vec![v(&[1.0, 0.0])]);
        assert_eq!(frame_potential(&point), 1.0);
        assert_eq!(riesz_potential(&point), 0.0);
        assert!(fractional_potential(&point).is_err());
        assert!(potential_report(&point).fractional.is_none());

        let basis = equal(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);
        assert_eq!(frame_potential(&basis), 0.5);
        assert!((riesz_potential(&basis) - 1.0).abs() < 1e-15);

        let antipodes = equal(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])]);
        assert_eq!(frame_potential(&antipodes), 1.0);
        assert_eq!(riesz_potential(&antipodes), 2.0);
        assert_eq!(fractional_potential(&antipodes).unwrap(), 0.5);

        let tri = equal(harmonic_fntf_r2(3).unwrap());
        assert!((frame_potential(&tri) - 0.5).abs() < 1e-15);
        // Three directions on the half circle do not have zero mean; use ±.
        let mut six = harmonic_fntf_r2(3).unwrap();
        six.extend(harmonic_fntf_r2(3).unwrap().iter().map(|p| p.antipode()));
        let six = equal(six);
        assert!((fractional_potential(&six).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn force_examples() {
        let e1 = v(&[1.0, 0.0]);
        assert_eq!(directional_force(&e1, &e1).unwrap(), vec![0.0, 0.0]);
        assert_eq!(directional_force(&e1, &v(&[0.0, 1.0])).unwrap(), vec![0.0, 0.0]);
        let h = 0.5f64.sqrt();
        let f = directional_force(&e1, &v(&[h, h])).unwrap();
        assert!((f[0] - 0.414_213_6).abs() < 1e-7 && (f[1] + 1.0).abs() < 1e-12);
        assert!(directional_force(&e1, &v(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn pairwise_sum_fixed_topology() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let serial: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - serial).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn tighten_fixed_point() {
        let basis = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let out = gradient_tighten(&basis, TightenOptions::for_count(2)).unwrap();
        assert_eq!(out.vectors, basis);
        assert_eq!(out.trace, vec![0.5]);
        assert!(out.converged);
        assert!(tangential_residuals(&basis).unwrap().iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn tighten_pair_to_orthogonal() {
        let start = vec![UnitVector::from_angle(0.0), UnitVector::from_angle(0.1)];
        let opts = TightenOptions {
            tol: 1e-14,
            ..TightenOptions::for_count(2)
        };
        let out = gradient_tighten(&start, opts).unwrap();
        assert!(out.converged);
        let angles: Vec<f64> = out.vectors.iter().map(|p| p.angle()).collect();
        assert!(fntf_defect_r2(&angles).unwrap() < 1e-6);
    }

    #[test]
    fn tighten_random_r3() {
        let mut rng = stream_rng(11, 0);
        let start: Vec<UnitVector> = (0..7).map(|_| v(&uniform_on_sphere(&mut rng, 3))).collect();
        let opts = TightenOptions {
            tol: 1e-9,
            ..TightenOptions::for_count(7)
        };
        let out = gradient_tighten(&start, opts).unwrap();
        assert!(out.converged);
        let pfp = frame_potential(&equal(out.vectors.clone()));
        assert!((pfp - 1.0 / 3.0).abs() < 1e-8);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tighten_escapes_saddle() {
        // {e1, e1, e2} is a critical point of the frame potential that is not tight.
        let start = vec![v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        assert!(tangential_residuals(&start).unwrap().iter().all(|r| *r == 0.0));
        let opts = TightenOptions {
            tol: 1e-10,
            max_steps: 100_000,
            ..TightenOptions::for_count(3)
        };
        let out = gradient_tighten(&start, opts).unwrap();
        assert!(out.saddle_nudges >= 1);
        assert!(out.converged);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tighten_rejects_non_spanning() {
        let start = vec![v(&[1.0, 0.0]), v(&[1.0, 0.0])];
        assert!(matches!(
            gradient_tighten(&start, TightenOptions::for_count(2)),
            Err(Error::Domain(_))
        ));
    }
}
