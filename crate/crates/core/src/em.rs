//! Expectation–maximization for planar Watson mixtures.
//!
//! Initialization doubles the angles (turning axial data into ordinary
//! circular data), seeds k-means on the doubled-angle circle, runs Lloyd
//! iterations there, and halves the cluster centers back into directors.
//!
//! On the circle a girdle component Watson(z, -κ) is the same distribution as
//! the bipolar Watson(z⊥, κ), so fits are reported with κ >= 0. The M-step is
//! then exact up to the κ root solve: the director is the leading eigenvector
//! of the responsibility-weighted scatter matrix and κ solves `m(κ) = λ_max`.
//! The log-likelihood cannot decrease apart from the `|κ| >= 1e-6` floor.

use rand::Rng;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::stream_rng;
use crate::sphere::{dot, SampleSet, UnitVector};
use crate::watson::{concentration_for_moment, ln_watson_normalizer, log_sum_exp, WatsonMixture};

/// Concentrations are kept at least this far from zero.
pub const KAPPA_FLOOR: f64 = 1e-6;

const LLOYD_ITERATIONS: usize = 25;
const EMPTY_CLUSTER_MASS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub components: usize,
    /// One κ for all components, as in the equal-weight mixture model.
    pub shared_kappa: bool,
    /// Hold the weights at `1/N` instead of re-estimating them.
    pub equal_weights: bool,
    pub max_iters: usize,
    /// Stop when the log-likelihood gain of an iteration falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl EmOptions {
    pub fn new(components: usize) -> Self {
        Self {
            components,
            shared_kappa: true,
            equal_weights: false,
            max_iters: 500,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub mixture: WatsonMixture,
    pub log_likelihood: f64,
    /// Log-likelihood of every parameter set visited, starting with the initial one.
    pub trace: Vec<f64>,
    /// Number of M-steps kept; `trace` has one more entry.
    pub iterations: usize,
    pub converged: bool,
    /// Components whose concentration hit the floor; their director is unidentifiable.
    pub near_uniform: Vec<bool>,
    /// Iterations (indices into `trace`) at which an empty component was reseeded.
    pub reinitialized_at: Vec<usize>,
    /// A κ root fell outside the supported range and was clamped.
    pub kappa_capped: bool,
}

#[derive(Clone)]
struct State {
    directors: Vec<[f64; 2]>,
    kappas: Vec<f64>,
    weights: Vec<f64>,
}

/// Fits an `N`-component Watson mixture to planar axial data.
pub fn fit_watson_mixture_em(sample: &SampleSet, opts: &EmOptions) -> Result<EmFit> {
    if sample.dim() != 2 {
        return Err(Error::UnsupportedDimension(sample.dim()));
    }
    let k = opts.components;
    if k == 0 {
        return Err(invalid("at least one mixture component is required"));
    }
    if sample.len() < 10 * k {
        return Err(invalid(format!(
            "{} points are too few for {k} components (need at least {})",
            sample.len(),
            10 * k
        )));
    }
    let xs: Vec<[f64; 2]> = sample.points().iter().map(|p| [p.coords()[0], p.coords()[1]]).collect();
    let n = xs.len();

    let mut kappa_capped = false;
    let mut state = initialize(&xs, opts, &mut kappa_capped)?;
    let mut near_uniform = vec![false; k];
    let mut trace = Vec::new();
    let mut reinitialized_at = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut log_resp = vec![vec![0.0; k]; n];
    let mut previous: Option<(State, Vec<bool>)> = None;
    let mut reseeded = false;

    loop {
        let (ll, point_ll) = e_step(&xs, &state, &mut log_resp)?;
        if let Some(&prev) = trace.last() {
            if ll < prev && !reseeded {
                // An exact M-step cannot lower the likelihood, so this is
                // summation noise at a fixed point: keep the better parameters.
                let (s, flags) = previous.take().expect("saved before the M-step");
                state = s;
                near_uniform = flags;
                iterations -= 1;
                converged = true;
                break;
            }
            trace.push(ll);
            if ll - prev < opts.tol {
                converged = true;
                break;
            }
        } else {
            trace.push(ll);
        }
        if iterations >= opts.max_iters {
            break;
        }
        previous = Some((state.clone(), near_uniform.clone()));
        reseeded = m_step(
            &xs,
            &log_resp,
            &point_ll,
            opts,
            &mut state,
            &mut near_uniform,
            &mut kappa_capped,
        )?;
        if reseeded {
            reinitialized_at.push(trace.len());
        }
        iterations += 1;
    }

    let directors = state
        .directors
        .iter()
        .map(|z| UnitVector::new(z.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mixture = WatsonMixture::new(directors, state.kappas, state.weights)?;
    Ok(EmFit {
        mixture,
        log_likelihood: *trace.last().expect("at least one E-step"),
        trace,
        iterations,
        converged,
        near_uniform,
        reinitialized_at,
        kappa_capped,
    })
}

fn doubled_angle(x: &[f64; 2]) -> f64 {
    (2.0 * x[1].atan2(x[0])).rem_euclid(2.0 * PI)
}

fn circular_distance(a: f64, b: f64) -> f64 {
    1.0 - (a - b).cos()
}

fn initialize(xs: &[[f64; 2]], opts: &EmOptions, capped: &mut bool) -> Result<State> {
    let k = opts.components;
    let phis: Vec<f64> = xs.iter().map(doubled_angle).collect();
    let mut rng = stream_rng(opts.seed, 0);

    // k-means++ seeding on the doubled-angle circle.
    let mut centers = vec![phis[rng.random_range(0..phis.len())]];
    while centers.len() < k {
        let dists: Vec<f64> = phis
            .iter()
            .map(|&p| {
                centers
                    .iter()
                    .map(|&c| circular_distance(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = dists.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = phis.len() - 1;
            for (i, d) in dists.iter().enumerate() {
                acc += d;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            phis[chosen]
        } else {
            phis[rng.random_range(0..phis.len())]
        };
        centers.push(next);
    }

    let mut labels = vec![0usize; phis.len()];
    for _ in 0..LLOYD_ITERATIONS {
        for (label, &p) in labels.iter_mut().zip(&phis) {
            *label = nearest(&centers, p);
        }
        let mut sums = vec![(0.0, 0.0); k];
        for (&label, &p) in labels.iter().zip(&phis) {
            sums[label].0 += p.cos();
            sums[label].1 += p.sin();
        }
        let mut moved = false;
        for (c, (sc, ss)) in centers.iter_mut().zip(&sums) {
            if sc * sc + ss * ss > 0.0 {
                let updated = ss.atan2(*sc).rem_euclid(2.0 * PI);
                moved |= updated != *c;
                *c = updated;
            }
        }
        if !moved {
            break;
        }
    }

    let directors: Vec<[f64; 2]> = centers
        .iter()
        .map(|c| {
            let (s, co) = (c / 2.0).sin_cos();
            [co, s]
        })
        .collect();
    let mut counts = vec![0usize; k];
    let mut moments = vec![0.0; k];
    for (x, &label) in xs.iter().zip(&labels) {
        counts[label] += 1;
        moments[label] += dot(x, &directors[label]).powi(2);
    }
    let mut kappas = Vec::with_capacity(k);
    for (m, &c) in moments.iter().zip(&counts) {
        let target = if c > 0 { m / c as f64 } else { 0.5 };
        let est = concentration_for_moment(target.clamp(0.5, 1.0), 2)?;
        *capped |= est.capped;
        kappas.push(floor_kappa(est.kappa).0);
    }
    if opts.shared_kappa {
        let total: usize = counts.iter().sum();
        let pooled: f64 = moments.iter().sum::<f64>() / total as f64;
        let est = concentration_for_moment(pooled.clamp(0.5, 1.0), 2)?;
        *capped |= est.capped;
        kappas = vec![floor_kappa(est.kappa).0; k];
    }
    let weights = if opts.equal_weights {
        vec![1.0 / k as f64; k]
    } else {
        let n = xs.len() as f64;
        let raw: Vec<f64> = counts.iter().map(|&c| (c as f64).max(1.0) / n).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    };
    Ok(State {
        directors,
        kappas,
        weights,
    })
}

fn nearest(centers: &[f64], p: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centers.iter().enumerate() {
        let d = circular_distance(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn floor_kappa(kappa: f64) -> (f64, bool) {
    if kappa.abs() < KAPPA_FLOOR {
        (if kappa < 0.0 { -KAPPA_FLOOR } else { KAPPA_FLOOR }, true)
    } else {
        (kappa, false)
    }
}

/// Fills log responsibilities; returns the total and per-point log-likelihood.
fn e_step(xs: &[[f64; 2]], state: &State, log_resp: &mut [Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let pre: Vec<f64> = state
        .kappas
        .iter()
        .zip(&state.weights)
        .map(|(&kappa, &w)| Ok(w.ln() + ln_watson_normalizer(kappa, 2)?))
        .collect::<Result<_>>()?;
    let mut point_ll = Vec::with_capacity(xs.len());
    for (x, row) in xs.iter().zip(log_resp.iter_mut()) {
        for (i, r) in row.iter_mut().enumerate() {
            let t = dot(x, &state.directors[i]);
            *r = pre[i] + state.kappas[i] * t * t;
        }
        let lse = log_sum_exp(row);
        row.iter_mut().for_each(|r| *r -= lse);
        point_ll.push(lse);
    }
    Ok((point_ll.iter().sum(), point_ll))
}

/// Concentration for a leading axial moment `t >= 1/2`.
fn bipolar_concentration(t: f64, capped: &mut bool) -> Result<f64> {
    let est = concentration_for_moment(t.clamp(0.5, 1.0), 2)?;
    *capped |= est.capped;
    Ok(est.kappa.max(0.0))
}

fn m_step(
    xs: &[[f64; 2]],
    log_resp: &[Vec<f64>],
    point_ll: &[f64],
    opts: &EmOptions,
    state: &mut State,
    near_uniform: &mut [bool],
    capped: &mut bool,
) -> Result<bool> {
    let k = opts.components;
    let n = xs.len() as f64;
    let mut mass = vec![0.0; k];
    let mut scatter = vec![SymMatrix::zeros(2); k];
    for (x, row) in xs.iter().zip(log_resp) {
        for i in 0..k {
            let r = row[i].exp();
            mass[i] += r;
            scatter[i].add_outer(x, r);
        }
    }

    let mut reseeded = false;
    let mut eig = Vec::with_capacity(k);
    for i in 0..k {
        if mass[i] < EMPTY_CLUSTER_MASS * n {
            // Reseed at the worst-explained datum.
            let worst = point_ll
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
                .expect("nonempty sample");
            log::warn!("EM component {i} lost all responsibility; reseeding at datum {worst}");
            state.directors[i] = xs[worst];
            state.weights[i] = 1.0 / k as f64;
            let total: f64 = state.weights.iter().sum();
            state.weights.iter_mut().for_each(|w| *w /= total);
            reseeded = true;
            eig.push(None);
            continue;
        }
        let s = scatter[i].scaled(1.0 / mass[i]);
        eig.push(Some(s.symmetric_eigen()));
    }
    if reseeded {
        return Ok(true);
    }
    let eig: Vec<_> = eig.into_iter().map(|e| e.expect("all components populated")).collect();

    if !opts.equal_weights {
        state.weights = mass.iter().map(|m| m / n).collect();
        let total: f64 = state.weights.iter().sum();
        state.weights.iter_mut().for_each(|w| *w /= total);
    }

    for (z, e) in state.directors.iter_mut().zip(&eig) {
        *z = [e.vectors[1][0], e.vectors[1][1]];
    }
    if opts.shared_kappa {
        let pooled = eig.iter().zip(&mass).map(|(e, m)| m * e.values[1]).sum::<f64>() / n;
        let (kappa, floored) = floor_kappa(bipolar_concentration(pooled, capped)?);
        state.kappas.iter_mut().for_each(|k| *k = kappa);
        near_uniform.iter_mut().for_each(|f| *f = floored);
    } else {
        for i in 0..k {
            let (kappa, floored) = floor_kappa(bipolar_concentration(eig[i].values[1], capped)?);
            state.kappas[i] = kappa;
            near_uniform[i] = floored;
        }
    }
    Ok(false)
}

/// Axial distance between two planar directions, in radians within [0, π/2].
pub fn axial_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Planar director angle reduced to [0, π).
pub fn axial_angle(z: &UnitVector) -> f64 {
    let a = z.angle().rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::watson::{sample_mixture, sample_watson, WatsonParams};

    #[test]
    fn recovers_single_watson() {
        let p = WatsonParams::new(UnitVector::basis(2, 0).unwrap(), 20.0).unwrap();
        let s = sample_watson(&p, 5000, 4).unwrap();
        let fit = fit_watson_mixture_em(&s, &EmOptions::new(1)).unwrap();
        let angle = axial_angle(&fit.mixture.directors()[0]);
        assert!(axial_distance(angle, 0.0).to_degrees() < 1.0);
        let kappa = fit.mixture.kappas()[0];
        assert!((kappa - 20.0).abs() / 20.0 < 0.10, "kappa = {kappa}");
        assert!(fit.converged);
    }

    #[test]
    fn recovers_three_directors() {
        let dirs: Vec<UnitVector> = [0.0f64, 60.0, 120.0]
            .iter()
            .map(|a| UnitVector::from_angle(a.to_radians()))
            .collect();
        let mix = WatsonMixture::equal_weights(dirs, 20.0).unwrap();
        let s = sample_mixture(&mix, 6000, 8).unwrap();
        let opts = EmOptions {
            equal_weights: true,
            seed: 8,
            ..EmOptions::new(3)
        };
        let fit = fit_watson_mixture_em(&s, &opts).unwrap();
        let found: Vec<f64> = fit.mixture.directors().iter().map(axial_angle).collect();
        for t in [0.0f64, 60.0, 120.0] {
            let best = found
                .iter()
                .map(|f| axial_distance(*f, t.to_radians()))
                .fold(f64::INFINITY, f64::min);
            assert!(best.to_degrees() < 2.0, "{found:?}");
        }
        assert!((fit.mixture.kappas()[0] - 20.0).abs() / 20.0 < 0.15);
        assert!(fit.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(fit.trace.len(), fit.iterations + 1);
    }

    #[test]
    fn symmetric_sample_is_flagged_degenerate() {
        let s = SampleSet::from_angles(&[0.0, PI / 2.0, PI, 1.5 * PI]).unwrap();
        let pts: Vec<UnitVector> = s.points().iter().cycle().take(40).cloned().collect();
        let s = SampleSet::new(pts).unwrap();
        let fit = fit_watson_mixture_em(&s, &EmOptions::new(1)).unwrap();
        assert!(fit.near_uniform[0]);
        assert!(fit.mixture.kappas()[0].abs() >= KAPPA_FLOOR);
        assert!(fit.mixture.kappas()[0].abs() < 1e-5);
    }

    #[test]
    fn preconditions() {
        let s = SampleSet::from_angles(&[0.0, 0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(matches!(
            fit_watson_mixture_em(&s, &EmOptions::new(3)),
            Err(Error::InvalidInput(_))
        ));
        let s3 = SampleSet::new(vec![UnitVector::basis(3, 0).unwrap(); 40]).unwrap();
        assert_eq!(
            fit_watson_mixture_em(&s3, &EmOptions::new(1)).unwrap_err(),
            Error::UnsupportedDimension(3)
        );
    }

    #[test]
    fn axial_helpers() {
        assert!((axial_distance(0.0, PI - 0.01) - 0.01).abs() < 1e-12);
        assert!((axial_angle(&UnitVector::from_angle(-0.3)) - (PI - 0.3)).abs() < 1e-12);
    }
}
