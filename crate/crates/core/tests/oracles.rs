//! Special functions against independent implementations.

use dirframe::numerics::{chi2_sf, kummer_log_derivative, kummer_m, ln_gamma};
use dirframe::watson::{watson_moment, watson_normalizer};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn ln_gamma_matches_statrs() {
    for i in 1..2000 {
        let x = i as f64 * 0.05;
        let ours = ln_gamma(x).unwrap();
        let theirs = statrs::function::gamma::ln_gamma(x);
        assert!(
            (ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0),
            "x = {x}: {ours} vs {theirs}"
        );
    }
}

#[test]
fn chi2_tail_matches_statrs() {
    for df in 1..=30u32 {
        let dist = ChiSquared::new(df as f64).unwrap();
        for i in 0..400 {
            let x = i as f64 * 0.2;
            let ours = chi2_sf(x, df).unwrap();
            let theirs = dist.sf(x);
            // relative where the tail is representable, absolute near 1
            let tol = 1e-11 * theirs.max(1e-300) + 1e-14;
            assert!(
                (ours - theirs).abs() <= tol.max(1e-12 * theirs),
                "df {df} x {x}: {ours} vs {theirs}"
            );
        }
    }
}

/// Simpson's rule on the Euler integral
/// `M(1/2, 3/2, κ) = ∫₀¹ e^{κ t²} dt`.
fn kummer_half_three_halves(kappa: f64) -> f64 {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |t: f64| (kappa * t * t).exp();
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn kummer_matches_integral_representation() {
    for kappa in [-30.0, -5.0, -0.5, 0.25, 1.0, 7.5, 40.0] {
        let ours = kummer_m(0.5, 1.5, kappa).unwrap();
        let oracle = kummer_half_three_halves(kappa);
        assert!(
            (ours - oracle).abs() <= 1e-11 * oracle,
            "κ = {kappa}: {ours} vs {oracle}"
        );
    }
}

#[test]
fn sphere_normalizer_and_moment_by_quadrature() {
    // On S², c₃(κ) = 1 / (4π M(1/2, 3/2, κ)) and m(κ) = ∫ t² e^{κt²} / ∫ e^{κt²}.
    for kappa in [-20.0, -2.0, 3.0, 15.0] {
        let m = kummer_half_three_halves(kappa);
        let c = watson_normalizer(kappa, 3).unwrap();
        assert!((c * 4.0 * std::f64::consts::PI * m - 1.0).abs() < 1e-11);

        let n = 20_000;
        let h = 1.0 / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let e = (kappa * t * t).exp();
            num += w * t * t * e;
            den += w * e;
        }
        let moment = watson_moment(kappa, 3).unwrap();
        assert!((moment - num / den).abs() < 1e-10, "κ = {kappa}");
        let deriv = kummer_log_derivative(0.5, 1.5, kappa).unwrap();
        assert!((deriv - moment).abs() < 1e-14);
    }
}
