//! Quadrature rules for integrals over the circle and the 2-sphere.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates a vector-valued periodic function over [0, 2π) with the
/// trapezoidal rule, doubling the node count until successive estimates
/// agree to `tol` in every component.
pub fn periodic_trapezoid<F>(f: F, components: usize, tol: f64) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]),
{
    let mut nodes = 64usize;
    let mut prev = trapezoid_at(&f, components, nodes);
    loop {
        nodes *= 2;
        let next = trapezoid_at(&f, components, nodes);
        let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff <= tol || nodes >= 1 << 20 {
            return next;
        }
        prev = next;
    }
}

fn trapezoid_at<F>(f: &F, components: usize, nodes: usize) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]),
{
    let h = 2.0 * PI / nodes as f64;
    let mut acc = vec![0.0; components];
    let mut buf = vec![0.0; components];
    for k in 0..nodes {
        f(k as f64 * h, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }
    acc.iter_mut().for_each(|a| *a *= h);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for order in [2usize, 5, 16, 64, 257] {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            // exact for degree 2n-1
            let deg = (2 * order - 2).min(40);
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((integral - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_on_circle() {
        let out = periodic_trapezoid(
            |t, o| {
                o[0] = (3.0 * t.cos()).exp();
                o[1] = t.sin().powi(2);
            },
            2,
            1e-14,
        );
        // ∫ e^{3cos t} = 2π I0(3)
        let i0 = crate::numerics::bessel_i0(3.0).unwrap();
        assert!((out[0] - 2.0 * PI * i0).abs() < 1e-12);
        assert!((out[1] - PI).abs() < 1e-14);
    }
}
