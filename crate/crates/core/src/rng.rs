//! Indexed seeding: stream `index` of a run seeded with `seed` gets its own
//! generator, so draws and trials can be evaluated in any order (or in
//! parallel) and still produce bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(child_seed(seed, index))
}

/// Uniform point on S^{d-1}: a normalized standard Gaussian vector.
pub fn uniform_on_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    loop {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            v.iter_mut().for_each(|c| *c /= norm);
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_seeds_differ_and_repeat() {
        assert_eq!(child_seed(7, 3), child_seed(7, 3));
        assert_ne!(child_seed(7, 3), child_seed(7, 4));
        assert_ne!(child_seed(7, 3), child_seed(8, 3));
        assert_ne!(child_seed(0, 1), child_seed(1, 0));
    }

    #[test]
    fn sphere_points_are_unit() {
        let mut rng = stream_rng(1, 0);
        for d in 1..6 {
            let v = uniform_on_sphere(&mut rng, d);
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
