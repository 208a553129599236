//! Deterministic off-grid sample points for pointwise residual checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};

/// Reproducible scatter of `count` points in R^d: alternating draws from a
/// moderate Gaussian (bulk of the field) and a clamped Cauchy (far tail), so
/// residual checks see both the bump region and the decay region.
pub fn sample_points(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bulk = Normal::new(0.0, 1.5).expect("valid scale");
    let tail = Cauchy::new(0.0, 2.0).expect("valid scale");
    (0..count)
        .map(|i| {
            (0..d)
                .map(|_| {
                    if i % 2 == 0 {
                        bulk.sample(&mut rng)
                    } else {
                        let t: f64 = tail.sample(&mut rng);
                        t.clamp(-50.0, 50.0)
                    }
                })
                .collect()
        })
        .collect()
}
