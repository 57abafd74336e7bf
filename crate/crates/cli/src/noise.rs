//! Seeded additive Gaussian measurement noise.

use crate::error::{CliError, CliResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Adds i.i.d. `N(0, σ²)` to every sample, sensor by sensor in time order.
/// The stream depends only on `seed`, so equal inputs give equal outputs.
pub fn add_noise(series: &mut [Vec<f64>], sigma: f64, seed: u64) -> CliResult<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(CliError::validation("noise", format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| CliError::validation("noise", e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in series.iter_mut() {
        for v in s.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(())
}
