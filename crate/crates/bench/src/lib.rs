//! Shared fixtures for the benchmark suite.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use genie_mac_core::{ensemble, DegradedChannel, GenieMacInstance};

/// A reproducible degraded channel with K users (P = N = 1).
pub fn degraded_channel(k: usize) -> DegradedChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
    ensemble::sample_degraded(&mut rng, k, 4.0, 0.1, 1.0, 1.0)
}

/// A reproducible general channel matrix with K users.
pub fn general_gains(k: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
    ensemble::sample_general(&mut rng, k, 2.0, 1.0, 1.0).h().clone()
}

/// A reproducible feasible instance with a random SPD noise covariance.
pub fn colored_instance(k: usize) -> GenieMacInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64);
    let sigma = ensemble::sample_spd(&mut rng, k);
    let h = general_gains(k);
    // Receiver cooperation point scaled into the noise budget.
    let t = DMatrix::identity(k, k);
    GenieMacInstance::new(h, sigma * 0.1, t).expect("valid instance")
}
