#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spotvar_core::market::RescaledSeries;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal shocks for one session.
pub fn shocks(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample(StandardNormal)).collect()
}

/// Per-return standard deviation of a session with annualized variance `sigma2`.
pub fn return_sd(sigma2: f64, m: usize) -> f64 {
    (sigma2 / (252.0 * m as f64)).sqrt()
}

/// Driftless constant-variance session built from `shocks`, with an optional extra return of
/// `jump` standard deviations added to the return starting at mid-session.
pub fn brownian_session(shocks: &[f64], sigma2: f64, jump: f64) -> RescaledSeries {
    let m = shocks.len();
    let sd = return_sd(sigma2, m);
    let mut x = Vec::with_capacity(m + 1);
    x.push(0.0);
    for (j, z) in shocks.iter().enumerate() {
        let mut r = sd * z;
        if j == m / 2 {
            r += jump * sd;
        }
        x.push(x[j] + r);
    }
    RescaledSeries::equispaced(x).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}
