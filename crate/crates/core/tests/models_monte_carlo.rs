mod common;

use common::{mean, std_error};
use spotvar_core::diagnostics::realized_variance;
use spotvar_core::models::{
    bates_vs_rate, simulate_stream, vs_static_replication, ModelSpec, NormalJumps, OptionChain,
};
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn cir_mean_after_one_year() {
    let spec = ModelSpec::heston(2.0, 0.04, 0.3, -0.7, 0.09);
    let terminal: Vec<f64> = (0..4000)
        .map(|p| {
            let days = simulate_stream(&spec, 252, 20, 41, p).unwrap();
            *days.last().unwrap().true_spot_variance.last().unwrap()
        })
        .collect();
    let expected = 0.04 + 0.05 * (-2.0_f64).exp();
    assert!((expected - 0.046_766_764_161_830_63).abs() < 1e-15);
    let (mu, se) = (mean(&terminal), std_error(&terminal));
    assert!((mu - expected).abs() < 3.0 * se, "mean {mu}, se {se}");
}

#[test]
fn bates_realized_variance_matches_swap_rate() {
    let jumps = NormalJumps {
        mean: -0.01,
        sd: 0.04,
    };
    let spec = ModelSpec::bates(2.0, 0.04, 0.3, -0.7, 0.06, 10.0, jumps);
    let tau_days = 21;
    let tau = tau_days as f64 / 252.0;
    let rates: Vec<f64> = (0..10_000)
        .map(|p| {
            let days = simulate_stream(&spec, tau_days, 78, 42, p).unwrap();
            days.iter()
                .map(|d| realized_variance(&d.series))
                .sum::<f64>()
                / tau
        })
        .collect();
    let expected = bates_vs_rate(&spec, 0.06, tau).unwrap();
    let (mu, se) = (mean(&rates), std_error(&rates));
    assert!(
        (mu / expected - 1.0).abs() < 0.02,
        "mean {mu}, rate {expected}"
    );
    assert!(
        (mu - expected).abs() < 3.0 * se,
        "mean {mu}, rate {expected}, se {se}"
    );
}

fn black_scholes_chain(sigma: f64, tau: f64, step: f64, half_width: i32) -> OptionChain {
    let forward = 100.0;
    let n = Normal::standard();
    let sd = sigma * tau.sqrt();
    let strikes: Vec<f64> = (-half_width..=half_width)
        .map(|k| forward * (k as f64 * step).exp())
        .collect();
    let (mut calls, mut puts) = (vec![], vec![]);
    for &k in &strikes {
        let d1 = ((forward / k).ln() + 0.5 * sd * sd) / sd;
        let d2 = d1 - sd;
        calls.push(forward * n.cdf(d1) - k * n.cdf(d2));
        puts.push(k * n.cdf(-d2) - forward * n.cdf(-d1));
    }
    OptionChain::new(forward, 0.0, tau, strikes, calls, puts).unwrap()
}

#[test]
fn replication_recovers_black_scholes_variance_and_refines() {
    let coarse = black_scholes_chain(0.2, 1.0 / 12.0, 0.01, 300);
    assert!(coarse.parity_violations(1e-10).is_empty());
    let rate = vs_static_replication(&coarse).unwrap();
    // The trapezoid bias on this grid is 2.007e-4 (0.502%), independently computed.
    assert!((rate - 0.040_200_669_67).abs() < 1e-10, "rate {rate}");

    let fine = black_scholes_chain(0.2, 1.0 / 12.0, 0.005, 600);
    let refined = vs_static_replication(&fine).unwrap();
    let ratio = (rate - 0.04) / (refined - 0.04);
    assert!((ratio - 4.0).abs() < 0.05, "error ratio {ratio}");
}
