mod common;

use chrono::NaiveDate;
use common::{brownian_session, mean, return_sd, rng, shocks};
use rand::Rng;
use rand_distr::StandardNormal;
use spotvar_core::diagnostics::{
    jump_test, realized_variance, signature_curve, threshold_bipower, JumpTestConfig,
};
use spotvar_core::market::{PricePath, TickSeries, SESSION_SECONDS};

const SIGMA2: f64 = 0.04;

#[test]
fn threshold_bipower_tracks_integrated_variance() {
    let m = 4680;
    let iv = SIGMA2 / 252.0;
    let cfg = JumpTestConfig::default();
    let mut rng = rng(31);
    let (mut tb, mut rv, mut tb_jump, mut rv_jump) = (vec![], vec![], vec![], vec![]);
    for _ in 0..500 {
        let z = shocks(&mut rng, m);
        let clean = brownian_session(&z, SIGMA2, 0.0);
        let jumped = brownian_session(&z, SIGMA2, 20.0);
        tb.push(threshold_bipower(&clean, &cfg).unwrap().tbpv);
        rv.push(realized_variance(&clean));
        tb_jump.push(threshold_bipower(&jumped, &cfg).unwrap().tbpv);
        rv_jump.push(realized_variance(&jumped));
    }
    assert!((mean(&tb) / iv - 1.0).abs() < 0.05);
    assert!(mean(&tb) <= 1.05 * mean(&rv));
    assert!((mean(&tb_jump) / iv - 1.0).abs() < 0.10);
    let jump_sq = (20.0 * return_sd(SIGMA2, m)).powi(2);
    let excess = mean(&rv_jump) - iv;
    assert!(
        (excess / jump_sq - 1.0).abs() < 0.25,
        "excess {excess}, jump² {jump_sq}"
    );
}

#[test]
fn jump_test_size_and_power_on_five_minute_days() {
    let m = 78;
    let mut rng = rng(32);
    let days = 10_000;
    let (mut false_alarms, mut hits) = (0, 0);
    for _ in 0..days {
        let z = shocks(&mut rng, m);
        if jump_test(&brownian_session(&z, SIGMA2, 0.0), 0.999)
            .unwrap()
            .reject
        {
            false_alarms += 1;
        }
        if jump_test(&brownian_session(&z, SIGMA2, 20.0), 0.999)
            .unwrap()
            .reject
        {
            hits += 1;
        }
    }
    let size = false_alarms as f64 / days as f64;
    let power = hits as f64 / days as f64;
    println!("jump test: size {size:.4}, power {power:.4}");
    assert!(size <= 0.004);
    assert!(power >= 0.90);
}

#[test]
fn jump_test_ignores_the_time_unit() {
    let mut rng = rng(33);
    let s = brownian_session(&shocks(&mut rng, 390), SIGMA2, 8.0);
    let date = NaiveDate::from_ymd_opt(2020, 3, 2).unwrap();
    let seconds = TickSeries::equispaced(date, s.log_prices().to_vec(), SESSION_SECONDS).unwrap();
    let minutes = TickSeries::equispaced(date, s.log_prices().to_vec(), 390.0).unwrap();
    let a = jump_test(&seconds, 0.999).unwrap();
    let b = jump_test(&minutes, 0.999).unwrap();
    let c = jump_test(&s, 0.999).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.value, c.value);
    assert_eq!(a.reject, b.reject);
}

fn second_by_second_days(noise_sd: f64, days: usize, seed: u64) -> Vec<TickSeries> {
    let m = 23_400;
    let sd = return_sd(SIGMA2, m);
    let mut rng = rng(seed);
    (0..days)
        .map(|d| {
            let mut x = 0.0;
            let prices: Vec<f64> = (0..=m)
                .map(|j| {
                    if j > 0 {
                        x += sd * rng.sample::<f64, _>(StandardNormal);
                    }
                    x + noise_sd * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            let date = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() + chrono::Days::new(d as u64);
            TickSeries::equispaced(date, prices, SESSION_SECONDS).unwrap()
        })
        .collect()
}

#[test]
fn signature_curve_falls_under_noise_and_is_flat_without() {
    let intervals = [60.0, 300.0, 900.0];
    let days = 250;
    let noisy = signature_curve(&second_by_second_days(5e-4, days, 34), &intervals).unwrap();
    assert!(
        noisy.total_rv.windows(2).all(|w| w[1] < w[0]),
        "{:?}",
        noisy.total_rv
    );

    let clean = signature_curve(&second_by_second_days(0.0, days, 35), &intervals).unwrap();
    // RV over n returns of a constant-variance path has relative sd sqrt(2/n); 250 days at 900 s
    // give n = 6500, so 5 standard errors is about 8.8%.
    let iv = days as f64 * SIGMA2 / 252.0;
    for rv in &clean.total_rv {
        assert!((rv / iv - 1.0).abs() < 0.088, "{:?}", clean.total_rv);
    }
}
