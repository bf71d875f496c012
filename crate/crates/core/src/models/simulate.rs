use alloc::vec::Vec;
use core::f64::consts::TAU;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::spec::ModelSpec;
use crate::market::{PricePath, RescaledSeries, TickSeries, SESSIONS_PER_YEAR};
use crate::{Error, Result};

/// One simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub day_index: usize,
    pub series: RescaledSeries,
    /// Annualized variance `V` at every grid point of the session.
    pub true_spot_variance: Vec<f64>,
    /// Phases in `[0, 2π]` at which a jump arrived (empty for Heston).
    pub jump_times: Vec<f64>,
    pub seed: u64,
}

impl SimulatedPath {
    /// The session as an equispaced [`TickSeries`] dated `date`.
    pub fn to_tick_series(&self, date: NaiveDate, session_length: f64) -> Result<TickSeries> {
        TickSeries::equispaced(date, self.series.log_prices().to_vec(), session_length)
    }

    pub fn open_variance(&self) -> f64 {
        self.true_spot_variance[0]
    }
}

/// Simulates `days` consecutive sessions of `ticks_per_day` returns each on stream 0 of `seed`.
pub fn simulate(
    spec: &ModelSpec,
    days: usize,
    ticks_per_day: usize,
    seed: u64,
) -> Result<Vec<SimulatedPath>> {
    simulate_stream(spec, days, ticks_per_day, seed, 0)
}

/// Like [`simulate`] but on an independent ChaCha stream, so replications can be drawn in
/// any order (or in parallel) and still be reproducible.
///
/// Full-truncation Euler with one step per tick and `dt = 1/(252 · ticks_per_day)` years.
/// Every session opens at the previous close; `X` starts at 0.
pub fn simulate_stream(
    spec: &ModelSpec,
    days: usize,
    ticks_per_day: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<SimulatedPath>> {
    spec.validate()?;
    if days == 0 || ticks_per_day == 0 {
        return Err(Error::param("days/ticks_per_day", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let m = ticks_per_day;
    let dt = 1.0 / (SESSIONS_PER_YEAR * m as f64);
    let sqrt_dt = dt.sqrt();
    let rho_perp = (1.0 - spec.rho * spec.rho).max(0.0).sqrt();
    let arrivals = if spec.lambda > 0.0 {
        Some(
            Poisson::new(spec.lambda * dt)
                .map_err(|_| Error::param("lambda", "invalid intensity"))?,
        )
    } else {
        None
    };
    let compensation = spec.lambda * spec.jumps.compensator();

    let mut x = 0.0_f64;
    let mut v = spec.v0;
    let mut out = Vec::with_capacity(days);
    for day in 0..days {
        let mut prices = Vec::with_capacity(m + 1);
        let mut vars = Vec::with_capacity(m + 1);
        let mut jump_times = Vec::new();
        prices.push(x);
        vars.push(v.max(0.0));
        for j in 0..m {
            let vp = v.max(0.0);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let dw = sqrt_dt * z1;
            let db = sqrt_dt * (spec.rho * z1 + rho_perp * z2);
            let mut dx = (spec.drift.at(vp) - compensation) * dt + vp.sqrt() * dw;
            if let Some(poisson) = &arrivals {
                let n = poisson.sample(&mut rng) as u64;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    dx += spec.jumps.mean + spec.jumps.sd * z;
                }
                if n > 0 {
                    jump_times.push(TAU * (j + 1) as f64 / m as f64);
                }
            }
            x += dx;
            v += spec.kappa * (spec.theta - vp) * dt + spec.sigma * vp.sqrt() * db;
            prices.push(x);
            vars.push(v.max(0.0));
        }
        out.push(SimulatedPath {
            day_index: day,
            series: RescaledSeries::equispaced(prices)?,
            true_spot_variance: vars,
            jump_times,
            seed,
        });
    }
    Ok(out)
}

/// Calendar date of simulated session `day_index`: day `i` is the `(i mod 252)`-th weekday of
/// year `base_year + i / 252`, so every block of 252 sessions fills exactly one calendar year.
pub fn simulated_date(base_year: i32, day_index: usize) -> NaiveDate {
    let year = base_year + (day_index / 252) as i32;
    let mut d = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let mut left = day_index % 252;
    loop {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            if left == 0 {
                return d;
            }
            left -= 1;
        }
        d = d + Days::new(1);
    }
}
