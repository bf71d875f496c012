//! Realized measures, the corrected threshold bipower jump test and signature-plot data.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};

use crate::market::{PricePath, TickSeries};
use crate::stats::{normal_cdf, upper_gamma, TestStatistic};
use crate::{Error, Result};

/// Sum of squared returns.
pub fn realized_variance<P: PricePath + ?Sized>(series: &P) -> f64 {
    series.returns().map(|r| r * r).sum()
}

/// Bipower variation `(π/2) Σ_{j≥2} |r_j| |r_{j-1}|`; zero for fewer than two returns.
pub fn bipower_variation<P: PricePath + ?Sized>(series: &P) -> f64 {
    let p = series.log_prices();
    if p.len() < 3 {
        return 0.0;
    }
    let sum: f64 = p
        .windows(3)
        .map(|w| ((w[1] - w[0]) * (w[2] - w[1])).abs())
        .sum();
    0.5 * PI * sum
}

/// Keeps the ticks closest to the grid `0, interval, 2·interval, …`, plus the last tick.
///
/// Ties go to the earlier tick. An interval longer than the session leaves only the first
/// and last ticks.
pub fn subsample(series: &TickSeries, interval: f64) -> Result<TickSeries> {
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::param("interval", "must be positive and finite"));
    }
    let times = series.times();
    let last = times.len() - 1;
    let mut keep: Vec<usize> = Vec::new();
    let mut k = 0_u64;
    loop {
        let target = k as f64 * interval;
        if target > times[last] + 0.5 * interval {
            break;
        }
        let idx = nearest(times, target);
        if keep.last() != Some(&idx) {
            keep.push(idx);
        }
        k += 1;
    }
    if keep.last() != Some(&last) {
        keep.push(last);
    }
    let t = keep.iter().map(|&i| times[i]).collect();
    let x = keep.iter().map(|&i| series.log_prices()[i]).collect();
    TickSeries::new(series.session_date(), t, x, series.session_length())
}

fn nearest(times: &[f64], target: f64) -> usize {
    let i = times.partition_point(|&t| t < target);
    if i == 0 {
        return 0;
    }
    if i == times.len() {
        return times.len() - 1;
    }
    if target - times[i - 1] <= times[i] - target {
        i - 1
    } else {
        i
    }
}

/// Settings of the corrected threshold bipower test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct JumpTestConfig {
    /// Threshold in local standard deviations.
    pub threshold_c: f64,
    /// Returns in the local-variance window (split evenly around the centre).
    pub window: usize,
    /// Local-variance filtering passes; the first is an unthresholded bipower average.
    pub iterations: usize,
    /// One-sided confidence level of the decision.
    pub confidence: f64,
}

impl Default for JumpTestConfig {
    fn default() -> Self {
        JumpTestConfig {
            threshold_c: 3.0,
            window: 50,
            iterations: 2,
            confidence: 0.999,
        }
    }
}

/// Threshold-corrected power variations of one session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPowers {
    /// Corrected threshold bipower variation, an estimate of the continuous variation.
    pub tbpv: f64,
    /// Corrected threshold tripower quarticity, scaled by `m` (estimates `∫σ⁴` per session).
    pub ttrip: f64,
}

/// Index window of `window` neighbours around `j` (excluding `j-1, j, j+1`), shifted to stay
/// inside `0..m` near the edges.
fn neighbourhood(j: usize, m: usize, window: usize) -> impl Iterator<Item = usize> {
    let half = window / 2 + 1;
    let span = 2 * half + 1;
    let (lo, hi) = if span >= m {
        (0, m)
    } else {
        let lo = j.saturating_sub(half).min(m - span);
        (lo, lo + span)
    };
    (lo..hi).filter(move |&i| i + 1 < j || i > j + 1)
}

/// Local return variance around each return, by iterated filtering.
///
/// Pass one averages bipower products `(π/2)|r_i||r_{i-1}|` over the neighbourhood; each later
/// pass averages the squared returns that fall below `c²` times the previous pass.
pub fn local_variance(returns: &[f64], cfg: &JumpTestConfig) -> Vec<f64> {
    let m = returns.len();
    let mut prev = vec![0.0; m];
    for (j, slot) in prev.iter_mut().enumerate() {
        let (mut sum, mut n) = (0.0, 0usize);
        for i in neighbourhood(j, m, cfg.window).filter(|&i| i >= 1) {
            sum += 0.5 * PI * (returns[i] * returns[i - 1]).abs();
            n += 1;
        }
        *slot = if n > 0 { sum / n as f64 } else { 0.0 };
    }
    let c2 = cfg.threshold_c * cfg.threshold_c;
    for _ in 1..cfg.iterations {
        let mut next = vec![0.0; m];
        for j in 0..m {
            let cap = c2 * prev[j];
            let (mut sum, mut n) = (0.0, 0usize);
            for i in neighbourhood(j, m, cfg.window) {
                let r2 = returns[i] * returns[i];
                if r2 <= cap {
                    sum += r2;
                    n += 1;
                }
            }
            // an empty pass keeps the previous estimate
            next[j] = if n > 0 { sum / n as f64 } else { prev[j] };
        }
        prev = next;
    }
    prev
}

/// `E[|r|^γ | r² > ϑ]` for a centred Gaussian return whose threshold sits `c` standard
/// deviations out: `(2ϑ/c²)^{γ/2} Γ((γ+1)/2, c²/2) / (2 Φ(-c) √π)`.
fn tail_moment(gamma: f64, theta: f64, c: f64) -> f64 {
    let scale = (2.0 * theta / (c * c)).powf(0.5 * gamma);
    scale * upper_gamma(0.5 * (gamma + 1.0), 0.5 * c * c) / (2.0 * normal_cdf(-c) * PI.sqrt())
}

fn corrected_power(r: f64, theta: f64, gamma: f64, c: f64, tail: f64) -> f64 {
    if r * r <= theta {
        r.abs().powf(gamma)
    } else if theta > 0.0 {
        tail * (theta / (c * c)).powf(0.5 * gamma)
    } else {
        0.0
    }
}

/// Corrected threshold bipower variation and tripower quarticity.
///
/// Returns whose square exceeds `ϑ_j = c² · local_var_j` are replaced by their conditional
/// expectation under the local Gaussian law instead of being dropped.
pub fn threshold_bipower<P: PricePath + ?Sized>(
    series: &P,
    cfg: &JumpTestConfig,
) -> Result<ThresholdPowers> {
    let returns: Vec<f64> = series.returns().collect();
    let m = returns.len();
    if m < 3 {
        return Err(Error::TooShort { needed: 3, got: m });
    }
    if !(cfg.threshold_c > 0.0) {
        return Err(Error::param("threshold_c", "must be positive"));
    }
    let local = local_variance(&returns, cfg);
    if local.iter().all(|&v| v == 0.0) {
        return Ok(ThresholdPowers {
            tbpv: 0.0,
            ttrip: 0.0,
        });
    }
    let c = cfg.threshold_c;
    let c2 = c * c;
    // per unit of local standard deviation, so the replacement scales as σ^γ
    let tail1 = tail_moment(1.0, c2, c);
    let tail43 = tail_moment(4.0 / 3.0, c2, c);
    let z1: Vec<f64> = returns
        .iter()
        .zip(&local)
        .map(|(&r, &v)| corrected_power(r, c2 * v, 1.0, c, tail1))
        .collect();
    let z43: Vec<f64> = returns
        .iter()
        .zip(&local)
        .map(|(&r, &v)| corrected_power(r, c2 * v, 4.0 / 3.0, c, tail43))
        .collect();

    let bp: f64 = z1.windows(2).map(|w| w[0] * w[1]).sum();
    let tp: f64 = z43.windows(3).map(|w| w[0] * w[1] * w[2]).sum();
    let mu43 = libm::exp2(2.0 / 3.0) * libm::tgamma(7.0 / 6.0) / PI.sqrt();
    Ok(ThresholdPowers {
        tbpv: bp / FRAC_2_PI,
        ttrip: m as f64 * tp / (mu43 * mu43 * mu43),
    })
}

/// Asymptotic variance factor of the ratio statistic, `π²/4 + π - 5`.
const RATIO_VARIANCE: f64 = PI * PI / 4.0 + PI - 5.0;

/// Ratio jump statistic
/// `z = √m (RV - TBPV)/RV / √((π²/4 + π - 5) · max(1, TTriPV/TBPV²))`,
/// standard normal without jumps; rejection is one-sided.
pub fn jump_statistic<P: PricePath + ?Sized>(series: &P, cfg: &JumpTestConfig) -> Result<f64> {
    let m = series.m();
    if m < 10 {
        return Err(Error::TooShort { needed: 10, got: m });
    }
    let rv = realized_variance(series);
    if rv == 0.0 {
        return Ok(0.0);
    }
    let tp = threshold_bipower(series, cfg)?;
    if tp.tbpv == 0.0 {
        return Ok(0.0);
    }
    let ratio = (tp.ttrip / (tp.tbpv * tp.tbpv)).max(1.0);
    Ok((m as f64).sqrt() * (rv - tp.tbpv) / rv / (RATIO_VARIANCE * ratio).sqrt())
}

/// Daily jump test at `confidence` with the default threshold and filter settings.
pub fn jump_test<P: PricePath + ?Sized>(series: &P, confidence: f64) -> Result<TestStatistic> {
    jump_test_with(
        series,
        &JumpTestConfig {
            confidence,
            ..JumpTestConfig::default()
        },
    )
}

pub fn jump_test_with<P: PricePath + ?Sized>(
    series: &P,
    cfg: &JumpTestConfig,
) -> Result<TestStatistic> {
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::param("confidence", "must lie in (0, 1)"));
    }
    let z = jump_statistic(series, cfg)?;
    Ok(TestStatistic::upper_normal(
        "ratio_jump_z",
        z,
        cfg.confidence,
    ))
}

/// Total realized variance as a function of the sampling interval.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignatureCurve {
    /// Sampling intervals in seconds, strictly increasing.
    pub frequencies: Vec<f64>,
    pub total_rv: Vec<f64>,
}

/// `Σ_days RV(subsample(day, f))` for each interval `f` (sorted, duplicates removed).
pub fn signature_curve(days: &[TickSeries], intervals: &[f64]) -> Result<SignatureCurve> {
    if days.is_empty() || intervals.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mut frequencies = intervals.to_vec();
    if frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(Error::param("intervals", "must be positive and finite"));
    }
    frequencies.sort_by(f64::total_cmp);
    frequencies.dedup();
    let mut total_rv = Vec::with_capacity(frequencies.len());
    for &f in &frequencies {
        let mut sum = 0.0;
        for day in days {
            sum += realized_variance(&subsample(day, f)?);
        }
        total_rv.push(sum);
    }
    Ok(SignatureCurve {
        frequencies,
        total_rv,
    })
}
