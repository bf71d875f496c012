use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ols::{classical_cov, ols_fit, DesignMatrix};
use crate::stats::{NullDistribution, TestStatistic};
use crate::{Error, Result};

/// Shortest series accepted by the ADF test.
const MIN_LEN: usize = 25;

/// Response-surface coefficients `(b0, b1, b2, b3)` for the constant-only Dickey-Fuller
/// critical values, MacKinnon (2010).
const DF_SURFACE: [(f64, [f64; 4]); 3] = [
    (0.99, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.95, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.90, [-2.56677, -1.5384, -2.809, 0.0]),
];

/// Dickey-Fuller critical value (constant, no trend) for `n_obs` regression observations.
pub fn adf_critical_value(confidence: f64, n_obs: usize) -> Result<f64> {
    let (_, b) = DF_SURFACE
        .iter()
        .find(|(c, _)| (c - confidence).abs() < 1e-9)
        .ok_or_else(|| Error::param("confidence", "must be one of 0.90, 0.95, 0.99"))?;
    let t = n_obs as f64;
    Ok(b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t))
}

/// Default lag cap `floor(12 (L/100)^{1/4})`.
pub fn adf_max_lags(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// The selected ADF regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfFit {
    /// t-statistic of the lagged level.
    pub tau: f64,
    pub lags: usize,
    pub n_obs: usize,
}

/// Design of `Δy_t = a + b y_{t-1} + Σ_{i≤p} c_i Δy_{t-i}` for `t` starting at `start + 1`.
fn adf_design(y: &[f64], dy: &[f64], p: usize, start: usize) -> Result<DesignMatrix> {
    // dy[k] = y[k+1] - y[k]; the response at dy index k uses y[k] and dy[k-1..k-p]
    let rows = start..dy.len();
    let mut cols: Vec<(String, Vec<f64>)> = vec![
        ("const".into(), vec![1.0; rows.len()]),
        ("y_lag".into(), rows.clone().map(|k| y[k]).collect()),
    ];
    for i in 1..=p {
        cols.push((
            alloc::format!("dy_lag{i}"),
            rows.clone().map(|k| dy[k - i]).collect(),
        ));
    }
    DesignMatrix::new(cols, rows.map(|k| dy[k]).collect())
}

/// Fits the ADF regression with the AIC-minimizing lag order in `0..=max_lags`, comparing all
/// orders on a common sample and refitting the winner on its full sample.
pub fn adf_fit(series: &[f64], max_lags: Option<usize>) -> Result<AdfFit> {
    if series.len() < MIN_LEN {
        return Err(Error::TooShort {
            needed: MIN_LEN,
            got: series.len(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries("non-finite value in ADF input"));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    if dy.iter().all(|&d| d == 0.0) {
        return Err(Error::Degenerate("constant series"));
    }
    let cap = max_lags
        .unwrap_or_else(|| adf_max_lags(series.len()))
        .min((dy.len() - 4) / 2);
    let mut best = (f64::INFINITY, 0);
    for p in 0..=cap {
        let d = adf_design(series, &dy, p, cap)?;
        let Ok(fit) = ols_fit(&d) else { continue };
        let n = d.n_obs() as f64;
        let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
        if ssr <= 0.0 {
            continue;
        }
        let aic = n * (ssr / n).ln() + 2.0 * d.n_cols() as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Degenerate(
            "ADF regression has no residual variation",
        ));
    }
    let p = best.1;
    let d = adf_design(series, &dy, p, p)?;
    let fit = ols_fit(&d)?;
    let se = classical_cov(&d, &fit)[(1, 1)].sqrt();
    if !(se > 0.0) {
        return Err(Error::Degenerate(
            "ADF regression has no residual variation",
        ));
    }
    Ok(AdfFit {
        tau: fit.coefficients[1] / se,
        lags: p,
        n_obs: d.n_obs(),
    })
}

/// Augmented Dickey-Fuller test with a constant and AIC-selected lags. Rejection (of a unit
/// root) when the statistic falls below the critical value at `confidence`.
pub fn adf_test(series: &[f64], max_lags: Option<usize>, confidence: f64) -> Result<TestStatistic> {
    adf_critical_value(confidence, 100)?;
    let fit = adf_fit(series, max_lags)?;
    let critical_value = adf_critical_value(confidence, fit.n_obs)?;
    Ok(TestStatistic {
        name: alloc::format!("adf_tau(lags={})", fit.lags),
        value: fit.tau,
        null_dist: NullDistribution::DickeyFuller { critical_value },
        confidence,
        reject: fit.tau < critical_value,
    })
}
