use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::adf::adf_test;
use super::ols::{newey_west_cov, ols_fit, DesignMatrix};
use super::transform::{correlation, detrend, gram_schmidt_orthogonalize};
use crate::market::{DailyPanel, MIN_YEAR_ROWS};
use crate::stats::{two_sided_p_value, TestStatistic};
use crate::{Error, Result};

/// The three link specifications between the swap rate and the spot variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Framework {
    /// `VIX² = p00 + p01 V̂`.
    Affine,
    /// `VIX² = q00 + q01 Z1 + q02 Z2` with `Z1, Z2` orthonormalized `V̂, V̂²`.
    Quadratic,
    /// `VIX² = p00 + p01 V̂ + p10 (X - mean X)`.
    FullyAffine,
}

impl Framework {
    pub const ALL: [Framework; 3] = [
        Framework::Affine,
        Framework::Quadratic,
        Framework::FullyAffine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Framework::Affine => "affine",
            Framework::Quadratic => "quadratic",
            Framework::FullyAffine => "fully_affine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl CoefficientRow {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < 1.0 - level
    }
}

/// One fitted link regression with Newey-West inference.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionReport {
    pub framework: Framework,
    pub coefficients: Vec<CoefficientRow>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub hac_lags: usize,
    /// `corr(V̂, V̂²)` before orthogonalization (quadratic form only).
    pub collinearity: Option<f64>,
    /// Pretests run alongside the fit (ADF on the log-price for the fully affine form).
    pub pretests: Vec<TestStatistic>,
}

impl RegressionReport {
    pub fn coefficient(&self, name: &str) -> Option<&CoefficientRow> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

fn fit_report(
    framework: Framework,
    columns: Vec<(String, Vec<f64>)>,
    response: Vec<f64>,
    hac_lags: Option<usize>,
) -> Result<RegressionReport> {
    let design = DesignMatrix::new(columns, response)?;
    let fit = ols_fit(&design)?;
    let hac = newey_west_cov(&design, &fit, hac_lags)?;
    let coefficients = design
        .names()
        .iter()
        .zip(fit.coefficients.iter().zip(hac.std_errors()))
        .map(|(name, (&estimate, std_err))| {
            let t_stat = estimate / std_err;
            CoefficientRow {
                name: name.clone(),
                estimate,
                std_err,
                t_stat,
                p_value: two_sided_p_value(t_stat),
            }
        })
        .collect();
    Ok(RegressionReport {
        framework,
        coefficients,
        r_squared: fit.r_squared,
        n_obs: design.n_obs(),
        hac_lags: hac.lags,
        collinearity: None,
        pretests: Vec::new(),
    })
}

fn check_rows(panel: &DailyPanel) -> Result<()> {
    if panel.len() < MIN_YEAR_ROWS {
        return Err(Error::TooShort {
            needed: MIN_YEAR_ROWS,
            got: panel.len(),
        });
    }
    Ok(())
}

/// Fits `framework` on `panel`; `hac_lags = None` uses the automatic lag rule.
pub fn regress(
    panel: &DailyPanel,
    framework: Framework,
    hac_lags: Option<usize>,
) -> Result<RegressionReport> {
    check_rows(panel)?;
    let n = panel.len();
    let y = panel.vix_scaled();
    let v = panel.v_hat();
    match framework {
        Framework::Affine => fit_report(
            framework,
            vec![("p00".into(), vec![1.0; n]), ("p01".into(), v)],
            y,
            hac_lags,
        ),
        Framework::Quadratic => {
            let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
            let collinearity = correlation(&v, &v2);
            let z = gram_schmidt_orthogonalize(&[vec![1.0; n], v, v2])
                .map_err(|_| Error::Degenerate("spot-variance column is (nearly) constant"))?;
            let mut z = z.into_iter().skip(1);
            let (z1, z2) = (z.next().unwrap_or_default(), z.next().unwrap_or_default());
            let mut report = fit_report(
                framework,
                vec![
                    ("q00".into(), vec![1.0; n]),
                    ("q01".into(), z1),
                    ("q02".into(), z2),
                ],
                y,
                hac_lags,
            )?;
            report.collinearity = Some(collinearity);
            Ok(report)
        }
        Framework::FullyAffine => {
            let x = panel.x_open();
            let pretest = adf_test(&x, None, 0.95)?;
            let mut report = fit_report(
                framework,
                vec![
                    ("p00".into(), vec![1.0; n]),
                    ("p01".into(), v),
                    ("p10".into(), detrend(&x)),
                ],
                y,
                hac_lags,
            )?;
            report.pretests.push(TestStatistic {
                name: "adf_x_open".to_string() + pretest.name.trim_start_matches("adf_tau"),
                ..pretest
            });
            Ok(report)
        }
    }
}

/// `VIX² = p00 + p01 V̂` with Newey-West errors.
pub fn regress_affine(panel: &DailyPanel) -> Result<RegressionReport> {
    regress(panel, Framework::Affine, None)
}

/// `VIX² = q00 + q01 Z1 + q02 Z2` on the orthonormalized `{1, V̂, V̂²}` basis.
pub fn regress_quadratic_ortho(panel: &DailyPanel) -> Result<RegressionReport> {
    regress(panel, Framework::Quadratic, None)
}

/// `VIX² = p00 + p01 V̂ + p10 (X - mean X)`, with an ADF pretest on `X` attached.
pub fn regress_fully_affine(panel: &DailyPanel) -> Result<RegressionReport> {
    regress(panel, Framework::FullyAffine, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::PanelRow;
    use chrono::{Days, NaiveDate};

    fn panel(n: usize, f: impl Fn(usize) -> (f64, f64, f64)) -> DailyPanel {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let rows = (0..n)
            .map(|i| {
                let (vix_scaled, x_open, v_hat) = f(i);
                PanelRow {
                    date: start + Days::new(i as u64),
                    vix_scaled,
                    x_open,
                    v_hat,
                    jump_flag: false,
                }
            })
            .collect();
        DailyPanel::from_rows(rows).unwrap()
    }

    fn wobble(i: usize) -> f64 {
        let x = i as f64;
        0.04 + 0.02 * (0.37 * x).sin() + 0.01 * (1.3 * x).cos()
    }

    #[test]
    fn affine_exact() {
        let p = panel(60, |i| (0.003 + 0.92 * wobble(i), 0.0, wobble(i)));
        let r = regress_affine(&p).unwrap();
        assert!((r.coefficients[0].estimate - 0.003).abs() < 1e-12);
        assert!((r.coefficients[1].estimate - 0.92).abs() < 1e-10);
        assert!(r.r_squared > 1.0 - 1e-10);
        assert_eq!(r.hac_lags, 3);
        assert_eq!(r.n_obs, 60);
    }

    #[test]
    fn quadratic_intercept_is_mean_and_nests_affine() {
        let p = panel(80, |i| {
            let v = wobble(i);
            (
                0.002 + 0.9 * v + 3.0 * v * v + 1e-4 * (i as f64 * 2.1).sin(),
                0.0,
                v,
            )
        });
        let q = regress_quadratic_ortho(&p).unwrap();
        let mean = p.vix_scaled().iter().sum::<f64>() / 80.0;
        assert!((q.coefficients[0].estimate - mean).abs() < 1e-14);
        let a = regress_affine(&p).unwrap();
        assert!(q.r_squared >= a.r_squared);
        let rho = q.collinearity.unwrap();
        assert!(rho > 0.9 && rho < 1.0);
    }

    #[test]
    fn fully_affine_reports_pretest() {
        let p = panel(120, |i| {
            (
                0.002 + 0.9 * wobble(i),
                4.0 + 0.01 * (i as f64 * 0.1).sin() + 1e-4 * i as f64,
                wobble(i),
            )
        });
        let r = regress_fully_affine(&p).unwrap();
        assert_eq!(r.coefficients.len(), 3);
        assert_eq!(r.coefficients[2].name, "p10");
        assert_eq!(r.pretests.len(), 1);
        assert!(r.pretests[0].name.starts_with("adf_x_open"));
    }

    #[test]
    fn too_few_rows_and_flat_variance() {
        let p = panel(29, |i| (wobble(i), 0.0, wobble(i)));
        assert!(matches!(
            regress_affine(&p),
            Err(Error::TooShort {
                needed: 30,
                got: 29
            })
        ));
        let p = panel(40, |i| (wobble(i), 0.0, 0.04));
        assert!(matches!(
            regress_quadratic_ortho(&p),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn framework_names_round_trip() {
        for f in Framework::ALL {
            assert_eq!(Framework::parse(f.as_str()), Some(f));
        }
        assert_eq!(Framework::parse("cubic"), None);
    }
}
