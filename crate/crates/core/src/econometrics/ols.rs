use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Largest condition number of the column-scaled design accepted by [`ols_fit`].
const MAX_CONDITION: f64 = 1e12;

/// Named regressor columns plus a response, all of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl DesignMatrix {
    pub fn new(columns: Vec<(String, Vec<f64>)>, response: Vec<f64>) -> Result<Self> {
        let l = response.len();
        let p = columns.len();
        if p == 0 {
            return Err(Error::InvalidSeries("design needs at least one column"));
        }
        if l <= p {
            return Err(Error::TooShort {
                needed: p + 1,
                got: l,
            });
        }
        if columns.iter().any(|(_, c)| c.len() != l) {
            return Err(Error::InvalidSeries(
                "columns and response differ in length",
            ));
        }
        if response
            .iter()
            .chain(columns.iter().flat_map(|(_, c)| c))
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSeries(
                "non-finite entry in design or response",
            ));
        }
        let x = DMatrix::from_fn(l, p, |i, j| columns[j].1[i]);
        Ok(DesignMatrix {
            names: columns.into_iter().map(|(n, _)| n).collect(),
            x,
            y: DVector::from_vec(response),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }
}

/// Least-squares fit with the pieces needed for covariance estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    /// `(X'X)^{-1}`.
    pub xtx_inv: DMatrix<f64>,
}

/// OLS through a Householder QR of the column-scaled design.
///
/// `R²` uses the centered total sum of squares and is clamped to `[0, 1]`; it is 0 for a
/// constant response.
pub fn ols_fit(design: &DesignMatrix) -> Result<OlsFit> {
    let (l, p) = (design.n_obs(), design.n_cols());
    let norms: Vec<f64> = (0..p).map(|j| design.x.column(j).norm()).collect();
    let mut xs = design.x.clone();
    for (j, &n) in norms.iter().enumerate() {
        if n > 0.0 {
            xs.column_mut(j).scale_mut(1.0 / n);
        }
    }
    let qr = xs.qr();
    let r = qr.r();
    check_rank(&r, &norms, design.names())?;

    let qty = qr.q().transpose() * &design.y;
    let beta_s = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let coefficients: Vec<f64> = (0..p).map(|j| beta_s[j] / norms[j]).collect();
    let fitted = &design.x * DVector::from_column_slice(&coefficients);
    let residuals: Vec<f64> = (0..l).map(|i| design.y[i] - fitted[i]).collect();

    let mean = design.y.mean();
    let sst: f64 = design.y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Numerical("triangular inverse failed".into()))?;
    let mut xtx_inv = &r_inv * r_inv.transpose();
    for i in 0..p {
        for j in 0..p {
            xtx_inv[(i, j)] /= norms[i] * norms[j];
        }
    }
    Ok(OlsFit {
        coefficients,
        residuals,
        r_squared,
        xtx_inv,
    })
}

/// Rejects a design whose scaled `R` factor is (nearly) singular and names the columns
/// involved in the first detected dependency.
fn check_rank(r: &DMatrix<f64>, norms: &[f64], names: &[String]) -> Result<()> {
    let p = r.ncols();
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::RankDeficient {
            columns: alloc::vec![names[j].clone()],
        });
    }
    let sv = r.clone().singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0_f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if smin > 0.0 && smax / smin < MAX_CONDITION {
        return Ok(());
    }
    let scale = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = scale / MAX_CONDITION.sqrt();
    let j = (0..p).find(|&i| r[(i, i)].abs() <= tol).unwrap_or(p - 1);
    let mut columns = Vec::new();
    if j > 0 {
        // express column j through the earlier ones: R[..j, ..j] c = R[..j, j]
        let head = r.view((0, 0), (j, j)).clone_owned();
        let rhs = r.view((0, j), (j, 1)).clone_owned();
        if let Some(c) = head.solve_upper_triangular(&rhs) {
            let cmax = c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            for (i, v) in c.iter().enumerate() {
                if v.abs() > 1e-6 * cmax {
                    columns.push(names[i].clone());
                }
            }
        }
    }
    columns.push(names[j].clone());
    Err(Error::RankDeficient { columns })
}

/// `σ² (X'X)^{-1}` with `σ² = SSR/(L - p)`.
pub fn classical_cov(design: &DesignMatrix, fit: &OlsFit) -> DMatrix<f64> {
    let dof = (design.n_obs() - design.n_cols()) as f64;
    let s2 = fit.residuals.iter().map(|e| e * e).sum::<f64>() / dof;
    &fit.xtx_inv * s2
}

/// Newey-West lag rule `floor(4 (L/100)^{2/9})`.
pub fn auto_lag(n_obs: usize) -> usize {
    (4.0 * (n_obs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// HAC coefficient covariance and the lag truncation used.
#[derive(Debug, Clone, PartialEq)]
pub struct HacCovariance {
    pub cov: DMatrix<f64>,
    pub lags: usize,
}

impl HacCovariance {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.cov.nrows())
            .map(|i| self.cov[(i, i)].max(0.0).sqrt())
            .collect()
    }
}

/// Newey-West sandwich `(X'X)^{-1} S (X'X)^{-1}` with Bartlett weights `1 - l/(lags+1)` and no
/// small-sample correction. `lags = None` applies [`auto_lag`].
///
/// The result is symmetrized; if it still has a negative eigenvalue, the eigenvalues are
/// floored at zero.
pub fn newey_west_cov(
    design: &DesignMatrix,
    fit: &OlsFit,
    lags: Option<usize>,
) -> Result<HacCovariance> {
    let (l, p) = (design.n_obs(), design.n_cols());
    if fit.residuals.len() != l {
        return Err(Error::InvalidSeries("residuals do not match the design"));
    }
    let lags = lags.unwrap_or_else(|| auto_lag(l));
    if lags >= l {
        return Err(Error::param(
            "lags",
            format!("must be below the sample size {l}"),
        ));
    }
    let mut g = design.x.clone();
    for (i, mut row) in g.row_iter_mut().enumerate() {
        row *= fit.residuals[i];
    }
    let mut s = g.transpose() * &g;
    for lag in 1..=lags {
        let w = 1.0 - lag as f64 / (lags + 1) as f64;
        let lead = g.rows(lag, l - lag);
        let back = g.rows(0, l - lag);
        let gamma = lead.transpose() * back;
        s += (&gamma + gamma.transpose()) * w;
    }
    let mut cov = &fit.xtx_inv * s * &fit.xtx_inv;
    cov = (&cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().any(|&v| v < 0.0) {
        let floored = eig.eigenvalues.map(|v| v.max(0.0));
        cov = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
        cov = (&cov + cov.transpose()) * 0.5;
    }
    debug_assert_eq!(cov.nrows(), p);
    Ok(HacCovariance { cov, lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn design(cols: &[(&str, Vec<f64>)], y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::new(
            cols.iter()
                .map(|(n, c)| (n.to_string(), c.clone()))
                .collect(),
            y,
        )
        .unwrap()
    }

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.3 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
        let d = design(&[("const", vec![1.0; 50]), ("x", x)], y);
        let fit = ols_fit(&d).unwrap();
        assert!((fit.coefficients[0] - 1.5).abs() < 1e-10);
        assert!((fit.coefficients[1] + 0.25).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_response() {
        let x: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let y: Vec<f64> = (0..40)
            .map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let d = design(&[("const", vec![1.0; 40]), ("x", x)], y);
        let fit = ols_fit(&d).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert!(fit.r_squared < 1e-12);
    }

    #[test]
    fn duplicate_column_is_named() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sqrt()).collect();
        let d = design(
            &[
                ("const", vec![1.0; 20]),
                ("x", x.clone()),
                ("x_again", x.clone()),
            ],
            x.clone(),
        );
        match ols_fit(&d) {
            Err(Error::RankDeficient { columns }) => {
                assert_eq!(columns, vec!["x".to_string(), "x_again".to_string()]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let d = design(&[("const", vec![1.0; 20]), ("zero", vec![0.0; 20])], x);
        assert!(matches!(ols_fit(&d), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn lag_rule() {
        assert_eq!(auto_lag(3267), 8);
        assert_eq!(auto_lag(100), 4);
        assert_eq!(auto_lag(2520), 8);
    }

    fn random_design(rng: &mut ChaCha8Rng, l: usize) -> (DesignMatrix, OlsFit) {
        let x1: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
        let x2: Vec<f64> = (0..l).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        let y: Vec<f64> = (0..l)
            .map(|i| 0.3 + x1[i] - 0.5 * x2[i] + (rng.random::<f64>() - 0.5) * (1.0 + x1[i]))
            .collect();
        let d = design(&[("const", vec![1.0; l]), ("x1", x1), ("x2", x2)], y);
        let fit = ols_fit(&d).unwrap();
        (d, fit)
    }

    #[test]
    fn lag_zero_is_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, fit) = random_design(&mut rng, 120);
        let nw = newey_west_cov(&d, &fit, Some(0)).unwrap();
        let mut meat = DMatrix::zeros(3, 3);
        for i in 0..120 {
            let row = d.x().row(i).transpose();
            meat += &row * row.transpose() * fit.residuals[i].powi(2);
        }
        let white = &fit.xtx_inv * meat * &fit.xtx_inv;
        assert!((nw.cov - white).abs().max() < 1e-14);
    }

    #[test]
    fn matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (d, fit) = random_design(&mut rng, 200);
        let lags = 6;
        let mut meat = DMatrix::zeros(3, 3);
        for t in 0..200_usize {
            for s in 0..200_usize {
                let gap = t.abs_diff(s);
                if gap > lags {
                    continue;
                }
                let w = 1.0 - gap as f64 / (lags + 1) as f64;
                let xt = d.x().row(t).transpose();
                let xs = d.x().row(s);
                meat += &xt * xs * (w * fit.residuals[t] * fit.residuals[s]);
            }
        }
        let brute = &fit.xtx_inv * meat * &fit.xtx_inv;
        let nw = newey_west_cov(&d, &fit, Some(lags)).unwrap();
        let rel = (&nw.cov - &brute).abs().max() / brute.abs().max();
        assert!(rel < 1e-12, "{rel}");
        assert!(newey_west_cov(&d, &fit, Some(200)).is_err());
    }

    #[test]
    fn classical_matches_textbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (d, fit) = random_design(&mut rng, 80);
        let cov = classical_cov(&d, &fit);
        let xtx = d.x().transpose() * d.x();
        let inv = xtx.try_inverse().unwrap();
        let s2 = fit.residuals.iter().map(|e| e * e).sum::<f64>() / 77.0;
        assert!((cov - inv * s2).abs().max() < 1e-12);
    }
}
