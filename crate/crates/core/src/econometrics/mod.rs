//! OLS with Newey-West errors, the ADF pretest, Gram-Schmidt and the link regressions.

mod adf;
mod ols;
mod regress;
mod transform;

pub use adf::{adf_critical_value, adf_fit, adf_max_lags, adf_test, AdfFit};
pub use ols::{
    auto_lag, classical_cov, newey_west_cov, ols_fit, DesignMatrix, HacCovariance, OlsFit,
};
pub use regress::{
    regress, regress_affine, regress_fully_affine, regress_quadratic_ortho, CoefficientRow,
    Framework, RegressionReport,
};
pub use transform::{correlation, detrend, gram_schmidt_orthogonalize};
