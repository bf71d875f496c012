//! Normal-law helpers, incomplete gamma and the [`TestStatistic`] record.

use alloc::string::String;
use core::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal survival function `1 - Φ(x)`, accurate in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Two-sided p-value of a statistic under the standard normal reference.
pub fn two_sided_p_value(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    2.0 * normal_sf(t.abs())
}

/// Standard normal quantile, i.e. the inverse of [`normal_cdf`].
///
/// Bisection to a bracket followed by Newton polishing; accurate to a few ulps for
/// `p` in `[1e-300, 1 - 1e-16]`.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt();
        if pdf == 0.0 {
            break;
        }
        // work on whichever tail keeps the residual well conditioned
        let resid = if x > 0.0 {
            (1.0 - p) - normal_sf(x)
        } else {
            normal_cdf(x) - p
        };
        x -= resid / pdf;
    }
    x
}

/// Regularized upper incomplete gamma `Q(s, x) = Γ(s, x) / Γ(s)`.
pub fn gamma_q(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && x >= 0.0, "gamma_q needs s > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    let log_prefix = s * x.ln() - x - libm::lgamma(s);
    if x < s + 1.0 {
        // series for P(s, x)
        let mut ap = s;
        let mut del = 1.0 / s;
        let mut sum = del;
        for _ in 0..1000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        1.0 - sum * log_prefix.exp()
    } else {
        // modified Lentz continued fraction for Q(s, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * log_prefix.exp()
    }
}

/// Unregularized upper incomplete gamma `Γ(s, x)`.
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    gamma_q(s, x) * libm::tgamma(s)
}

/// Reference distribution a test statistic is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum NullDistribution {
    /// One-sided upper-tail standard normal test.
    StandardNormal,
    /// Dickey-Fuller (constant, no trend); rejection when the statistic is below the critical value.
    DickeyFuller { critical_value: f64 },
}

/// A named test statistic together with its decision at a confidence level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestStatistic {
    pub name: String,
    pub value: f64,
    pub null_dist: NullDistribution,
    pub confidence: f64,
    pub reject: bool,
}

impl TestStatistic {
    /// One-sided upper-tail normal test: reject when `value` exceeds the `confidence` quantile.
    pub fn upper_normal(name: impl Into<String>, value: f64, confidence: f64) -> Self {
        let reject = value > normal_quantile(confidence);
        TestStatistic {
            name: name.into(),
            value,
            null_dist: NullDistribution::StandardNormal,
            confidence,
            reject,
        }
    }

    /// The critical value implied by the null distribution and confidence level.
    pub fn critical_value(&self) -> f64 {
        match self.null_dist {
            NullDistribution::StandardNormal => normal_quantile(self.confidence),
            NullDistribution::DickeyFuller { critical_value } => critical_value,
        }
    }
}
