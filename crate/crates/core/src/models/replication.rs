use alloc::vec::Vec;

use crate::{Error, Result};

/// European calls and puts on one maturity.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptionChain {
    pub forward: f64,
    pub rate: f64,
    /// Years.
    pub maturity: f64,
    pub strikes: Vec<f64>,
    pub calls: Vec<f64>,
    pub puts: Vec<f64>,
}

impl OptionChain {
    pub fn new(
        forward: f64,
        rate: f64,
        maturity: f64,
        strikes: Vec<f64>,
        calls: Vec<f64>,
        puts: Vec<f64>,
    ) -> Result<Self> {
        let chain = OptionChain {
            forward,
            rate,
            maturity,
            strikes,
            calls,
            puts,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.forward > 0.0 && self.forward.is_finite()) {
            return Err(Error::param("forward", "must be positive"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::param("maturity", "must be positive"));
        }
        if !self.rate.is_finite() {
            return Err(Error::param("rate", "must be finite"));
        }
        let n = self.strikes.len();
        if n < 2 || self.calls.len() != n || self.puts.len() != n {
            return Err(Error::InvalidSeries(
                "need at least two strikes with a call and a put each",
            ));
        }
        if !(self.strikes[0] > 0.0) || self.strikes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries(
                "strikes must be positive and strictly increasing",
            ));
        }
        if self
            .calls
            .iter()
            .chain(&self.puts)
            .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(Error::InvalidSeries(
                "option prices must be finite and non-negative",
            ));
        }
        Ok(())
    }

    /// Indices where `|C - P - e^{-rτ}(F - K)|` exceeds `tol`.
    pub fn parity_violations(&self, tol: f64) -> Vec<usize> {
        let df = (-self.rate * self.maturity).exp();
        (0..self.strikes.len())
            .filter(|&i| {
                let gap = self.calls[i] - self.puts[i] - df * (self.forward - self.strikes[i]);
                gap.abs() > tol
            })
            .collect()
    }
}

/// Variance-swap rate replicated from out-of-the-money options,
/// `(2/τ) e^{rτ} ∫ Q(K)/K² dK` with `Q = P` for `K ≤ F` and `Q = C` above, integrated by the
/// trapezoid rule over the quoted strikes.
pub fn vs_static_replication(chain: &OptionChain) -> Result<f64> {
    chain.validate()?;
    let k = &chain.strikes;
    let f = chain.forward;
    if !(k[0] <= f && f <= k[k.len() - 1]) {
        return Err(Error::param("strikes", "must bracket the forward"));
    }
    let integrand: Vec<f64> = (0..k.len())
        .map(|i| {
            let q = if k[i] <= f {
                chain.puts[i]
            } else {
                chain.calls[i]
            };
            q / (k[i] * k[i])
        })
        .collect();
    let area: f64 = (1..k.len())
        .map(|i| 0.5 * (k[i] - k[i - 1]) * (integrand[i] + integrand[i - 1]))
        .sum();
    Ok(2.0 / chain.maturity * (chain.rate * chain.maturity).exp() * area)
}
