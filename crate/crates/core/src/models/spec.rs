use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    Heston,
    Bates,
}

/// Drift of the log-price.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum Drift {
    /// `μ = r`.
    Constant { r: f64 },
    /// `μ = r - V/2`, the risk-neutral log drift.
    RiskNeutral { r: f64 },
}

impl Drift {
    pub fn at(&self, v: f64) -> f64 {
        match *self {
            Drift::Constant { r } => r,
            Drift::RiskNeutral { r } => r - 0.5 * v,
        }
    }
}

impl Default for Drift {
    fn default() -> Self {
        Drift::RiskNeutral { r: 0.0 }
    }
}

/// Normally distributed log-price jumps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalJumps {
    pub mean: f64,
    pub sd: f64,
}

impl NormalJumps {
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.sd * self.sd
    }

    /// `E[e^ζ - 1]`.
    pub fn compensator(&self) -> f64 {
        libm::expm1(self.mean + 0.5 * self.sd * self.sd)
    }
}

/// Parameters of a Heston or Bates model, all in yearly units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub v0: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub drift: Drift,
    #[cfg_attr(feature = "serde", serde(default))]
    pub lambda: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub jumps: NormalJumps,
}

impl ModelSpec {
    pub fn heston(kappa: f64, theta: f64, sigma: f64, rho: f64, v0: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Heston,
            kappa,
            theta,
            sigma,
            rho,
            v0,
            drift: Drift::default(),
            lambda: 0.0,
            jumps: NormalJumps::default(),
        }
    }

    pub fn bates(
        kappa: f64,
        theta: f64,
        sigma: f64,
        rho: f64,
        v0: f64,
        lambda: f64,
        jumps: NormalJumps,
    ) -> Self {
        ModelSpec {
            kind: ModelKind::Bates,
            lambda,
            jumps,
            ..Self::heston(kappa, theta, sigma, rho, v0)
        }
    }

    pub fn with_drift(mut self, drift: Drift) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("sigma", self.sigma),
            ("v0", self.v0),
            ("lambda", self.lambda),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::param(name, "must be finite and non-negative"));
            }
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(Error::param("rho", "must lie in [-1, 1]"));
        }
        if !(self.jumps.mean.is_finite() && self.jumps.sd.is_finite() && self.jumps.sd >= 0.0) {
            return Err(Error::param(
                "jumps",
                "mean must be finite and sd non-negative",
            ));
        }
        let r = match self.drift {
            Drift::Constant { r } | Drift::RiskNeutral { r } => r,
        };
        if !r.is_finite() {
            return Err(Error::param("drift", "rate must be finite"));
        }
        if self.kind == ModelKind::Heston && self.lambda != 0.0 {
            return Err(Error::param("lambda", "a Heston model has no jumps"));
        }
        Ok(())
    }

    /// `2κθ ≥ σ²`; informational only.
    pub fn feller(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.sigma * self.sigma
    }

    /// `λ · E[ζ²]`, the jump contribution to the quadratic-variation rate.
    pub fn jump_variance_rate(&self) -> f64 {
        self.lambda * self.jumps.second_moment()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelSpec::heston(2.0, 0.04, 0.3, -0.7, 0.09)
            .validate()
            .is_ok());
        assert!(ModelSpec::heston(2.0, 0.04, 0.3, -1.2, 0.09)
            .validate()
            .is_err());
        assert!(ModelSpec::heston(-1.0, 0.04, 0.3, 0.0, 0.09)
            .validate()
            .is_err());
        let mut h = ModelSpec::heston(2.0, 0.04, 0.3, 0.0, 0.09);
        h.lambda = 1.0;
        assert!(h.validate().is_err());
        let jumps = NormalJumps {
            mean: 0.0,
            sd: -0.1,
        };
        assert!(ModelSpec::bates(2.0, 0.04, 0.3, 0.0, 0.04, 5.0, jumps)
            .validate()
            .is_err());
    }

    #[test]
    fn feller_flag() {
        assert!(ModelSpec::heston(2.0, 0.04, 0.3, 0.0, 0.04).feller() == (0.16 >= 0.09));
        assert!(!ModelSpec::heston(0.5, 0.04, 0.3, 0.0, 0.04).feller());
    }

    #[test]
    fn drift_modes() {
        assert_eq!(Drift::Constant { r: 0.01 }.at(0.3), 0.01);
        assert!((Drift::RiskNeutral { r: 0.01 }.at(0.04) + 0.01).abs() < 1e-15);
    }
}
