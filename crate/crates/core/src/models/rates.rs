use super::spec::{ModelSpec, NormalJumps};
use crate::quadrature::GaussHermite;
use crate::{Error, Result};

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::param("tau", "must be positive and finite"));
    }
    Ok(())
}

/// Loading of the spot variance in the Heston swap rate, `(1 - e^{-κτ})/(κτ)`; 1 at `κ = 0`.
pub fn heston_weight(kappa: f64, tau: f64) -> f64 {
    let x = kappa * tau;
    if x == 0.0 {
        1.0
    } else {
        -libm::expm1(-x) / x
    }
}

/// Heston variance-swap rate `θ + (v - θ)(1 - e^{-κτ})/(κτ)`.
pub fn heston_vs_rate(spec: &ModelSpec, v_t: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(spec.theta + (v_t - spec.theta) * heston_weight(spec.kappa, tau))
}

/// Bates variance-swap rate: the Heston rate plus `λ · E[ζ²]`.
pub fn bates_vs_rate(spec: &ModelSpec, v_t: f64, tau: f64) -> Result<f64> {
    Ok(heston_vs_rate(spec, v_t, tau)? + spec.jump_variance_rate())
}

/// Steps of the fixed-step RK4 solver in [`affine_psi_phi`].
pub const ODE_STEPS: usize = 1000;

/// Solution of `Ψ' = 1 - κΨ`, `Φ' = κθΨ + j` on `[0, τ]` from zero, so that the expected
/// quadratic variation over `τ` is `V₀ Ψ(τ) + Φ(τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPhi {
    /// RK4 solution.
    pub psi: f64,
    pub phi: f64,
    /// Closed form `Ψ = (1 - e^{-κτ})/κ`, `Φ = θ(τ - Ψ) + jτ`.
    pub psi_exact: f64,
    pub phi_exact: f64,
}

/// Ψ and Φ of the linear system for the expected quadratic variation, by RK4 with
/// `τ/1000` steps and in closed form.
pub fn affine_psi_phi(kappa: f64, theta: f64, jump_rate: f64, tau: f64) -> Result<PsiPhi> {
    check_tau(tau)?;
    if !(kappa >= 0.0) {
        return Err(Error::param("kappa", "must be non-negative"));
    }
    let f = |psi: f64| (1.0 - kappa * psi, kappa * theta * psi + jump_rate);
    let h = tau / ODE_STEPS as f64;
    let (mut psi, mut phi) = (0.0_f64, 0.0_f64);
    for _ in 0..ODE_STEPS {
        let k1 = f(psi);
        let k2 = f(psi + 0.5 * h * k1.0);
        let k3 = f(psi + 0.5 * h * k2.0);
        let k4 = f(psi + h * k3.0);
        psi += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        phi += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    let psi_exact = tau * heston_weight(kappa, tau);
    let phi_exact = theta * (tau - psi_exact) + jump_rate * tau;
    Ok(PsiPhi {
        psi,
        phi,
        psi_exact,
        phi_exact,
    })
}

/// Jump correction to the replication rate, `-2λ E[e^ζ - 1 - ζ - ζ²/2]`, by 64-node
/// Gauss-Hermite quadrature.
pub fn epsilon_jump(lambda: f64, jumps: NormalJumps, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let rule = GaussHermite::new(64);
    let e = rule.normal_expectation(jumps.mean, jumps.sd, |z| libm::expm1(z) - z - 0.5 * z * z);
    Ok(-2.0 * lambda * e)
}

/// `-2λ (e^{m + s²/2} - 1 - m - (m² + s²)/2)` from the lognormal moments.
pub fn epsilon_jump_closed_form(lambda: f64, jumps: NormalJumps) -> f64 {
    let NormalJumps { mean, sd } = jumps;
    -2.0 * lambda * (libm::expm1(mean + 0.5 * sd * sd) - mean - 0.5 * (mean * mean + sd * sd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heston() -> ModelSpec {
        ModelSpec::heston(2.0, 0.04, 0.3, 0.0, 0.04)
    }

    #[test]
    fn heston_rate_examples() {
        let spec = heston();
        for tau in [1.0 / 52.0, 1.0 / 12.0, 2.0] {
            assert!((heston_vs_rate(&spec, 0.04, tau).unwrap() - 0.04).abs() < 1e-16);
        }
        let r = heston_vs_rate(&spec, 0.09, 1.0 / 12.0).unwrap();
        assert!((r - 0.086_055_482_5).abs() < 1e-10);
        let mut flat = spec;
        flat.kappa = 1e-12;
        assert!((heston_vs_rate(&flat, 0.09, 1.0 / 12.0).unwrap() - 0.09).abs() < 1e-8);
        flat.kappa = 0.0;
        assert_eq!(heston_vs_rate(&flat, 0.09, 1.0 / 12.0).unwrap(), 0.09);
        assert!(heston_vs_rate(&spec, 0.09, 0.0).is_err());
    }

    #[test]
    fn weight_is_decreasing_in_kappa() {
        let mut prev = 1.0;
        for i in 1..200 {
            let w = heston_weight(0.1 * i as f64, 1.0 / 12.0);
            assert!(w > 0.0 && w < prev);
            prev = w;
        }
    }

    #[test]
    fn bates_adds_jump_variance() {
        let jumps = NormalJumps {
            mean: 0.0,
            sd: 0.01,
        };
        let spec = ModelSpec::bates(2.0, 0.04, 0.3, 0.0, 0.04, 36.0, jumps);
        let h = heston_vs_rate(&spec, 0.06, 1.0 / 12.0).unwrap();
        assert!((bates_vs_rate(&spec, 0.06, 1.0 / 12.0).unwrap() - h - 0.0036).abs() < 1e-15);
        assert_eq!(
            bates_vs_rate(&heston(), 0.06, 0.1),
            heston_vs_rate(&heston(), 0.06, 0.1)
        );
    }

    #[test]
    fn psi_phi_matches_closed_form() {
        for kappa in [0.1, 1.0, 2.0, 5.0] {
            for tau in [1.0 / 52.0, 1.0 / 12.0, 1.0] {
                let s = affine_psi_phi(kappa, 0.04, 0.0, tau).unwrap();
                assert!((s.psi - s.psi_exact).abs() < 1e-10);
                assert!((s.phi - s.phi_exact).abs() < 1e-10);
                assert!(s.psi > 0.0 && s.phi > 0.0);
                // dividing by τ gives the Heston loading and intercept
                let w = heston_weight(kappa, tau);
                assert!((s.psi_exact / tau - w).abs() < 1e-14);
                assert!((s.phi_exact / tau - 0.04 * (1.0 - w)).abs() < 1e-14);
            }
        }
        let s = affine_psi_phi(0.0, 0.04, 0.0, 0.5).unwrap();
        assert!((s.psi - 0.5).abs() < 1e-15 && s.phi == 0.0);
        let s = affine_psi_phi(2.0, 0.04, 0.0036, 1.0 / 12.0).unwrap();
        assert!((s.phi - s.phi_exact).abs() < 1e-12);
    }

    #[test]
    fn epsilon_examples() {
        let jumps = NormalJumps { mean: 0.0, sd: 0.1 };
        assert_eq!(epsilon_jump(0.0, jumps, 1.0).unwrap(), 0.0);
        assert!(
            epsilon_jump(5.0, NormalJumps::default(), 1.0)
                .unwrap()
                .abs()
                < 1e-20
        );
        let q = epsilon_jump(10.0, jumps, 1.0 / 12.0).unwrap();
        let c = epsilon_jump_closed_form(10.0, jumps);
        assert!((q - c).abs() < 1e-10);
        assert!((c + 2.504_171_88e-4).abs() < 1e-12);
        let skewed = NormalJumps {
            mean: -0.05,
            sd: 0.08,
        };
        let q = epsilon_jump(3.0, skewed, 1.0).unwrap();
        assert!((q - epsilon_jump_closed_form(3.0, skewed)).abs() < 1e-14);
    }
}
