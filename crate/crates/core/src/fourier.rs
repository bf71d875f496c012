//! Fourier estimation of the spot variance on a `[0, 2π]` session clock.
//!
//! The noise-robust estimator convolves the Fourier coefficients of the returns to obtain
//! the coefficients of the variance path and reconstructs it by Fejér summation. The
//! jump-robust estimator smooths `cos(√m ΔX)` with the Fejér kernel, which estimates
//! `exp(-V/2)` locally, and inverts that map.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::diagnostics::bipower_variation;
use crate::market::{PricePath, RescaledSeries, SESSIONS_PER_YEAR};
use crate::{Error, Result};

/// Relative tolerance on the imaginary residue of a reconstructed (real) path.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Lower clamp applied to the smoothed cosine average before taking its logarithm.
pub const RHO_FLOOR: f64 = 1e-8;

/// Complex Fourier coefficients indexed by `k = -order..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    order: usize,
    values: Vec<Complex64>,
}

impl CoeffVector {
    pub fn new(order: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != 2 * order + 1 {
            return Err(Error::InvalidSeries(
                "coefficient vector length must be 2·order + 1",
            ));
        }
        Ok(CoeffVector { order, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of frequency `k`; panics when `|k| > order`.
    pub fn get(&self, k: i64) -> Complex64 {
        let idx = k + self.order as i64;
        assert!(
            idx >= 0 && (idx as usize) < self.values.len(),
            "frequency {k} outside order {}",
            self.order
        );
        self.values[idx as usize]
    }

    /// Values ordered from `-order` to `order`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest relative deviation from `c(-k) = conj(c(k))`.
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        (1..=self.order as i64)
            .map(|k| (self.get(-k) - self.get(k).conj()).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// `Σ_j w_j e^{-i k t_j}` for `k = 0..=order`.
///
/// Keeps the weighted phasors `w_j e^{-ikt_j}` and advances them one frequency at a time by
/// complex multiplication, summing in the same pass; every 64 frequencies they are reseeded
/// from `sin_cos` so rounding does not accumulate. Eight accumulator lanes with a fixed
/// reduction order keep the result independent of vectorization.
fn phase_sums(phases: &[f64], weights: &[f64], order: usize) -> Vec<Complex64> {
    const RESEED: usize = 64;
    const LANES: usize = 8;
    let n = phases.len();
    debug_assert_eq!(n, weights.len());
    let padded = n.div_ceil(LANES) * LANES;
    let mut step_re = vec![1.0; padded];
    let mut step_im = vec![0.0; padded];
    let mut u_re = vec![0.0; padded];
    let mut u_im = vec![0.0; padded];
    for j in 0..n {
        let (s, c) = phases[j].sin_cos();
        step_re[j] = c;
        step_im[j] = -s;
        u_re[j] = weights[j];
    }
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 && k % RESEED == 0 {
            let kf = k as f64;
            for j in 0..n {
                let (s, c) = (kf * phases[j]).sin_cos();
                u_re[j] = weights[j] * c;
                u_im[j] = -weights[j] * s;
            }
        }
        let mut acc_re = [0.0_f64; LANES];
        let mut acc_im = [0.0_f64; LANES];
        let chunks = u_re
            .chunks_exact_mut(LANES)
            .zip(u_im.chunks_exact_mut(LANES))
            .zip(step_re.chunks_exact(LANES).zip(step_im.chunks_exact(LANES)));
        for ((ur, ui), (sr, si)) in chunks {
            for l in 0..LANES {
                let (a, b) = (ur[l], ui[l]);
                acc_re[l] += a;
                acc_im[l] += b;
                ur[l] = a * sr[l] - b * si[l];
                ui[l] = a * si[l] + b * sr[l];
            }
        }
        out.push(Complex64::new(reduce(&acc_re), reduce(&acc_im)));
    }
    out
}

fn reduce(acc: &[f64; 8]) -> f64 {
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))
}

fn hermitian_extend(order: usize, nonneg: Vec<Complex64>) -> CoeffVector {
    let mut values = Vec::with_capacity(2 * order + 1);
    values.extend(nonneg[1..].iter().rev().map(|c| c.conj()));
    values.extend(nonneg);
    CoeffVector { order, values }
}

/// Discrete Fourier coefficients of the returns,
/// `c_k(dX) = (1/2π) Σ_j e^{-ik t_{j-1}} (X_{t_j} - X_{t_{j-1}})` for `|k| ≤ order`.
///
/// Negative frequencies are filled in by conjugation, so the output is exactly Hermitian.
pub fn fourier_return_coeffs(series: &RescaledSeries, order: usize) -> CoeffVector {
    let m = series.m();
    let weights: Vec<f64> = series.returns().map(|r| r / TAU).collect();
    hermitian_extend(order, phase_sums(&series.phases()[..m], &weights, order))
}

/// Convolution estimate of the variance coefficients,
/// `c_k(V) = 2π/(2N+1) Σ_{|h|≤N} c_h(dX) c_{k-h}(dX)` for `|k| ≤ N`.
pub fn variance_fourier_coeffs(return_coeffs: &CoeffVector, n: usize) -> Result<CoeffVector> {
    if return_coeffs.order() < 2 * n {
        return Err(Error::InsufficientOrder {
            needed: 2 * n,
            got: return_coeffs.order(),
        });
    }
    let scale = TAU / (2 * n + 1) as f64;
    let ni = n as i64;
    let values = (-ni..=ni)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for h in -ni..=ni {
                acc += return_coeffs.get(h) * return_coeffs.get(k - h);
            }
            acc * scale
        })
        .collect();
    CoeffVector::new(n, values)
}

/// Which estimator produced a spot-variance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EstimatorKind {
    NoiseRobust,
    JumpRobust,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::NoiseRobust => "noise_robust",
            EstimatorKind::JumpRobust => "jump_robust",
        }
    }
}

/// Cutting frequencies: `n` is the convolution half-width, `m` the Fejér truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CuttingFrequencies {
    pub n: usize,
    pub m: usize,
}

impl CuttingFrequencies {
    /// Checks `1 ≤ M ≤ N ≤ returns/2`.
    pub fn validate(&self, returns: usize) -> Result<()> {
        if self.m < 1 || self.m > self.n || 2 * self.n > returns {
            return Err(Error::param(
                "cutting_frequencies",
                alloc::format!(
                    "need 1 <= M <= N <= m/2, got N = {}, M = {}, m = {returns}",
                    self.n,
                    self.m
                ),
            ));
        }
        Ok(())
    }
}

/// The cutting-frequency rules: `N = m^{2/3}/2`, `M = m^{2/3}/(16π)` for the noise-robust
/// estimator and `M = (m/4)^{2/3}` for the jump-robust one (where `N` is unused and set to `M`).
pub fn select_cutting_frequencies(m: usize, kind: EstimatorKind) -> Result<CuttingFrequencies> {
    if m < 8 {
        return Err(Error::TooShort { needed: 8, got: m });
    }
    let two_thirds = |x: f64| {
        let c = libm::cbrt(x);
        c * c
    };
    let freqs = match kind {
        EstimatorKind::NoiseRobust => {
            let p = two_thirds(m as f64);
            CuttingFrequencies {
                n: (p / 2.0).floor() as usize,
                m: ((p / (16.0 * PI)).floor() as usize).max(1),
            }
        }
        EstimatorKind::JumpRobust => {
            let cut = (two_thirds(m as f64 / 4.0).floor() as usize).max(1);
            CuttingFrequencies { n: cut, m: cut }
        }
    };
    Ok(freqs)
}

/// A spot-variance value at one phase of the session.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpotVarianceEstimate {
    pub eval_phase: f64,
    /// Variance per unit of `[0, 2π]` time.
    pub value: f64,
    /// Variance per year: `value · 2π · 252`.
    pub annualized: f64,
    pub kind: EstimatorKind,
    /// A negative Fejér value was floored at zero.
    pub floored: bool,
    /// The smoothed cosine average was clamped before the logarithm.
    pub clamped: bool,
}

impl SpotVarianceEstimate {
    fn new(eval_phase: f64, value: f64, kind: EstimatorKind) -> Self {
        SpotVarianceEstimate {
            eval_phase,
            value,
            annualized: annualize(value),
            kind,
            floored: false,
            clamped: false,
        }
    }
}

/// Converts a variance rate on the `[0, 2π]` clock into a per-year rate.
pub fn annualize(value: f64) -> f64 {
    value * TAU * SESSIONS_PER_YEAR
}

fn check_phase(eval_phase: f64) -> Result<()> {
    if !(eval_phase > 0.0 && eval_phase < TAU) {
        return Err(Error::param("eval_phase", "must lie in (0, 2π)"));
    }
    Ok(())
}

/// Fejér-weighted partial sum of the variance coefficients, evaluable at any phase.
#[derive(Debug, Clone)]
pub struct FejerReconstruction {
    coeffs: CoeffVector,
    cut: usize,
}

impl FejerReconstruction {
    /// Estimates the variance coefficients from `series` with convolution width `freqs.n`.
    pub fn from_series(series: &RescaledSeries, freqs: CuttingFrequencies) -> Result<Self> {
        freqs.validate(series.m())?;
        let returns = fourier_return_coeffs(series, 2 * freqs.n);
        let coeffs = variance_fourier_coeffs(&returns, freqs.n)?;
        Ok(FejerReconstruction {
            coeffs,
            cut: freqs.m,
        })
    }

    /// The variance coefficients `c_k(V)`, `|k| ≤ N`.
    pub fn variance_coeffs(&self) -> &CoeffVector {
        &self.coeffs
    }

    /// `Σ_{|k|<M} (1 - |k|/M) c_k(V) e^{ikt}` before discarding the imaginary part.
    pub fn complex_value_at(&self, t: f64) -> Complex64 {
        let cut = self.cut as i64;
        let mf = self.cut as f64;
        (1 - cut..cut)
            .map(|k| {
                let weight = 1.0 - (k.abs() as f64) / mf;
                self.coeffs.get(k) * Complex64::from_polar(weight, k as f64 * t)
            })
            .sum()
    }

    /// The real reconstruction at `t` (no flooring).
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let z = self.complex_value_at(t);
        if z.im.abs() > IMAG_TOLERANCE * z.re.abs().max(f64::MIN_POSITIVE) && z.im.abs() > 1e-300 {
            return Err(Error::Numerical(alloc::format!(
                "imaginary residue {:e} exceeds tolerance at phase {t}",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// Floored estimate at `eval_phase ∈ (0, 2π)`.
    pub fn estimate(&self, eval_phase: f64) -> Result<SpotVarianceEstimate> {
        check_phase(eval_phase)?;
        let raw = self.value_at(eval_phase)?;
        let mut est =
            SpotVarianceEstimate::new(eval_phase, raw.max(0.0), EstimatorKind::NoiseRobust);
        est.floored = raw < 0.0;
        Ok(est)
    }
}

/// Noise-robust Fourier spot-variance estimate at `eval_phase`.
pub fn spot_variance_fejer(
    series: &RescaledSeries,
    freqs: CuttingFrequencies,
    eval_phase: f64,
) -> Result<SpotVarianceEstimate> {
    check_phase(eval_phase)?;
    FejerReconstruction::from_series(series, freqs)?.estimate(eval_phase)
}

/// Fejér kernel `F_M(x) = (1/M) (sin(Mx/2) / sin(x/2))²`, equal to `M` where `sin(x/2) = 0`.
pub fn fejer_kernel(x: f64, cut: usize) -> f64 {
    let mf = cut as f64;
    let den = (0.5 * x).sin();
    if den.abs() < 1e-12 {
        return mf;
    }
    let num = (0.5 * mf * x).sin();
    num * num / (den * den * mf)
}

/// Fourier coefficients of `cos(√m ΔX)`:
/// `Σ_j (1/m) e^{-ik t_{j-1}} cos(√m (X_{t_j} - X_{t_{j-1}}))` for `|k| ≤ order`.
pub fn robust_rho_coeffs(series: &RescaledSeries, order: usize) -> CoeffVector {
    let m = series.m();
    let root_m = (m as f64).sqrt();
    let weights: Vec<f64> = series
        .returns()
        .map(|r| (root_m * r).cos() / m as f64)
        .collect();
    hermitian_extend(order, phase_sums(&series.phases()[..m], &weights, order))
}

/// How returns are scaled before the cosine transform of the jump-robust estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ReturnScale {
    /// `g(√m ΔX) = cos(√m ΔX)`, inverted through `ϱ(V) = e^{-V/2}` with `V` per session.
    Raw,
    /// `cos(√m ΔX / s)` with `s²` the session's bipower variation, inverted through
    /// `e^{-V/(2 s²)}`. Standardized returns make the cosine bounded-influence at the
    /// scale of a typical return instead of only for returns of order one.
    Standardized,
}

/// Jump-robust spot-variance estimate from the Fejér-smoothed cosine transform.
///
/// The smoothed average `Σ_j F_M(t - t_{j-1}) g_j / Σ_j F_M(t - t_{j-1})` equals one for a
/// constant price on any grid; it is clamped to `[1e-8, 1]` before inversion and the
/// estimate is flagged when the clamp binds.
///
/// Returns are standardized by the session's bipower scale; see
/// [`spot_variance_jump_robust_with`] for the unscaled transform.
pub fn spot_variance_jump_robust(
    series: &RescaledSeries,
    cut: usize,
    eval_phase: f64,
) -> Result<SpotVarianceEstimate> {
    spot_variance_jump_robust_with(series, cut, eval_phase, ReturnScale::Standardized)
}

pub fn spot_variance_jump_robust_with(
    series: &RescaledSeries,
    cut: usize,
    eval_phase: f64,
    scale: ReturnScale,
) -> Result<SpotVarianceEstimate> {
    check_phase(eval_phase)?;
    if cut < 1 {
        return Err(Error::param("M", "must be at least 1"));
    }
    let m = series.m();
    let root_m = (m as f64).sqrt();
    let s2 = match scale {
        ReturnScale::Raw => 1.0,
        ReturnScale::Standardized => bipower_variation(series),
    };
    if s2 <= 0.0 {
        // no movement at bipower resolution; the cosine average is identically one
        return Ok(SpotVarianceEstimate::new(
            eval_phase,
            0.0,
            EstimatorKind::JumpRobust,
        ));
    }
    let inv_s = 1.0 / s2.sqrt();
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, &t) in series.returns().zip(series.phases()) {
        let w = fejer_kernel(eval_phase - t, cut);
        num += w * (root_m * r * inv_s).cos();
        den += w;
    }
    let rho = num / den;
    let clamped = rho <= RHO_FLOOR;
    let rho = rho.clamp(RHO_FLOOR, 1.0);
    let per_session = -2.0 * s2 * rho.ln();
    let mut est =
        SpotVarianceEstimate::new(eval_phase, per_session / TAU, EstimatorKind::JumpRobust);
    est.clamped = clamped;
    Ok(est)
}
