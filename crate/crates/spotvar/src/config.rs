//! TOML run configuration.
//!
//! Relative paths are resolved against the directory of the config file. The output root can
//! be overridden with the `SPOTVAR_OUTPUT_DIR` environment variable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spotvar_core::diagnostics::JumpTestConfig;
use spotvar_core::econometrics::Framework;
use spotvar_core::models::{ModelKind, ModelSpec};

use crate::error::{AppError, AppResult};

pub const OUTPUT_DIR_ENV: &str = "SPOTVAR_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub source: SourceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub jump_test: JumpTestConfig,
    #[serde(default)]
    pub regression: RegressionConfig,
    #[serde(default)]
    pub signature: SignatureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication: Option<ReplicationConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Simulation,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    /// Tick files (csv source).
    #[serde(default)]
    pub ticks: Vec<PathBuf>,
    /// VIX opens, `date,open` (csv source).
    #[serde(default)]
    pub vix: Option<PathBuf>,
    #[serde(default)]
    pub format: CsvFormat,
}

/// Layout of a tick file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvFormat {
    pub timestamp_column: usize,
    pub price_column: usize,
    /// chrono format string; ISO-8601 (`T` or space separated, optional fraction) when unset.
    pub timestamp_format: Option<String>,
    pub delimiter: char,
    /// Whether the first row is a header; sniffed from the first row when unset.
    pub has_header: Option<bool>,
    /// Seconds per session; tick times are measured from the first tick of each date.
    pub session_length: f64,
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat {
            timestamp_column: 0,
            price_column: 1,
            timestamp_format: None,
            delimiter: ',',
            has_header: None,
            session_length: spotvar_core::market::SESSION_SECONDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub days: usize,
    pub ticks_per_day: usize,
    pub seed: u64,
    /// Calendar year of the first simulated session.
    pub base_year: i32,
    pub session_length: f64,
    pub initial_price: f64,
    /// Horizon of the simulated swap rate behind the VIX quotes, in years.
    pub vix_horizon: f64,
    /// Standard deviation of i.i.d. noise added to the simulated rate before quoting.
    pub vix_noise: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            days: 252,
            ticks_per_day: 390,
            seed: 1,
            base_year: 2010,
            session_length: spotvar_core::market::SESSION_SECONDS,
            initial_price: 100.0,
            vix_horizon: 30.0 / 365.0,
            vix_noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Evaluation point of the daily estimate, in minutes after the open.
    pub eval_offset_minutes: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            eval_offset_minutes: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    pub frameworks: Vec<Framework>,
    pub yearly_splits: bool,
    /// Newey-West lags; the automatic rule when unset.
    pub hac_lags: Option<usize>,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            frameworks: Framework::ALL.to_vec(),
            yearly_splits: true,
            hac_lags: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignatureConfig {
    pub intervals: Vec<f64>,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        SignatureConfig {
            intervals: vec![60.0, 120.0, 300.0, 600.0, 900.0, 1800.0],
        }
    }
}

/// Option chain for `replicate-vix`: a `strike,call,put` CSV plus the contract terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationConfig {
    pub chain: PathBuf,
    pub forward: f64,
    #[serde(default)]
    pub rate: f64,
    pub maturity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("output"),
        }
    }
}

impl PipelineConfig {
    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.apply_env();
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.source.ticks.iter_mut().for_each(join);
        if let Some(v) = self.source.vix.as_mut() {
            join(v);
        }
        if let Some(r) = self.replication.as_mut() {
            join(&mut r.chain);
        }
        join(&mut self.output.dir);
    }

    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output.dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |msg: String| Err(AppError::Config(msg));
        match self.source.kind {
            SourceKind::Csv => {
                if self.source.ticks.is_empty() {
                    return bad("csv source needs at least one tick file".into());
                }
                let vix = self
                    .source
                    .vix
                    .as_ref()
                    .ok_or_else(|| AppError::Config("csv source needs a vix file".into()))?;
                for p in self.source.ticks.iter().chain(std::iter::once(vix)) {
                    if !p.is_file() {
                        return bad(format!("{} does not exist", p.display()));
                    }
                }
                let f = &self.source.format;
                if !(f.session_length > 0.0 && f.session_length.is_finite()) {
                    return bad("format.session_length must be positive".into());
                }
                if f.timestamp_column == f.price_column {
                    return bad("timestamp and price columns must differ".into());
                }
            }
            SourceKind::Simulation => {
                let Some(model) = self.model.as_ref() else {
                    return bad("simulation source needs a [model] section".into());
                };
                model
                    .validate()
                    .map_err(|e| AppError::Config(e.to_string()))?;
                let s = &self.simulation;
                if s.days < 1 || s.ticks_per_day < 1 {
                    return bad("simulation days and ticks_per_day must be at least 1".into());
                }
                if !(s.session_length > 0.0 && s.initial_price > 0.0 && s.vix_horizon > 0.0) {
                    return bad(
                        "session_length, initial_price and vix_horizon must be positive".into(),
                    );
                }
                if !(s.vix_noise >= 0.0 && s.vix_noise.is_finite()) {
                    return bad("vix_noise must be non-negative".into());
                }
                if !(1..=9999).contains(&s.base_year) {
                    return bad("base_year out of range".into());
                }
            }
        }
        let minutes = self.session_length() / 60.0;
        let offset = self.estimator.eval_offset_minutes;
        if !(offset > 0.0 && offset < minutes) {
            return bad(format!("eval_offset_minutes must lie in (0, {minutes})"));
        }
        let j = &self.jump_test;
        if !(j.confidence > 0.0 && j.confidence < 1.0) {
            return bad("jump_test.confidence must lie in (0, 1)".into());
        }
        if !(j.threshold_c > 0.0) || j.window < 2 || j.iterations < 1 {
            return bad("jump_test needs threshold_c > 0, window ≥ 2, iterations ≥ 1".into());
        }
        if self.regression.frameworks.is_empty() {
            return bad("regression.frameworks is empty".into());
        }
        if self.signature.intervals.is_empty()
            || self
                .signature
                .intervals
                .iter()
                .any(|f| !(*f > 0.0 && f.is_finite()))
        {
            return bad("signature.intervals must be positive".into());
        }
        if let Some(r) = &self.replication {
            if !(r.forward > 0.0 && r.maturity > 0.0 && r.rate.is_finite()) {
                return bad("replication needs forward > 0 and maturity > 0".into());
            }
        }
        Ok(())
    }

    pub fn session_length(&self) -> f64 {
        match self.source.kind {
            SourceKind::Simulation => self.simulation.session_length,
            SourceKind::Csv => self.source.format.session_length,
        }
    }

    /// Phase in `[0, 2π]` of the daily evaluation point.
    pub fn eval_phase(&self) -> f64 {
        std::f64::consts::TAU * self.estimator.eval_offset_minutes * 60.0 / self.session_length()
    }

    pub fn model_kind(&self) -> Option<ModelKind> {
        self.model.map(|m| m.kind)
    }
}
