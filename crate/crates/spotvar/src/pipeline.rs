//! Stage orchestration behind every CLI command.
//!
//! Stages run in a fixed order: load (or simulate), jump test, estimate, panel, pretests,
//! regress, signature, write. Per-day work in the jump-test and estimate stages runs on the
//! rayon pool; results are collected in date order, so outputs do not depend on the schedule.
//! Nothing is written before the write stage, and a failure there removes what was written.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use chrono::{Duration, NaiveDate, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spotvar_core::diagnostics::{jump_test_with, signature_curve, subsample, SignatureCurve};
use spotvar_core::econometrics::{adf_test, regress};
use spotvar_core::fourier::{
    select_cutting_frequencies, spot_variance_fejer, spot_variance_jump_robust, EstimatorKind,
    SpotVarianceEstimate,
};
use spotvar_core::market::{
    build_panel, vix_quote_for_rate, DailyPanel, PricePath, TickSeries, MIN_YEAR_ROWS,
};
use spotvar_core::models::{
    bates_vs_rate, epsilon_jump, heston_vs_rate, simulate, simulated_date, vs_static_replication,
    ModelKind, OptionChain,
};
use spotvar_core::stats::TestStatistic;

use crate::config::{PipelineConfig, SourceKind};
use crate::error::{AppError, AppResult};
use crate::formats::{self, Artifact, OutputDir};
use crate::ingest;
use crate::report::{self, ReportBlock};

/// Sampling interval for the jump test and for jump-day estimates, in seconds.
pub const SPARSE_INTERVAL: f64 = 300.0;

/// ADF confidence for the pretests.
const PRETEST_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Estimate,
    JumpScan,
    Signature,
    Regress,
    Run,
    ReplicateVix,
}

/// Sessions and quotes entering the pipeline.
#[derive(Debug, Clone, Default)]
pub struct SessionData {
    pub sessions: Vec<TickSeries>,
    pub vix: Vec<(NaiveDate, f64)>,
    /// Sessions dropped at ingestion for having too few ticks.
    pub skipped: Vec<(NaiveDate, usize)>,
    /// Simulated sessions containing at least one jump.
    pub true_jump_days: Option<usize>,
}

/// Jump-test outcome and spot-variance estimate of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub date: NaiveDate,
    pub z: f64,
    pub jump: bool,
    pub estimate: SpotVarianceEstimate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub sessions: usize,
    pub sessions_skipped: usize,
    pub true_jump_days: Option<usize>,
    pub jump_days: usize,
    pub floored: usize,
    pub clamped: usize,
    pub panel_rows: usize,
    pub panel_dropped: usize,
    pub regressions: usize,
    pub years_skipped: Vec<(i32, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command: what ran, on what, and what it wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub started_at: String,
    pub config: PipelineConfig,
    pub versions: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub counts: StageCounts,
    pub stages: Vec<StageTiming>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    /// The manifest with timings and the start time blanked, for comparing runs.
    pub fn without_clock(&self) -> RunManifest {
        let mut m = self.clone();
        m.started_at.clear();
        m.stages.iter_mut().for_each(|s| s.seconds = 0.0);
        m
    }
}

struct Recorder {
    counts: StageCounts,
    stages: Vec<StageTiming>,
}

impl Recorder {
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce() -> AppResult<T>) -> AppResult<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(name));
        self.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Simulates the configured model: one session per day plus VIX quotes generated from the
/// model swap rate at each open.
pub fn simulate_sessions(config: &PipelineConfig) -> AppResult<SessionData> {
    let spec = config
        .model
        .ok_or_else(|| AppError::Config("simulation needs a [model] section".into()))?;
    let sim = &config.simulation;
    let paths = simulate(&spec, sim.days, sim.ticks_per_day, sim.seed)?;
    let level = sim.initial_price.ln();
    let mut noise = NoiseStream::new(sim.seed);
    let mut data = SessionData {
        true_jump_days: Some(paths.iter().filter(|p| !p.jump_times.is_empty()).count()),
        ..SessionData::default()
    };
    for path in &paths {
        let date = simulated_date(sim.base_year, path.day_index);
        let prices = path.series.log_prices().iter().map(|x| x + level).collect();
        data.sessions
            .push(TickSeries::equispaced(date, prices, sim.session_length)?);
        let v = path.open_variance();
        let rate = match spec.kind {
            ModelKind::Heston => heston_vs_rate(&spec, v, sim.vix_horizon)?,
            ModelKind::Bates => bates_vs_rate(&spec, v, sim.vix_horizon)?,
        };
        let noisy = (rate + sim.vix_noise * noise.next_normal()).max(0.0);
        data.vix.push((date, vix_quote_for_rate(noisy)?));
    }
    Ok(data)
}

/// Quote noise on its own ChaCha stream so it never disturbs the price paths.
struct NoiseStream(rand_chacha::ChaCha8Rng);

impl NoiseStream {
    fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        NoiseStream(rng)
    }

    fn next_normal(&mut self) -> f64 {
        use rand::Rng;
        self.0.sample(rand_distr::StandardNormal)
    }
}

pub fn load_sessions(config: &PipelineConfig) -> AppResult<SessionData> {
    match config.source.kind {
        SourceKind::Simulation => simulate_sessions(config),
        SourceKind::Csv => {
            let mut data = SessionData::default();
            for path in &config.source.ticks {
                let load = ingest::load_tick_csv(path, &config.source.format)?;
                data.sessions.extend(load.sessions);
                data.skipped.extend(load.skipped);
            }
            data.sessions.sort_by_key(|s| s.session_date());
            if let Some(w) = data
                .sessions
                .windows(2)
                .find(|w| w[0].session_date() == w[1].session_date())
            {
                return Err(AppError::Data(format!(
                    "session {} appears in more than one tick file",
                    w[0].session_date()
                )));
            }
            data.skipped.sort();
            let vix = config.source.vix.as_deref().expect("validated");
            data.vix = ingest::load_vix_csv(vix)?;
            Ok(data)
        }
    }
}

fn sparse(session: &TickSeries) -> AppResult<TickSeries> {
    Ok(subsample(session, SPARSE_INTERVAL)?)
}

/// Jump test of every session on its 5-minute subsample.
pub fn jump_scan(
    sessions: &[TickSeries],
    config: &PipelineConfig,
) -> AppResult<Vec<(NaiveDate, TestStatistic)>> {
    sessions
        .par_iter()
        .map(|s| {
            let t = jump_test_with(&sparse(s)?, &config.jump_test)
                .map_err(|e| AppError::from(e).in_stage_date(s.session_date()))?;
            Ok((s.session_date(), t))
        })
        .collect()
}

impl AppError {
    fn in_stage_date(self, date: NaiveDate) -> AppError {
        match self {
            AppError::Data(m) => AppError::Data(format!("session {date}: {m}")),
            AppError::Numerical(m) => AppError::Numerical(format!("session {date}: {m}")),
            other => other,
        }
    }
}

/// Spot variance at the configured phase: the Fejér estimator on the full session for days
/// without a jump, the jump-robust estimator on the 5-minute subsample otherwise.
pub fn estimate_day(
    session: &TickSeries,
    jump: bool,
    phase: f64,
) -> AppResult<SpotVarianceEstimate> {
    if jump {
        let s = sparse(session)?.rescale_to_2pi();
        let cut = select_cutting_frequencies(s.m(), EstimatorKind::JumpRobust)?.m;
        Ok(spot_variance_jump_robust(&s, cut, phase)?)
    } else {
        let s = session.rescale_to_2pi();
        let freqs = select_cutting_frequencies(s.m(), EstimatorKind::NoiseRobust)?;
        Ok(spot_variance_fejer(&s, freqs, phase)?)
    }
}

pub fn estimate_days(
    sessions: &[TickSeries],
    tests: &[(NaiveDate, TestStatistic)],
    config: &PipelineConfig,
) -> AppResult<Vec<DayResult>> {
    let phase = config.eval_phase();
    sessions
        .par_iter()
        .zip(tests)
        .map(|(s, (date, t))| {
            let estimate = estimate_day(s, t.reject, phase).map_err(|e| e.in_stage_date(*date))?;
            Ok(DayResult {
                date: *date,
                z: t.value,
                jump: t.reject,
                estimate,
            })
        })
        .collect()
}

/// ADF pretests on the response and the spot-variance series.
pub fn pretests(panel: &DailyPanel) -> AppResult<Vec<(String, TestStatistic)>> {
    Ok(vec![
        (
            "vix_scaled".to_string(),
            adf_test(&panel.vix_scaled(), None, PRETEST_CONFIDENCE)?,
        ),
        (
            "v_hat".to_string(),
            adf_test(&panel.v_hat(), None, PRETEST_CONFIDENCE)?,
        ),
    ])
}

pub struct Regressions {
    pub blocks: Vec<ReportBlock>,
    /// Years with fewer than 30 rows and their row counts.
    pub years_skipped: Vec<(i32, usize)>,
}

/// Configured regressions on the full panel and, if enabled, on every calendar year with at
/// least 30 rows.
pub fn run_regressions(panel: &DailyPanel, config: &PipelineConfig) -> AppResult<Regressions> {
    let reg = &config.regression;
    let mut blocks = Vec::new();
    for &fw in &reg.frameworks {
        blocks.push(ReportBlock {
            year: None,
            report: regress(panel, fw, reg.hac_lags)?,
        });
    }
    let mut skipped = Vec::new();
    if reg.yearly_splits {
        let splits = panel.yearly_splits(MIN_YEAR_ROWS);
        skipped = splits.skipped;
        for &fw in &reg.frameworks {
            for (year, sub) in &splits.kept {
                let report =
                    regress(sub, fw, reg.hac_lags).map_err(|e| AppError::from(e).in_year(*year))?;
                blocks.push(ReportBlock {
                    year: Some(*year),
                    report,
                });
            }
        }
    }
    Ok(Regressions {
        blocks,
        years_skipped: skipped,
    })
}

impl AppError {
    fn in_year(self, year: i32) -> AppError {
        match self {
            AppError::Data(m) => AppError::Data(format!("year {year}: {m}")),
            AppError::Numerical(m) => AppError::Numerical(format!("year {year}: {m}")),
            other => other,
        }
    }
}

fn panel_from(
    data: &SessionData,
    days: &[DayResult],
) -> AppResult<spotvar_core::market::PanelBuild> {
    let estimates: Vec<(NaiveDate, f64)> = days
        .iter()
        .map(|d| (d.date, d.estimate.annualized))
        .collect();
    let flags: Vec<(NaiveDate, bool)> = days.iter().map(|d| (d.date, d.jump)).collect();
    Ok(build_panel(&data.sessions, &data.vix, &estimates, &flags)?)
}

fn tick_csv(sessions: &[TickSeries]) -> String {
    use std::fmt::Write as _;
    let open = NaiveTime::from_hms_opt(9, 30, 0).expect("valid time");
    let mut s = String::from("timestamp,price\n");
    for session in sessions {
        let start = session.session_date().and_time(open);
        for (t, x) in session.times().iter().zip(session.log_prices()) {
            let stamp = start + Duration::microseconds((t * 1e6).round() as i64);
            let _ = writeln!(s, "{},{}", stamp.format("%Y-%m-%dT%H:%M:%S%.f"), x.exp());
        }
    }
    s
}

fn replication(config: &PipelineConfig) -> AppResult<serde_json::Value> {
    let r = config
        .replication
        .as_ref()
        .ok_or_else(|| AppError::Config("replicate-vix needs a [replication] section".into()))?;
    let (strikes, calls, puts) = ingest::load_option_chain_csv(&r.chain)?;
    let chain = OptionChain::new(r.forward, r.rate, r.maturity, strikes, calls, puts)?;
    let rate = vs_static_replication(&chain)?;
    let parity = chain.parity_violations(1e-6 * r.forward);
    let mut out = serde_json::json!({
        "rate": rate,
        "vix": 100.0 * rate.sqrt(),
        "parity_violations": parity.iter().map(|&i| chain.strikes[i]).collect::<Vec<_>>(),
    });
    if let Some(spec) = config.model.filter(|m| m.lambda > 0.0) {
        let eps = epsilon_jump(spec.lambda, spec.jumps, r.maturity)?;
        out["jump_correction"] = eps.into();
        out["corrected_rate"] = (rate + eps).into();
    }
    Ok(out)
}

/// Everything a command produces before anything is written.
#[derive(Default)]
struct Products {
    files: Vec<(&'static str, String)>,
}

impl Products {
    fn add(&mut self, name: &'static str, contents: String) {
        self.files.push((name, contents));
    }
}

/// Runs `command` with `config`, writing its artifacts and `manifest.json` into the output
/// directory. `panel` replaces stages 1–4 of `regress` with a previously written panel.
pub fn run_command(
    command: Command,
    config: &PipelineConfig,
    panel: Option<&Path>,
) -> AppResult<RunManifest> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let mut rec = Recorder {
        counts: StageCounts::default(),
        stages: Vec::new(),
    };
    let mut products = Products::default();

    let needs_sessions = !matches!(command, Command::ReplicateVix)
        && !(command == Command::Regress && panel.is_some());
    let data = if needs_sessions {
        if command == Command::Simulate && config.source.kind != SourceKind::Simulation {
            return Err(AppError::Config(
                "simulate needs a simulation source".into(),
            ));
        }
        let data = rec.stage("load", || {
            let d = load_sessions(config)?;
            if d.sessions.is_empty() {
                return Err(AppError::Data("no sessions to process".into()));
            }
            Ok(d)
        })?;
        rec.counts.sessions = data.sessions.len();
        rec.counts.sessions_skipped = data.skipped.len();
        rec.counts.true_jump_days = data.true_jump_days;
        Some(data)
    } else {
        None
    };

    match command {
        Command::Simulate => {
            let data = data.as_ref().expect("loaded");
            products.add("ticks.csv", tick_csv(&data.sessions));
            products.add("vix.csv", formats::vix_csv(&data.vix));
        }
        Command::Signature => {
            let data = data.as_ref().expect("loaded");
            let curve = rec.stage("signature", || signature(data, config))?;
            products.add("signature.csv", formats::signature_csv(&curve));
        }
        Command::ReplicateVix => {
            let value = rec.stage("replicate", || replication(config))?;
            let text = serde_json::to_string_pretty(&value).expect("json value") + "\n";
            products.add("replication.json", text);
        }
        Command::JumpScan | Command::Estimate | Command::Regress | Command::Run => {
            let loaded_panel = match (command, panel) {
                (Command::Regress, Some(path)) => {
                    Some(rec.stage("load", || ingest::load_panel_csv(path))?)
                }
                _ => None,
            };
            let panel = match loaded_panel {
                Some(p) => p,
                None => {
                    let data = data.as_ref().expect("loaded");
                    let tests = rec.stage("jump_test", || jump_scan(&data.sessions, config))?;
                    rec.counts.jump_days = tests.iter().filter(|(_, t)| t.reject).count();
                    products.add("jump_flags.csv", formats::jump_flags_csv(&tests));
                    if command == Command::JumpScan {
                        return finish(command, config, started_at, rec, products);
                    }
                    let days =
                        rec.stage("estimate", || estimate_days(&data.sessions, &tests, config))?;
                    rec.counts.floored = days.iter().filter(|d| d.estimate.floored).count();
                    rec.counts.clamped = days.iter().filter(|d| d.estimate.clamped).count();
                    products.add("estimates.csv", formats::estimates_csv(&days));
                    if command == Command::Estimate {
                        return finish(command, config, started_at, rec, products);
                    }
                    let built = rec.stage("panel", || panel_from(data, &days))?;
                    rec.counts.panel_dropped = built.dropped;
                    products.add("panel.csv", formats::panel_csv(&built.panel));
                    built.panel
                }
            };
            rec.counts.panel_rows = panel.len();
            let tests = rec.stage("pretests", || pretests(&panel))?;
            products.add("pretests.csv", formats::pretests_csv(&tests));
            let Regressions {
                blocks,
                years_skipped,
            } = rec.stage("regress", || run_regressions(&panel, config))?;
            rec.counts.regressions = blocks.len();
            rec.counts.years_skipped = years_skipped;
            products.add("reports.csv", report::render_csv(&blocks));
            products.add("reports.json", report::render_json(&blocks)?);
            products.add("reports.txt", report::render_text(&blocks));
            if command == Command::Run {
                let data = data.as_ref().expect("loaded");
                let curve = rec.stage("signature", || signature(data, config))?;
                products.add("signature.csv", formats::signature_csv(&curve));
            }
        }
    }
    finish(command, config, started_at, rec, products)
}

fn signature(data: &SessionData, config: &PipelineConfig) -> AppResult<SignatureCurve> {
    Ok(signature_curve(
        &data.sessions,
        &config.signature.intervals,
    )?)
}

fn finish(
    command: Command,
    config: &PipelineConfig,
    started_at: String,
    mut rec: Recorder,
    products: Products,
) -> AppResult<RunManifest> {
    let write_start = Instant::now();
    let mut out = OutputDir::create(&config.output.dir).map_err(|e| e.in_stage("write"))?;
    let write_all = |out: &mut OutputDir| -> AppResult<()> {
        for (name, contents) in &products.files {
            out.write(name, contents.as_bytes())?;
        }
        Ok(())
    };
    if let Err(e) = write_all(&mut out) {
        out.discard();
        return Err(e.in_stage("write"));
    }
    rec.stages.push(StageTiming {
        stage: "write".to_string(),
        seconds: write_start.elapsed().as_secs_f64(),
    });
    let manifest = RunManifest {
        command,
        started_at,
        config: config.clone(),
        versions: BTreeMap::from([
            ("spotvar".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            (
                "spotvar-core".to_string(),
                spotvar_core::VERSION.to_string(),
            ),
        ]),
        seeds: match config.source.kind {
            SourceKind::Simulation => vec![config.simulation.seed],
            SourceKind::Csv => vec![],
        },
        counts: rec.counts,
        stages: rec.stages,
        artifacts: out.artifacts().to_vec(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = out.write("manifest.json", text.as_bytes()) {
        out.discard();
        return Err(e.in_stage("write"));
    }
    Ok(manifest)
}

/// Full pipeline: `run_command(Command::Run, ..)`.
pub fn run_pipeline(config: &PipelineConfig) -> AppResult<RunManifest> {
    run_command(Command::Run, config, None)
}
