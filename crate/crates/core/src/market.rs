//! Trading sessions, the `[0, 2π]` time change and the daily regression panel.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::f64::consts::TAU;

use chrono::{Datelike, NaiveDate};

use crate::{Error, Result};

/// Length of a regular 6.5-hour equity session in seconds.
pub const SESSION_SECONDS: f64 = 23_400.0;

/// Trading sessions per year, used for annualization.
pub const SESSIONS_PER_YEAR: f64 = 252.0;

/// Minimum number of rows for a yearly subsample or a link regression.
pub const MIN_YEAR_ROWS: usize = 30;

/// Anything that exposes a path of log-prices.
pub trait PricePath {
    fn log_prices(&self) -> &[f64];

    /// Number of returns.
    fn m(&self) -> usize {
        self.log_prices().len().saturating_sub(1)
    }

    fn returns(&self) -> Returns<'_> {
        Returns {
            prices: self.log_prices(),
            pos: 1,
        }
    }
}

/// Iterator over successive log-price differences.
#[derive(Debug, Clone)]
pub struct Returns<'a> {
    prices: &'a [f64],
    pos: usize,
}

impl Iterator for Returns<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let p = self.prices;
        if self.pos >= p.len() {
            return None;
        }
        let r = p[self.pos] - p[self.pos - 1];
        self.pos += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.prices.len().saturating_sub(self.pos);
        (n, Some(n))
    }
}

impl ExactSizeIterator for Returns<'_> {}

/// One trading session of log-prices, time measured in seconds since the first tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    session_date: NaiveDate,
    times: Vec<f64>,
    log_prices: Vec<f64>,
    session_length: f64,
}

impl TickSeries {
    pub fn new(
        session_date: NaiveDate,
        times: Vec<f64>,
        log_prices: Vec<f64>,
        session_length: f64,
    ) -> Result<Self> {
        if times.len() != log_prices.len() {
            return Err(Error::InvalidSeries(
                "times and log_prices differ in length",
            ));
        }
        if times.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: times.len(),
            });
        }
        if !(session_length.is_finite() && session_length > 0.0) {
            return Err(Error::param(
                "session_length",
                "must be positive and finite",
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidSeries("first time must be 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries("times must be strictly increasing"));
        }
        if times[times.len() - 1] > session_length {
            return Err(Error::InvalidSeries("last time exceeds the session length"));
        }
        if log_prices.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSeries("non-finite log-price"));
        }
        Ok(TickSeries {
            session_date,
            times,
            log_prices,
            session_length,
        })
    }

    /// A session sampled on the regular grid `0, Δ, 2Δ, …, session_length`.
    pub fn equispaced(
        session_date: NaiveDate,
        log_prices: Vec<f64>,
        session_length: f64,
    ) -> Result<Self> {
        let m = log_prices.len().saturating_sub(1).max(1) as f64;
        let times = (0..log_prices.len())
            .map(|j| session_length * j as f64 / m)
            .collect();
        Self::new(session_date, times, log_prices, session_length)
    }

    pub fn session_date(&self) -> NaiveDate {
        self.session_date
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn session_length(&self) -> f64 {
        self.session_length
    }

    /// Opening log-price.
    pub fn open(&self) -> f64 {
        self.log_prices[0]
    }

    /// Maps session time affinely onto `[0, 2π]`.
    pub fn rescale_to_2pi(&self) -> RescaledSeries {
        let scale = TAU / self.session_length;
        let mut phases: Vec<f64> = self.times.iter().map(|&t| t * scale).collect();
        // guard the right end against rounding past 2π
        if let Some(last) = phases.last_mut() {
            *last = last.min(TAU);
        }
        RescaledSeries {
            phases,
            log_prices: self.log_prices.clone(),
        }
    }
}

impl PricePath for TickSeries {
    fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }
}

/// A session on the `[0, 2π]` clock used by the Fourier estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSeries {
    phases: Vec<f64>,
    log_prices: Vec<f64>,
}

impl RescaledSeries {
    pub fn new(phases: Vec<f64>, log_prices: Vec<f64>) -> Result<Self> {
        if phases.len() != log_prices.len() {
            return Err(Error::InvalidSeries(
                "phases and log_prices differ in length",
            ));
        }
        if phases.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: phases.len(),
            });
        }
        if phases[0] != 0.0 || phases[phases.len() - 1] > TAU {
            return Err(Error::InvalidSeries("phases must start at 0 and end by 2π"));
        }
        if phases.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries("phases must be strictly increasing"));
        }
        if log_prices.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSeries("non-finite log-price"));
        }
        Ok(RescaledSeries { phases, log_prices })
    }

    /// Log-prices observed on the equispaced grid `2πj/m`, `j = 0..=m`.
    pub fn equispaced(log_prices: Vec<f64>) -> Result<Self> {
        let m = log_prices.len().saturating_sub(1).max(1) as f64;
        let phases = (0..log_prices.len()).map(|j| TAU * j as f64 / m).collect();
        Self::new(phases, log_prices)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

impl PricePath for RescaledSeries {
    fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }
}

/// Converts a VIX quote in index points to the regression response `(q/100)² · 365/30`.
pub fn scale_vix(vix_quote: f64) -> Result<f64> {
    if !(vix_quote >= 0.0) || !vix_quote.is_finite() {
        return Err(Error::param("vix_quote", "must be finite and non-negative"));
    }
    let v = vix_quote / 100.0;
    Ok(v * v * (365.0 / 30.0))
}

/// Inverse of [`scale_vix`]: the quote whose scaled value equals `rate`.
pub fn vix_quote_for_rate(rate: f64) -> Result<f64> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::param("rate", "must be finite and non-negative"));
    }
    Ok(100.0 * libm::sqrt(rate * 30.0 / 365.0))
}

/// One day of regression inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PanelRow {
    pub date: NaiveDate,
    pub vix_scaled: f64,
    pub x_open: f64,
    pub v_hat: f64,
    pub jump_flag: bool,
}

/// Date-ordered daily panel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DailyPanel {
    rows: Vec<PanelRow>,
}

impl DailyPanel {
    /// Sorts the rows by date and checks the panel invariants.
    pub fn from_rows(mut rows: Vec<PanelRow>) -> Result<Self> {
        rows.sort_by_key(|r| r.date);
        if rows.windows(2).any(|w| w[0].date == w[1].date) {
            return Err(Error::InvalidSeries("duplicate panel date"));
        }
        for r in &rows {
            if !(r.vix_scaled >= 0.0 && r.v_hat >= 0.0) {
                return Err(Error::InvalidSeries(
                    "vix_scaled and v_hat must be non-negative",
                ));
            }
            if !(r.vix_scaled.is_finite() && r.v_hat.is_finite() && r.x_open.is_finite()) {
                return Err(Error::InvalidSeries("non-finite panel entry"));
            }
        }
        Ok(DailyPanel { rows })
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn vix_scaled(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.vix_scaled).collect()
    }

    pub fn v_hat(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.v_hat).collect()
    }

    pub fn x_open(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x_open).collect()
    }

    /// Partitions the panel by calendar year. Years with fewer than `min_rows` rows are
    /// skipped and returned in the second list with their row counts.
    pub fn yearly_splits(&self, min_rows: usize) -> YearlySplits {
        let mut by_year: BTreeMap<i32, Vec<PanelRow>> = BTreeMap::new();
        for r in &self.rows {
            by_year.entry(r.date.year()).or_default().push(*r);
        }
        let mut out = YearlySplits::default();
        for (year, rows) in by_year {
            if rows.len() < min_rows {
                out.skipped.push((year, rows.len()));
            } else {
                out.kept.push((year, DailyPanel { rows }));
            }
        }
        out
    }
}

/// Result of [`DailyPanel::yearly_splits`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct YearlySplits {
    pub kept: Vec<(i32, DailyPanel)>,
    pub skipped: Vec<(i32, usize)>,
}

/// Panel plus the number of dates dropped by the join.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelBuild {
    pub panel: DailyPanel,
    pub dropped: usize,
}

/// Inner-joins sessions, VIX quotes (index points), spot-variance estimates and jump flags
/// on date. Dates missing from any input are dropped and counted.
pub fn build_panel(
    ticks: &[TickSeries],
    vix: &[(NaiveDate, f64)],
    estimates: &[(NaiveDate, f64)],
    jump_flags: &[(NaiveDate, bool)],
) -> Result<PanelBuild> {
    let opens: BTreeMap<NaiveDate, f64> =
        ticks.iter().map(|t| (t.session_date(), t.open())).collect();
    let vix: BTreeMap<NaiveDate, f64> = vix.iter().copied().collect();
    let est: BTreeMap<NaiveDate, f64> = estimates.iter().copied().collect();
    let flags: BTreeMap<NaiveDate, bool> = jump_flags.iter().copied().collect();

    let all: BTreeSet<NaiveDate> = opens
        .keys()
        .chain(vix.keys())
        .chain(est.keys())
        .chain(flags.keys())
        .copied()
        .collect();

    let mut rows = Vec::new();
    for date in &all {
        let (Some(&x_open), Some(&quote), Some(&v_hat), Some(&jump_flag)) = (
            opens.get(date),
            vix.get(date),
            est.get(date),
            flags.get(date),
        ) else {
            continue;
        };
        rows.push(PanelRow {
            date: *date,
            vix_scaled: scale_vix(quote)?,
            x_open,
            v_hat,
            jump_flag,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyJoin);
    }
    let dropped = all.len() - rows.len();
    Ok(PanelBuild {
        panel: DailyPanel::from_rows(rows)?,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 3, d).unwrap()
    }

    #[test]
    fn rescale_examples() {
        let t = TickSeries::new(
            day(1),
            vec![0.0, 11_700.0, 23_400.0],
            vec![1.0, 1.1, 1.2],
            23_400.0,
        )
        .unwrap();
        let r = t.rescale_to_2pi();
        assert_eq!(r.phases(), &[0.0, PI, 2.0 * PI]);
        assert_eq!(r.log_prices(), t.log_prices());
        assert_eq!(r.m(), 2);

        let t = TickSeries::new(day(1), vec![0.0, 23_400.0], vec![1.0, 1.1], 23_400.0).unwrap();
        let r = t.rescale_to_2pi();
        assert_eq!(r.phases(), &[0.0, 2.0 * PI]);
        assert_eq!(r.m(), 1);

        let t =
            TickSeries::new(day(1), vec![0.0, 5_850.0, 23_400.0], vec![1.0; 3], 23_400.0).unwrap();
        assert_eq!(t.rescale_to_2pi().phases()[1], PI / 2.0);
    }

    #[test]
    fn tick_series_invariants() {
        assert!(TickSeries::new(day(1), vec![0.0], vec![1.0], 10.0).is_err());
        assert!(TickSeries::new(day(1), vec![0.0, 0.0], vec![1.0, 1.0], 10.0).is_err());
        assert!(TickSeries::new(day(1), vec![1.0, 2.0], vec![1.0, 1.0], 10.0).is_err());
        assert!(TickSeries::new(day(1), vec![0.0, 11.0], vec![1.0, 1.0], 10.0).is_err());
        assert!(TickSeries::new(day(1), vec![0.0, 1.0], vec![1.0, f64::NAN], 10.0).is_err());
        assert!(TickSeries::new(day(1), vec![0.0, 1.0, 2.0], vec![1.0, 1.0], 10.0).is_err());
    }

    #[test]
    fn returns_iterator() {
        let r = RescaledSeries::equispaced(vec![0.0, 0.01, -0.01]).unwrap();
        let rets: Vec<f64> = r.returns().collect();
        assert_eq!(rets.len(), 2);
        assert!((rets[0] - 0.01).abs() < 1e-15 && (rets[1] + 0.02).abs() < 1e-15);
    }

    #[test]
    fn scale_vix_examples() {
        assert_eq!(scale_vix(0.0).unwrap(), 0.0);
        assert!((scale_vix(100.0).unwrap() - 365.0 / 30.0).abs() < 1e-12);
        assert!((scale_vix(20.0).unwrap() - 0.486_666_666_666_666_7).abs() < 1e-12);
        assert!(scale_vix(-1.0).is_err());
        let q = vix_quote_for_rate(0.0431).unwrap();
        assert!((scale_vix(q).unwrap() - 0.0431).abs() < 1e-15);
    }

    fn series(d: u32, open: f64) -> TickSeries {
        TickSeries::new(day(d), vec![0.0, 1.0], vec![open, open + 0.1], 23_400.0).unwrap()
    }

    #[test]
    fn panel_join() {
        let ticks = vec![series(3, 3.0), series(1, 1.0), series(2, 2.0)];
        let vix = vec![(day(2), 20.0), (day(1), 10.0), (day(3), 30.0)];
        let est = vec![(day(1), 0.01), (day(2), 0.02), (day(3), 0.03)];
        let flags = vec![(day(1), false), (day(2), true), (day(3), false)];
        let built = build_panel(&ticks, &vix, &est, &flags).unwrap();
        assert_eq!(built.panel.len(), 3);
        assert_eq!(built.dropped, 0);
        let dates: Vec<_> = built.panel.rows().iter().map(|r| r.date).collect();
        assert_eq!(dates, vec![day(1), day(2), day(3)]);
        assert_eq!(built.panel.rows()[1].x_open, 2.0);
        assert!(built.panel.rows()[1].jump_flag);

        // VIX missing on one date
        let built = build_panel(&ticks, &vix[..2], &est, &flags).unwrap();
        assert_eq!(built.panel.len(), 2);
        assert_eq!(built.dropped, 1);

        assert_eq!(
            build_panel(&ticks, &[], &est, &flags),
            Err(Error::EmptyJoin)
        );
    }

    #[test]
    fn yearly_split_rules() {
        let mut rows = Vec::new();
        for (year, n) in [(2006, 40), (2007, 10), (2008, 35)] {
            let start = NaiveDate::from_ymd_opt(year, 1, 2).unwrap();
            for i in 0..n {
                rows.push(PanelRow {
                    date: start + chrono::Days::new(i),
                    vix_scaled: 0.04,
                    x_open: 1.0,
                    v_hat: 0.04,
                    jump_flag: false,
                });
            }
        }
        let panel = DailyPanel::from_rows(rows).unwrap();
        let splits = panel.yearly_splits(MIN_YEAR_ROWS);
        let years: Vec<i32> = splits.kept.iter().map(|(y, _)| *y).collect();
        assert_eq!(years, vec![2006, 2008]);
        assert_eq!(splits.skipped, vec![(2007, 10)]);
        let kept_rows: usize = splits.kept.iter().map(|(_, p)| p.len()).sum();
        assert_eq!(kept_rows, 75);
        assert_eq!(panel.yearly_splits(1).kept.len(), 3);
    }
}
