//! Tick, VIX, panel and option-chain CSV readers.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use spotvar_core::market::{DailyPanel, PanelRow, TickSeries};

use crate::config::CsvFormat;
use crate::error::{AppError, AppResult};

/// Sessions with fewer ticks than this are dropped.
pub const MIN_SESSION_TICKS: usize = 10;

/// Sessions read from tick files, plus the dates dropped for having too few ticks.
#[derive(Debug, Clone, Default)]
pub struct TickLoad {
    pub sessions: Vec<TickSeries>,
    pub skipped: Vec<(NaiveDate, usize)>,
}

fn open_reader(path: &Path, delimiter: u8) -> AppResult<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn data_error(path: &Path, line: u64, msg: impl std::fmt::Display) -> AppError {
    AppError::Data(format!("{}:{line}: {msg}", path.display()))
}

fn parse_timestamp(s: &str, format: Option<&str>) -> Option<NaiveDateTime> {
    match format {
        Some(f) => NaiveDateTime::parse_from_str(s, f).ok(),
        None => ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s.trim_end_matches('Z'), f).ok()),
    }
}

/// Reads `(timestamp, price)` rows into one session per calendar date.
///
/// Times are seconds from the first tick of the date. A repeated timestamp keeps the price
/// that appears last in the file.
pub fn load_tick_csv(path: &Path, format: &CsvFormat) -> AppResult<TickLoad> {
    let delimiter = u8::try_from(format.delimiter)
        .map_err(|_| AppError::Config("delimiter must be a single-byte character".into()))?;
    let mut reader = open_reader(path, delimiter)?;
    let mut days: BTreeMap<NaiveDate, BTreeMap<NaiveDateTime, f64>> = BTreeMap::new();
    let mut first = true;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let (ts, px) = (field(format.timestamp_column), field(format.price_column));
        let is_header = std::mem::take(&mut first)
            && format.has_header.unwrap_or_else(|| {
                parse_timestamp(ts, format.timestamp_format.as_deref()).is_none()
            });
        if is_header {
            continue;
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        let time = parse_timestamp(ts, format.timestamp_format.as_deref())
            .ok_or_else(|| data_error(path, line, format!("unparseable timestamp {ts:?}")))?;
        let price: f64 = px
            .parse()
            .map_err(|_| data_error(path, line, format!("unparseable price {px:?}")))?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(data_error(
                path,
                line,
                format!("non-positive price {price}"),
            ));
        }
        days.entry(time.date()).or_default().insert(time, price);
    }

    let mut out = TickLoad::default();
    for (date, ticks) in days {
        if ticks.len() < MIN_SESSION_TICKS {
            out.skipped.push((date, ticks.len()));
            continue;
        }
        let open = *ticks.keys().next().expect("nonempty session");
        let times = ticks
            .keys()
            .map(|t| (*t - open).num_microseconds().unwrap_or(i64::MAX) as f64 * 1e-6)
            .collect();
        let log_prices = ticks.values().map(|p| p.ln()).collect();
        let series = TickSeries::new(date, times, log_prices, format.session_length)
            .map_err(|e| AppError::Data(format!("{} session {date}: {e}", path.display())))?;
        out.sessions.push(series);
    }
    Ok(out)
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// Reads `date,open` rows (header optional).
pub fn load_vix_csv(path: &Path) -> AppResult<Vec<(NaiveDate, f64)>> {
    let mut reader = open_reader(path, b',')?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let (d, q) = (record.get(0).unwrap_or(""), record.get(1).unwrap_or(""));
        let Some(date) = parse_date(d) else {
            if i == 0 {
                continue;
            }
            return Err(data_error(path, line, format!("unparseable date {d:?}")));
        };
        let quote: f64 = q
            .parse()
            .map_err(|_| data_error(path, line, format!("unparseable quote {q:?}")))?;
        if !(quote >= 0.0 && quote.is_finite()) {
            return Err(data_error(path, line, format!("negative quote {quote}")));
        }
        out.push((date, quote));
    }
    Ok(out)
}

/// Reads a panel written by [`crate::formats::write_panel`].
pub fn load_panel_csv(path: &Path) -> AppResult<DailyPanel> {
    let mut reader = open_reader(path, b',')?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(k).unwrap_or("");
        let Some(date) = parse_date(field(0)) else {
            if i == 0 {
                continue;
            }
            return Err(data_error(
                path,
                line,
                format!("unparseable date {:?}", field(0)),
            ));
        };
        let num = |k: usize| -> AppResult<f64> {
            field(k)
                .parse()
                .map_err(|_| data_error(path, line, format!("unparseable number {:?}", field(k))))
        };
        let jump_flag = match field(4) {
            "0" => false,
            "1" => true,
            other => {
                return Err(data_error(
                    path,
                    line,
                    format!("jump_flag must be 0 or 1, got {other:?}"),
                ))
            }
        };
        rows.push(PanelRow {
            date,
            vix_scaled: num(1)?,
            x_open: num(2)?,
            v_hat: num(3)?,
            jump_flag,
        });
    }
    Ok(DailyPanel::from_rows(rows)?)
}

/// Reads `strike,call,put` rows (header optional).
pub fn load_option_chain_csv(path: &Path) -> AppResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut reader = open_reader(path, b',')?;
    let (mut strikes, mut calls, mut puts) = (vec![], vec![], vec![]);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let nums: Option<Vec<f64>> = (0..3).map(|k| record.get(k)?.parse().ok()).collect();
        match nums {
            Some(v) => {
                strikes.push(v[0]);
                calls.push(v[1]);
                puts.push(v[2]);
            }
            None if i == 0 => continue,
            None => return Err(data_error(path, line, "expected strike,call,put")),
        }
    }
    Ok((strikes, calls, puts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn minute_rows(date: &str, n: usize) -> String {
        (0..n)
            .map(|i| {
                format!(
                    "{date}T{:02}:{:02}:00,{}\n",
                    9 + (30 + i) / 60,
                    (30 + i) % 60,
                    100.0 + i as f64 * 0.01
                )
            })
            .collect()
    }

    #[test]
    fn two_days_of_minute_bars() {
        let text = format!(
            "timestamp,price\n{}{}",
            minute_rows("2015-03-02", 390),
            minute_rows("2015-03-03", 390)
        );
        let load = load_tick_csv(file(&text).path(), &CsvFormat::default()).unwrap();
        assert_eq!(load.sessions.len(), 2);
        for s in &load.sessions {
            assert_eq!(s.times().len(), 390);
            assert_eq!(s.times()[389], 389.0 * 60.0);
        }
        assert!((load.sessions[0].open() - 100.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bad_price_names_its_line() {
        let text = format!("{}2015-03-02T16:00:00,-1\n", minute_rows("2015-03-02", 20));
        let err = load_tick_csv(file(&text).path(), &CsvFormat::default()).unwrap_err();
        assert!(err.to_string().contains(":21:"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn short_days_are_skipped_and_duplicates_keep_the_last_price() {
        let text = format!(
            "{}{}2015-03-03T09:30:00,101\n",
            minute_rows("2015-03-02", 5),
            minute_rows("2015-03-03", 12)
        );
        let load = load_tick_csv(file(&text).path(), &CsvFormat::default()).unwrap();
        assert_eq!(
            load.skipped,
            vec![(NaiveDate::from_ymd_opt(2015, 3, 2).unwrap(), 5)]
        );
        assert_eq!(load.sessions.len(), 1);
        assert_eq!(load.sessions[0].times().len(), 12);
        assert!((load.sessions[0].open() - 101.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn custom_layout() {
        let text: String = (0..10)
            .map(|i| format!("x;02/03/2015 10:00:{i:02};{}\n", 50 + i))
            .collect();
        let format = CsvFormat {
            timestamp_column: 1,
            price_column: 2,
            timestamp_format: Some("%d/%m/%Y %H:%M:%S".into()),
            delimiter: ';',
            has_header: Some(false),
            ..CsvFormat::default()
        };
        let load = load_tick_csv(file(&text).path(), &format).unwrap();
        assert_eq!(
            load.sessions[0].session_date(),
            NaiveDate::from_ymd_opt(2015, 3, 2).unwrap()
        );
        assert_eq!(load.sessions[0].times()[9], 9.0);
    }

    #[test]
    fn vix_and_chain_files() {
        let vix = load_vix_csv(file("date,open\n2015-03-02,14.5\n2015-03-03,15\n").path()).unwrap();
        assert_eq!(vix.len(), 2);
        assert_eq!(vix[1].1, 15.0);
        assert!(load_vix_csv(file("2015-03-02,-1\n").path()).is_err());
        let (k, c, p) =
            load_option_chain_csv(file("strike,call,put\n90,11,1\n110,1,11\n").path()).unwrap();
        assert_eq!(
            (k, c, p),
            (vec![90.0, 110.0], vec![11.0, 1.0], vec![1.0, 11.0])
        );
    }
}
