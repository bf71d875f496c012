//! Output directory handling and the plain CSV artifacts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every value read back
//! from a CSV is bit-identical to the value written.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spotvar_core::diagnostics::SignatureCurve;
use spotvar_core::market::DailyPanel;
use spotvar_core::stats::TestStatistic;

use crate::error::{AppError, AppResult};
use crate::pipeline::DayResult;

/// One emitted file with its content digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Output directory that remembers what it wrote so a failed run can remove it again.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    written: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> AppResult<Self> {
        let created_root = !root.exists();
        std::fs::create_dir_all(root).map_err(|e| AppError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            created_root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> AppResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| AppError::io(&path, e))?;
        self.written.retain(|a| a.path != name);
        self.written.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.written
    }

    /// Removes every file written so far, and the directory itself if this run created it.
    pub fn discard(self) {
        for a in &self.written {
            let _ = std::fs::remove_file(self.root.join(&a.path));
        }
        if self.created_root {
            let _ = std::fs::remove_dir(&self.root);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn bool01(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// `date,vix_scaled,x_open,v_hat,jump_flag`.
pub fn panel_csv(panel: &DailyPanel) -> String {
    let mut s = String::from("date,vix_scaled,x_open,v_hat,jump_flag\n");
    for r in panel.rows() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.date,
            r.vix_scaled,
            r.x_open,
            r.v_hat,
            bool01(r.jump_flag)
        );
    }
    s
}

/// `date,eval_phase,value_rescaled,value_annualized,kind,flags`.
pub fn estimates_csv(days: &[DayResult]) -> String {
    let mut s = String::from("date,eval_phase,value_rescaled,value_annualized,kind,flags\n");
    for d in days {
        let e = &d.estimate;
        let flags: Vec<&str> = [(e.floored, "floored"), (e.clamped, "clamped")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, name)| *name)
            .collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            d.date,
            e.eval_phase,
            e.value,
            e.annualized,
            e.kind.as_str(),
            flags.join("|")
        );
    }
    s
}

/// `date,z,reject`.
pub fn jump_flags_csv(days: &[(chrono::NaiveDate, TestStatistic)]) -> String {
    let mut s = String::from("date,z,reject\n");
    for (date, t) in days {
        let _ = writeln!(s, "{date},{},{}", t.value, bool01(t.reject));
    }
    s
}

/// `interval_seconds,total_rv`.
pub fn signature_csv(curve: &SignatureCurve) -> String {
    let mut s = String::from("interval_seconds,total_rv\n");
    for (f, rv) in curve.frequencies.iter().zip(&curve.total_rv) {
        let _ = writeln!(s, "{f},{rv}");
    }
    s
}

/// `series,statistic,value,critical_value,confidence,reject`.
pub fn pretests_csv(tests: &[(String, TestStatistic)]) -> String {
    let mut s = String::from("series,statistic,value,critical_value,confidence,reject\n");
    for (series, t) in tests {
        let _ = writeln!(
            s,
            "{series},{},{},{},{},{}",
            t.name,
            t.value,
            t.critical_value(),
            t.confidence,
            bool01(t.reject)
        );
    }
    s
}

/// `date,open`.
pub fn vix_csv(quotes: &[(chrono::NaiveDate, f64)]) -> String {
    let mut s = String::from("date,open\n");
    for (d, q) in quotes {
        let _ = writeln!(s, "{d},{q}");
    }
    s
}
