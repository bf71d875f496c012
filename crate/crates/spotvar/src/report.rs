//! Regression tables: CSV, JSON and a fixed-width text layout.
//!
//! The text and CSV outputs show p-values below 1e-4 as `0`; the JSON keeps full precision.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use spotvar_core::econometrics::{Framework, RegressionReport};

use crate::error::{AppError, AppResult};
use crate::formats::OutputDir;

/// Smallest p-value shown as a number.
pub const P_DISPLAY_FLOOR: f64 = 1e-4;

/// A report on the full sample (`year = None`) or on one calendar year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBlock {
    pub year: Option<i32>,
    #[serde(flatten)]
    pub report: RegressionReport,
}

pub fn display_p_value(p: f64) -> String {
    if p < P_DISPLAY_FLOOR {
        "0".to_string()
    } else {
        format!("{p:.4}")
    }
}

fn csv_p_value(p: f64) -> String {
    if p < P_DISPLAY_FLOOR {
        "0".to_string()
    } else {
        p.to_string()
    }
}

/// `framework,year,coeff,estimate,std_err,t_stat,p_value,r_squared`, `year = all` for the
/// full sample.
pub fn render_csv(blocks: &[ReportBlock]) -> String {
    let mut s = String::from("framework,year,coeff,estimate,std_err,t_stat,p_value,r_squared\n");
    for b in blocks {
        let year = b.year.map_or("all".to_string(), |y| y.to_string());
        for c in &b.report.coefficients {
            let _ = writeln!(
                s,
                "{},{year},{},{},{},{},{},{}",
                b.report.framework.as_str(),
                c.name,
                c.estimate,
                c.std_err,
                c.t_stat,
                csv_p_value(c.p_value),
                b.report.r_squared
            );
        }
    }
    s
}

pub fn render_json(blocks: &[ReportBlock]) -> AppResult<String> {
    let mut s = serde_json::to_string_pretty(blocks)
        .map_err(|e| AppError::Numerical(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Width of the horizontal rules; the label column is 14 wide.
const RULE: usize = 73;

const HEADER: [&str; 6] = [
    "coeff.",
    "estimate",
    "std. err.",
    "t stat.",
    "p value",
    "R^2",
];

fn table_header(s: &mut String, label: &str) {
    let _ = writeln!(
        s,
        "{label:<14}{:<8}{:>10}{:>11}{:>10}{:>10}{:>10}",
        HEADER[0], HEADER[1], HEADER[2], HEADER[3], HEADER[4], HEADER[5]
    );
    let _ = writeln!(s, "{}", "-".repeat(RULE));
}

fn table_block(s: &mut String, label: &str, report: &RegressionReport) {
    for (i, c) in report.coefficients.iter().enumerate() {
        let first = i == 0;
        let mut line = format!(
            "{:<14}{:<8}{:>10.4}{:>11.4}{:>10.4}{:>10}",
            if first { label } else { "" },
            c.name,
            c.estimate,
            c.std_err,
            c.t_stat,
            display_p_value(c.p_value)
        );
        if first {
            let _ = write!(line, "{:>10.4}", report.r_squared);
        }
        let _ = writeln!(s, "{line}");
    }
    if let Some(rho) = report.collinearity {
        let _ = writeln!(s, "{:<14}corr(v_hat, v_hat^2) = {rho:.4}", "");
    }
}

/// Full-sample table (one block per framework) followed by one yearly table per framework.
pub fn render_text(blocks: &[ReportBlock]) -> String {
    let mut s = String::new();
    let full: Vec<&ReportBlock> = blocks.iter().filter(|b| b.year.is_none()).collect();
    if !full.is_empty() {
        table_header(&mut s, "framework");
        for b in full {
            table_block(&mut s, b.report.framework.as_str(), &b.report);
        }
    }
    for fw in Framework::ALL {
        let yearly: Vec<&ReportBlock> = blocks
            .iter()
            .filter(|b| b.year.is_some() && b.report.framework == fw)
            .collect();
        if yearly.is_empty() {
            continue;
        }
        if !s.is_empty() {
            s.push('\n');
        }
        let _ = writeln!(s, "{} framework, yearly subsamples", fw.as_str());
        table_header(&mut s, "year");
        for (i, b) in yearly.iter().enumerate() {
            if i > 0 {
                let _ = writeln!(s, "{}", "-".repeat(RULE));
            }
            table_block(&mut s, &b.year.unwrap_or_default().to_string(), &b.report);
        }
    }
    s
}

/// Writes `reports.csv`, `reports.json` and `reports.txt`.
pub fn emit_report(blocks: &[ReportBlock], out: &mut OutputDir) -> AppResult<()> {
    if blocks.is_empty() {
        return Err(AppError::Data("no regression reports to emit".into()));
    }
    out.write("reports.csv", render_csv(blocks).as_bytes())?;
    out.write("reports.json", render_json(blocks)?.as_bytes())?;
    out.write("reports.txt", render_text(blocks).as_bytes())?;
    Ok(())
}
