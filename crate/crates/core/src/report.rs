//! Run manifests and report rendering.
//!
//! Every report starts with the manifest of the run that produced it. Two runs
//! with equal manifests, timestamp included, render to identical bytes.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluation::ErrorReport;
use crate::ingest::RescuableCase;
use crate::regression::RegressionModel;
use crate::rescue::RescueOutcome;

pub const TOOL_VERSION: &str = concat!("catchup ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub input_sha256: Option<String>,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, flags: &impl Serialize, seed: Option<u64>, input: Option<&Path>) -> Result<Self> {
        Ok(RunManifest {
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            flags: serde_json::to_value(flags).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            seed,
            input_sha256: input.map(sha256_file).transpose()?,
            timestamp: build_timestamp(),
        })
    }

    fn text_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.tool_version);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# flags: {}", self.flags);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        if let Some(d) = &self.input_sha256 {
            let _ = writeln!(s, "# input-sha256: {d}");
        }
        let _ = writeln!(s, "# timestamp: {}", self.timestamp);
        s
    }
}

/// Seconds since the epoch, pinned by `SOURCE_DATE_EPOCH` when it is set.
fn build_timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Render `body` as text (header plus `text`) or as a JSON document.
pub fn render<T: Serialize>(manifest: &RunManifest, format: Format, text: &str, body: &T) -> String {
    match format {
        Format::Text => format!("{}{}", manifest.text_header(), text),
        Format::Machine => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                manifest: &'a RunManifest,
                results: &'a T,
            }
            let mut out = serde_json::to_string_pretty(&Doc { manifest, results: body }).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

pub fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "undefined".into(), |v| format!("{:.4}%", 100.0 * v))
}

fn fmt_opt(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

/// Flat row for machine-readable error reports.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRow {
    pub model: String,
    pub mpf: Option<f64>,
    pub mfp: Option<f64>,
    pub n_pass: usize,
    pub n_fail: usize,
    pub reps: usize,
    pub mean_adjusted_r2: Option<f64>,
    pub exclusions: usize,
    pub mpf_exclusions: usize,
    pub mfp_exclusions: usize,
    pub degenerate_reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_relative_mpf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_relative_mfp: Option<f64>,
}

impl From<&ErrorReport> for ErrorRow {
    fn from(r: &ErrorReport) -> Self {
        ErrorRow {
            model: r.model.clone(),
            mpf: r.mpf,
            mfp: r.mfp,
            n_pass: r.n_pass,
            n_fail: r.n_fail,
            reps: r.reps,
            mean_adjusted_r2: r.mean_adjusted_r2,
            exclusions: r.mpf_exclusions + r.mfp_exclusions,
            mpf_exclusions: r.mpf_exclusions,
            mfp_exclusions: r.mfp_exclusions,
            degenerate_reps: r.degenerate_reps,
            group_relative_mpf: r.group_relative_mpf,
            group_relative_mfp: r.group_relative_mfp,
        }
    }
}

pub fn error_table(reports: &[&ErrorReport]) -> String {
    let paper = reports.iter().any(|r| r.group_relative_mpf.is_some() || r.group_relative_mfp.is_some());
    let mut s = String::new();
    let _ = write!(
        s,
        "{:<12} {:>10} {:>10} {:>8} {:>8} {:>5} {:>12} {:>6}",
        "model", "mpf", "mfp", "n_pass", "n_fail", "reps", "mean_adj_r2", "excl"
    );
    if paper {
        let _ = write!(s, " {:>10} {:>10}", "grp_mpf", "grp_mfp");
    }
    s.push('\n');
    for r in reports {
        let _ = write!(
            s,
            "{:<12} {:>10} {:>10} {:>8} {:>8} {:>5} {:>12} {:>6}",
            r.model,
            fmt_rate(r.mpf),
            fmt_rate(r.mfp),
            r.n_pass,
            r.n_fail,
            r.reps,
            fmt_opt(r.mean_adjusted_r2),
            r.mpf_exclusions + r.mfp_exclusions
        );
        if paper {
            let _ = write!(s, " {:>10} {:>10}", fmt_rate(r.group_relative_mpf), fmt_rate(r.group_relative_mfp));
        }
        s.push('\n');
    }
    s
}

pub fn model_summary(m: &RegressionModel, threshold: f64) -> String {
    format!(
        "full-cohort fit: C={:.6} a1={:.6} a2={:.6} a3={:.6} r2={:.6} adj_r2={:.6} n={}{} gate({threshold:.2})={}\n",
        m.intercept,
        m.slopes[0],
        m.slopes[1],
        m.slopes[2],
        m.r_squared,
        m.adjusted_r_squared,
        m.n_train,
        if m.degenerate { " degenerate" } else { "" },
        if crate::regression::gate(m, threshold) { "accepted" } else { "rejected" }
    )
}

pub fn scan_table(cases: &[RescuableCase]) -> String {
    let mut s = format!("{:<10} {:>6} {:>6} {:>10} {:>7} {:>5}\n", "case_id", "year", "region", "observed", "missing", "valid");
    for c in cases {
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>6} {:>10} {:>7} {:>5}",
            c.case_id,
            c.year,
            c.region,
            format!("{},{},{}", c.observed[0], c.observed[1], c.observed[2]),
            c.missing_index,
            if c.valid { "yes" } else { "no" }
        );
    }
    let valid = cases.iter().filter(|c| c.valid).count();
    let _ = writeln!(s, "rescuable: {} valid: {}", cases.len(), valid);
    s
}

/// Flat row for machine-readable rescue output.
#[derive(Debug, Clone, Serialize)]
pub struct RescueRow {
    pub case_id: u64,
    pub year: i32,
    pub region: u8,
    pub engine: String,
    pub grade4p: Option<f64>,
    pub verdict: String,
    pub mean_estimate: Option<f64>,
    pub mean_grade: Option<f64>,
    pub modal_grade: Option<u8>,
    pub reason: Option<String>,
}

pub fn rescue_rows(outcomes: &[RescueOutcome], engine: &str) -> Vec<RescueRow> {
    outcomes
        .iter()
        .map(|o| {
            let c = o.case();
            match o {
                RescueOutcome::Decided(d) => RescueRow {
                    case_id: c.case_id,
                    year: c.year,
                    region: c.region,
                    engine: d.engine.to_string(),
                    grade4p: Some(d.grade4p),
                    verdict: d.verdict.to_string(),
                    mean_estimate: Some(d.mean_estimate),
                    mean_grade: d.hybrid.as_ref().map(|h| h.mean_grade),
                    modal_grade: d.hybrid.as_ref().map(|h| h.modal_grade),
                    reason: None,
                },
                RescueOutcome::Undecidable { reason, .. } => RescueRow {
                    case_id: c.case_id,
                    year: c.year,
                    region: c.region,
                    engine: engine.into(),
                    grade4p: None,
                    verdict: "undecidable".into(),
                    mean_estimate: None,
                    mean_grade: None,
                    modal_grade: None,
                    reason: Some(reason.clone()),
                },
            }
        })
        .collect()
}

pub fn rescue_table(rows: &[RescueRow]) -> String {
    let mut s = format!(
        "{:<10} {:>6} {:>6} {:<12} {:>8} {:<13} {:>9} {:>9} {:>6}\n",
        "case_id", "year", "region", "engine", "grade4P", "verdict", "estimate", "mean", "modal"
    );
    for r in rows {
        let _ = write!(
            s,
            "{:<10} {:>6} {:>6} {:<12} {:>8} {:<13} {:>9} {:>9} {:>6}",
            r.case_id,
            r.year,
            r.region,
            r.engine,
            r.grade4p.map_or_else(|| "-".into(), |g| format!("{:.1}%", 100.0 * g)),
            r.verdict,
            r.mean_estimate.map_or_else(|| "-".into(), |v| format!("{v:.4}")),
            r.mean_grade.map_or_else(|| "-".into(), |v| format!("{v:.4}")),
            r.modal_grade.map_or_else(|| "-".into(), |v| v.to_string()),
        );
        if let Some(reason) = &r.reason {
            let _ = write!(s, "  ({reason})");
        }
        s.push('\n');
    }
    s
}
