//! Plot-ready CSV exports of a run history.

use std::fs;
use std::path::{Path, PathBuf};

use bbhpo_core::analysis::{incumbent_trace, normalized_ranks};
use bbhpo_core::{RunHistory, Status};

use crate::historyfile::write_csv;
use crate::num::fmt_f64;
use crate::{Error, Result};

/// Which export to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    /// Incumbent objective after each feasible trial.
    Trace,
    /// Natural-unit hyperparameters, objective and normalized rank per ok trial.
    Parallel,
}

impl ReportKind {
    /// File suffix placed before `.csv`.
    pub fn suffix(&self) -> &'static str {
        match self {
            ReportKind::Trace => "trace",
            ReportKind::Parallel => "parallel",
        }
    }
}

/// `trial_index,best_objective` rows of the incumbent trace.
pub fn render_trace(history: &RunHistory) -> String {
    let mut rows = vec![vec!["trial_index".to_string(), "best_objective".to_string()]];
    rows.extend(
        incumbent_trace(history)
            .into_iter()
            .map(|(i, f)| vec![i.to_string(), fmt_f64(f)]),
    );
    write_csv(&rows)
}

/// Parallel-coordinates table: natural columns, objective, rank (0 = best).
/// Column names come from `names`, so an empty history still gets a header.
pub fn render_parallel(history: &RunHistory, names: &[String]) -> String {
    let mut header: Vec<String> = names.to_vec();
    header.push("objective".into());
    header.push("rank".into());
    let ok: Vec<_> = history.records.iter().filter(|r| r.status == Status::Ok).collect();
    let objectives: Vec<f64> = ok.iter().map(|r| r.objective).collect();
    let ranks = normalized_ranks(&objectives);
    let mut rows = vec![header];
    for (r, rank) in ok.iter().zip(ranks) {
        let mut row: Vec<String> = r.mapped.values().map(fmt_f64).collect();
        row.push(fmt_f64(r.objective));
        row.push(fmt_f64(rank));
        rows.push(row);
    }
    write_csv(&rows)
}

/// `<dir>/<stem>.<kind>.csv` next to the history file.
pub fn report_path(history_path: &Path, kind: ReportKind) -> PathBuf {
    let stem = history_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "history".to_string());
    history_path.with_file_name(format!("{stem}.{}.csv", kind.suffix()))
}

/// Writes the export next to `history_path` and returns its path.
pub fn write_report(history: &RunHistory, names: &[String], history_path: &Path, kind: ReportKind) -> Result<PathBuf> {
    let text = match kind {
        ReportKind::Trace => render_trace(history),
        ReportKind::Parallel => render_parallel(history, names),
    };
    let out = report_path(history_path, kind);
    fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}
