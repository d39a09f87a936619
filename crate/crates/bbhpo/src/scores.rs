//! Score table CSV: header `model_id,<metric>...`, one row per model.

use std::fs;
use std::path::Path;

use bbhpo_core::analysis::ScoreTable;

use crate::num::parse_f64;
use crate::{Error, Result};

/// Reads a score table; all metrics are maximized.
pub fn load_scores(path: &Path) -> Result<ScoreTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text, path)
}

/// Parses score table contents; `path` only labels errors.
pub fn parse_scores(text: &str, path: &Path) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::parse(path, 1, e.to_string())),
        None => return Err(Error::parse(path, 1, "empty score table")),
    };
    if header.get(0) != Some("model_id") || header.len() < 2 {
        return Err(Error::parse(path, 1, "header must be `model_id,<metric>...`"));
    }
    let metrics: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let id = rec.get(0).unwrap_or_default().to_string();
        if rec.len() != metrics.len() + 1 {
            return Err(Error::parse(
                path,
                line,
                format!("row `{id}` has {} fields, expected {}", rec.len(), metrics.len() + 1),
            ));
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|v| parse_f64(v).filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::parse(path, line, format!("row `{id}` has a missing or non-numeric value")))?;
        rows.push((id, values));
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 1, "score table has no rows"));
    }
    Ok(ScoreTable::new(metrics, rows)?)
}
