//! Run history persistence.
//!
//! ```text
//! # bbhpo-history v1; solver=mads; seed=7; budget=100; problem=mock-lora
//! trial_index,x:r,x:d,x:alpha,x:lr,Rank,Dropout,α,LR,objective,h,status,incumbent
//! ```
//!
//! Raw coordinates carry an `x:` prefix; the natural-unit columns follow
//! them in space order. Rendering is deterministic, so identical runs give
//! byte-identical files.

use std::fs;
use std::path::Path;

use bbhpo_core::{MappedAssignment, Point, RunHistory, RunMeta, SpaceDefinition, Status, TrialRecord};

use crate::num::{fmt_f64, parse_f64};
use crate::{Error, Result};

const MAGIC: &str = "# bbhpo-history v1";

/// Renders a history file. `space` supplies the column names.
pub fn render_history(history: &RunHistory, space: &SpaceDefinition) -> String {
    let meta = &history.meta;
    let mut out = format!(
        "{MAGIC}; solver={}; seed={}; budget={}; problem={}\n",
        meta.solver, meta.seed, meta.budget, meta.problem
    );
    let mut header = vec!["trial_index".to_string()];
    header.extend(space.variables().iter().map(|v| format!("x:{}", v.name)));
    header.extend(space.variables().iter().map(|v| v.natural_name().to_string()));
    header.extend(["objective", "h", "status", "incumbent"].map(String::from));
    let mut rows = vec![header];
    for r in &history.records {
        let mut row = vec![r.trial_index.to_string()];
        row.extend(r.point.values().iter().map(|&x| fmt_f64(x)));
        row.extend(r.mapped.values().map(fmt_f64));
        row.push(fmt_f64(r.objective));
        row.push(fmt_f64(r.violation_h));
        row.push(r.status.as_str().to_string());
        row.push(if r.is_new_incumbent { "1" } else { "0" }.to_string());
        rows.push(row);
    }
    out.push_str(&write_csv(&rows));
    out
}

/// Writes a history file.
pub fn save_history(history: &RunHistory, space: &SpaceDefinition, path: &Path) -> Result<()> {
    fs::write(path, render_history(history, space)).map_err(|e| Error::io(path, e))
}

/// Reads a history file.
pub fn load_history(path: &Path) -> Result<RunHistory> {
    Ok(load_history_with_names(path)?.0)
}

/// Reads a history file along with its natural-unit column names.
pub fn load_history_with_names(path: &Path) -> Result<(RunHistory, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_history_with_names(&text, path)
}

/// Parses history file contents; `path` only labels errors.
pub fn parse_history(text: &str, path: &Path) -> Result<RunHistory> {
    Ok(parse_history_with_names(text, path)?.0)
}

fn parse_history_with_names(text: &str, path: &Path) -> Result<(RunHistory, Vec<String>)> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = parse_meta(first).ok_or_else(|| Error::parse(path, 1, "missing `# bbhpo-history v1` header"))?;

    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::parse(path, 2, e.to_string())),
        None => return Err(Error::parse(path, 2, "missing column header")),
    };
    let cols: Vec<&str> = header.iter().collect();
    let n = cols.iter().skip(1).take_while(|c| c.starts_with("x:")).count();
    let tail = ["objective", "h", "status", "incumbent"];
    if cols.first() != Some(&"trial_index") || cols.len() != 2 * n + 5 || cols[2 * n + 1..] != tail {
        return Err(Error::parse(path, 2, "unexpected column header"));
    }
    let natural: Vec<String> = cols[n + 1..2 * n + 1].iter().map(|s| s.to_string()).collect();

    let mut history = RunHistory::new(meta);
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize + 1);
            Error::parse(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize + 1);
        let record = parse_row(&row, n, &natural).map_err(|m| Error::parse(path, line, m))?;
        if record.trial_index != history.len() {
            return Err(Error::parse(path, line, "trial_index is not dense from 0"));
        }
        history.records.push(record);
    }
    Ok((history, natural))
}

fn parse_meta(line: &str) -> Option<RunMeta> {
    let rest = line.strip_prefix(MAGIC)?;
    let mut meta = RunMeta::default();
    for field in rest.split(';').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field.split_once('=')?;
        match key {
            "solver" => meta.solver = value.to_string(),
            "seed" => meta.seed = value.parse().ok()?,
            "budget" => meta.budget = value.parse().ok()?,
            "problem" => meta.problem = value.to_string(),
            _ => {}
        }
    }
    Some(meta)
}

fn parse_row(row: &csv::StringRecord, n: usize, natural: &[String]) -> std::result::Result<TrialRecord, String> {
    if row.len() != 2 * n + 5 {
        return Err(format!("expected {} fields, found {}", 2 * n + 5, row.len()));
    }
    let num = |i: usize| parse_f64(&row[i]).ok_or_else(|| format!("non-numeric value `{}`", &row[i]));
    let trial_index = row[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("invalid trial_index `{}`", &row[0]))?;
    let point = (1..=n).map(num).collect::<std::result::Result<Vec<_>, _>>()?;
    let mapped = (0..n)
        .map(|j| Ok((natural[j].clone(), num(n + 1 + j)?)))
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let status = Status::from_name(row[2 * n + 3].trim()).ok_or_else(|| format!("invalid status `{}`", &row[2 * n + 3]))?;
    let is_new_incumbent = match row[2 * n + 4].trim() {
        "1" => true,
        "0" => false,
        other => return Err(format!("invalid incumbent flag `{other}`")),
    };
    Ok(TrialRecord {
        trial_index,
        point: Point::new(point),
        mapped: MappedAssignment(mapped),
        objective: num(2 * n + 1)?,
        violation_h: num(2 * n + 2)?,
        status,
        is_new_incumbent,
    })
}

/// Serializes rows as `\n`-terminated CSV, quoting only where needed.
pub(crate) fn write_csv(rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory cannot fail");
    }
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output of UTF-8 input is UTF-8")
}
