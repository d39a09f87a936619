//! Evaluation cache persistence.
//!
//! ```text
//! # bbhpo-cache v1; fingerprint=<hex>
//! trial_index,x_1,..,x_n,objective,h,c_1,..,c_m,status,duration_s
//! ```
//!
//! Values are written as shortest round-trip decimals, so a save/load cycle
//! is bit-exact. Failed records leave their constraint cells empty.

use std::fs;
use std::path::Path;

use bbhpo_core::{Cache, CacheRecord, EvaluationResult, Point, SpaceDefinition, Status};
use sha2::{Digest, Sha256};

use crate::num::{fmt_f64, parse_f64};
use crate::{Error, Result};

const MAGIC: &str = "# bbhpo-cache v1; fingerprint=";

/// Digest of the dimension and each variable's kind, bounds and transform.
/// Names and labels are not part of it.
pub fn space_fingerprint(space: &SpaceDefinition) -> String {
    let mut text = space.dim().to_string();
    for v in space.variables() {
        let kind = match v.kind.granularity() {
            None => "real".to_string(),
            Some(_) if matches!(v.kind, bbhpo_core::VariableKind::Integer) => "integer".to_string(),
            Some(g) => format!("granular:{}", fmt_f64(g)),
        };
        text.push_str(&format!(
            ";{kind},{},{},{}",
            fmt_f64(v.lower),
            fmt_f64(v.upper),
            v.transform.as_str()
        ));
    }
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders `cache` for a space of dimension `space.dim()` with `m` constraints.
pub fn render_cache(cache: &Cache, space: &SpaceDefinition, m: usize) -> String {
    let n = space.dim();
    let mut out = format!("{MAGIC}{}\n", space_fingerprint(space));
    let mut header = vec!["trial_index".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.push("objective".into());
    header.push("h".into());
    header.extend((1..=m).map(|j| format!("c_{j}")));
    header.push("status".into());
    header.push("duration_s".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for rec in cache.records() {
        let r = &rec.result;
        let mut row = vec![rec.trial_index.to_string()];
        row.extend(rec.point.values().iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(r.objective));
        row.push(fmt_f64(r.violation_h));
        row.extend((0..m).map(|j| r.constraints.get(j).map(|&c| fmt_f64(c)).unwrap_or_default()));
        row.push(r.status.as_str().to_string());
        row.push(fmt_f64(r.duration));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes the cache file.
pub fn save_cache(cache: &Cache, space: &SpaceDefinition, m: usize, path: &Path) -> Result<()> {
    fs::write(path, render_cache(cache, space, m)).map_err(|e| Error::io(path, e))
}

/// Reads a cache file written for `space`. The fingerprint must match.
pub fn load_cache(path: &Path, space: &SpaceDefinition) -> Result<Cache> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cache(&text, space, path)
}

/// Parses cache file contents; `path` only labels errors.
pub fn parse_cache(text: &str, space: &SpaceDefinition, path: &Path) -> Result<Cache> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty cache file"))?;
    let found = first
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::parse(path, 1, "missing `# bbhpo-cache v1` header"))?
        .trim();
    let expected = space_fingerprint(space);
    if found != expected {
        return Err(Error::Fingerprint {
            path: path.to_path_buf(),
            expected,
            found: found.to_string(),
        });
    }
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 2, "missing column header"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let n = space.dim();
    if cols.len() < n + 5 || cols[0] != "trial_index" || cols[n + 1] != "objective" || cols[n + 2] != "h" {
        return Err(Error::parse(path, 2, "unexpected column header"));
    }
    let m = cols.len() - n - 5;

    let mut cache = Cache::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_row(line, n, m).map_err(|msg| Error::parse(path, line_no, msg))?;
        if !cache.insert_record(record) {
            return Err(Error::parse(path, line_no, "duplicate point"));
        }
    }
    Ok(cache)
}

fn parse_row(line: &str, n: usize, m: usize) -> std::result::Result<CacheRecord, String> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != n + m + 5 {
        return Err(format!("expected {} fields, found {}", n + m + 5, cells.len()));
    }
    let num = |i: usize, what: &str| parse_f64(cells[i]).ok_or_else(|| format!("non-numeric {what} `{}`", cells[i]));
    let trial_index = cells[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("invalid trial_index `{}`", cells[0]))?;
    let point = (1..=n).map(|i| num(i, "coordinate")).collect::<std::result::Result<Vec<_>, _>>()?;
    let objective = num(n + 1, "objective")?;
    let violation_h = num(n + 2, "h")?;
    let mut constraints = Vec::with_capacity(m);
    for j in 0..m {
        let cell = cells[n + 3 + j];
        if !cell.trim().is_empty() {
            constraints.push(num(n + 3 + j, "constraint")?);
        }
    }
    if !constraints.is_empty() && constraints.len() != m {
        return Err("incomplete constraint values".to_string());
    }
    let status = Status::from_name(cells[n + m + 3].trim())
        .ok_or_else(|| format!("invalid status `{}`", cells[n + m + 3]))?;
    let duration = num(n + m + 4, "duration")?;
    Ok(CacheRecord {
        point: Point::new(point),
        result: EvaluationResult {
            objective,
            constraints,
            violation_h,
            status,
            duration,
        },
        trial_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbhpo_core::problems::lora_space;
    use bbhpo_core::VariableSpec;

    fn box_space(n: usize) -> SpaceDefinition {
        SpaceDefinition::new((0..n).map(|i| VariableSpec::real(&format!("x{i}"), 0.0, 1.0)).collect()).unwrap()
    }

    #[test]
    fn fingerprint_ignores_names_but_not_bounds() {
        let a = box_space(2);
        let b = SpaceDefinition::new(vec![VariableSpec::real("p", 0.0, 1.0), VariableSpec::real("q", 0.0, 1.0)]).unwrap();
        let c = SpaceDefinition::new(vec![VariableSpec::real("p", 0.0, 1.0), VariableSpec::real("q", 0.0, 2.0)]).unwrap();
        assert_eq!(space_fingerprint(&a), space_fingerprint(&b));
        assert_ne!(space_fingerprint(&a), space_fingerprint(&c));
        assert_ne!(space_fingerprint(&lora_space(6).unwrap()), space_fingerprint(&lora_space(8).unwrap()));
        assert_eq!(space_fingerprint(&a).len(), 16);
    }

    #[test]
    fn failed_record_round_trips() {
        let s = box_space(1);
        let mut cache = Cache::new();
        cache.insert(Point::new(vec![0.5]), EvaluationResult::ok(1.5, vec![-0.25], 0.0));
        cache.insert(Point::new(vec![0.25]), EvaluationResult::failure(Status::Timeout, 3.0));
        let text = render_cache(&cache, &s, 1);
        assert!(text.contains("\n1,0.25,inf,inf,,timeout,3\n"));
        let back = parse_cache(&text, &s, Path::new("c.csv")).unwrap();
        assert_eq!(back.records(), cache.records());
    }

    #[test]
    fn ragged_row_names_line() {
        let s = box_space(1);
        let text = format!("{MAGIC}{}\ntrial_index,x_1,objective,h,status,duration_s\n0,0.5,1,0,ok\n", space_fingerprint(&s));
        match parse_cache(&text, &s, Path::new("c.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
