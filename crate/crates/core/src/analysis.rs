//! Post-optimization analysis: incumbent traces, objective ranks for
//! parallel-coordinates plots, Pareto filtering and top-k statistics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::eval::Status;
use crate::history::RunHistory;
use crate::{Error, Result};

/// Running minimum of the objective over feasible ok trials, one entry per
/// such trial: `(trial_index, best objective so far)`.
pub fn incumbent_trace(history: &RunHistory) -> Vec<(usize, f64)> {
    let mut best = f64::INFINITY;
    history
        .records
        .iter()
        .filter(|r| r.status == Status::Ok && r.violation_h == 0.0)
        .map(|r| {
            best = best.min(r.objective);
            (r.trial_index, best)
        })
        .collect()
}

/// Normalized objective rank in `[0, 1]` (0 = best) for each value. Ties
/// share the lowest rank; a single value gets 0.
pub fn normalized_ranks(objectives: &[f64]) -> Vec<f64> {
    let n = objectives.len();
    if n <= 1 {
        return alloc::vec![0.0; n];
    }
    objectives
        .iter()
        .map(|&f| {
            let below = objectives.iter().filter(|&&o| o < f).count();
            below as f64 / (n - 1) as f64
        })
        .collect()
}

/// Whether larger or smaller values of a metric are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Larger is better.
    Maximize,
    /// Smaller is better.
    Minimize,
}

/// Rectangular table of per-model scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    metrics: Vec<String>,
    orientation: Vec<Orientation>,
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ScoreTable {
    /// Builds a table with every metric maximized.
    pub fn new(metrics: Vec<String>, rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let orientation = alloc::vec![Orientation::Maximize; metrics.len()];
        Self::with_orientation(metrics, orientation, rows)
    }

    /// Builds a table with explicit per-metric orientation.
    pub fn with_orientation(
        metrics: Vec<String>,
        orientation: Vec<Orientation>,
        rows: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if metrics.is_empty() {
            return Err(Error::InvalidTable(String::from("no metric columns")));
        }
        if orientation.len() != metrics.len() {
            return Err(Error::InvalidTable(String::from(
                "orientation count differs from metric count",
            )));
        }
        for (i, (id, values)) in rows.iter().enumerate() {
            if values.len() != metrics.len() {
                return Err(Error::InvalidTable(format!(
                    "row {} ({id}) has {} values, expected {}",
                    i + 1,
                    values.len(),
                    metrics.len()
                )));
            }
            if values.iter().any(|v| v.is_nan()) {
                return Err(Error::InvalidTable(format!("row {} ({id}) has a missing value", i + 1)));
            }
        }
        let (ids, rows) = rows.into_iter().unzip();
        Ok(ScoreTable {
            metrics,
            orientation,
            ids,
            rows,
        })
    }

    /// Metric names.
    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    /// Model identifiers in row order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Score rows.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Per-metric orientation.
    pub fn orientation(&self) -> &[Orientation] {
        &self.orientation
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// True for a table without rows.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of one metric column.
    pub fn column(&self, metric: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[metric]).collect()
    }

    fn oriented(&self, row: usize, metric: usize) -> f64 {
        match self.orientation[metric] {
            Orientation::Maximize => self.rows[row][metric],
            Orientation::Minimize => -self.rows[row][metric],
        }
    }

    /// True if row `a` is at least as good on every metric and strictly better on one.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        let mut strictly = false;
        for m in 0..self.metrics.len() {
            let (x, y) = (self.oriented(a, m), self.oriented(b, m));
            if x < y {
                return false;
            }
            strictly |= x > y;
        }
        strictly
    }
}

/// Row positions of non-dominated rows, in input order.
pub fn pareto_indices(table: &ScoreTable) -> Vec<usize> {
    // Sweep in decreasing order of the first oriented metric: a row can only
    // be dominated by a row that is at least as good on that metric, so each
    // row is compared against the front built so far plus its ties.
    let n = table.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| table.oriented(b, 0).total_cmp(&table.oriented(a, 0)));
    let mut keep = alloc::vec![false; n];
    let mut front: Vec<usize> = Vec::new();
    let mut start = 0;
    while start < n {
        let lead = table.oriented(order[start], 0);
        let mut end = start;
        while end < n && table.oriented(order[end], 0) == lead {
            end += 1;
        }
        let block = &order[start..end];
        let mut block_front = Vec::new();
        for &i in block {
            let dominated = front.iter().any(|&j| table.dominates(j, i))
                || block.iter().any(|&j| j != i && table.dominates(j, i));
            if !dominated {
                block_front.push(i);
            }
        }
        for &i in &block_front {
            keep[i] = true;
        }
        front.extend(block_front);
        start = end;
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Identifiers of non-dominated rows, in input order.
pub fn pareto_filter(table: &ScoreTable) -> Vec<String> {
    pareto_indices(table)
        .into_iter()
        .map(|i| table.ids[i].clone())
        .collect()
}

/// Summary of one metric over the first `k` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricStats {
    /// Metric name.
    pub metric: String,
    /// Smallest value.
    pub min: f64,
    /// Largest value.
    pub max: f64,
    /// Arithmetic mean.
    pub mean: f64,
    /// Sample standard deviation (divisor `k - 1`); 0 when `k = 1`.
    pub std: f64,
    /// Number of rows summarized.
    pub n: usize,
}

impl MetricStats {
    /// `min max mean std` with mean and std rounded half away from zero to
    /// two decimals; `k = 1` is annotated with `(n=1)`.
    pub fn report_line(&self) -> String {
        let mean = crate::round_half_away(self.mean, 2);
        let std = crate::round_half_away(self.std, 2);
        let mut line = format!("{:.2} {:.2} {:.2} {:.2}", self.min, self.max, mean, std);
        if self.n == 1 {
            line.push_str(" (n=1)");
        }
        line
    }
}

/// Per-metric min, max, mean and sample standard deviation of the first `k`
/// rows (rows are expected in the caller's ranking order).
pub fn summarize_top_k(table: &ScoreTable, k: usize) -> Result<Vec<MetricStats>> {
    if k == 0 {
        return Err(Error::InvalidConfig(String::from("k must be at least 1")));
    }
    if k > table.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds the {} rows of the table",
            table.len()
        )));
    }
    Ok(table
        .metrics
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let values: Vec<f64> = table.rows[..k].iter().map(|r| r[m]).collect();
            let mean = values.iter().sum::<f64>() / k as f64;
            let std = if k > 1 {
                let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                libm::sqrt(ss / (k - 1) as f64)
            } else {
                0.0
            };
            MetricStats {
                metric: name.clone(),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean,
                std,
                n: k,
            }
        })
        .collect())
}
