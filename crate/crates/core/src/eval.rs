//! Evaluation results, the exact-match evaluation cache, and the blackbox trait.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::space::{Point, SpaceDefinition};

/// Outcome class of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// The evaluator produced a parsable objective.
    Ok,
    /// Nonzero exit, unparsable output or a launch error.
    Failed,
    /// Killed after exceeding its time limit.
    Timeout,
}

impl Status {
    /// Stable identifier used in files.
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
            Status::Timeout => "timeout",
        }
    }

    /// Inverse of [`Status::as_str`].
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(Status::Ok),
            "failed" => Some(Status::Failed),
            "timeout" => Some(Status::Timeout),
            _ => None,
        }
    }
}

/// Aggregated constraint violation `sum_j max(0, c_j)^2`.
pub fn violation(constraints: &[f64]) -> f64 {
    constraints
        .iter()
        .map(|&c| {
            let c = c.max(0.0);
            c * c
        })
        .fold(0.0, |acc, v| acc + v)
}

/// Objective, constraints and status of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    /// Objective value, `+inf` unless `status` is ok.
    pub objective: f64,
    /// Constraint values `c_j(x) <= 0`; empty on failure.
    pub constraints: Vec<f64>,
    /// Aggregated violation, `+inf` unless `status` is ok.
    pub violation_h: f64,
    /// Outcome class.
    pub status: Status,
    /// Wall-clock seconds.
    pub duration: f64,
}

impl EvaluationResult {
    /// A successful evaluation. A NaN objective or constraint is recorded as a failure.
    pub fn ok(objective: f64, constraints: Vec<f64>, duration: f64) -> Self {
        if objective.is_nan() || constraints.iter().any(|c| c.is_nan()) {
            return Self::failure(Status::Failed, duration);
        }
        let violation_h = violation(&constraints);
        EvaluationResult {
            objective,
            constraints,
            violation_h,
            status: Status::Ok,
            duration,
        }
    }

    /// A failed or timed-out evaluation.
    pub fn failure(status: Status, duration: f64) -> Self {
        EvaluationResult {
            objective: f64::INFINITY,
            constraints: Vec::new(),
            violation_h: f64::INFINITY,
            status,
            duration,
        }
    }

    /// Status ok and `h == 0`.
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Ok && self.violation_h == 0.0
    }
}

/// One cached evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheRecord {
    /// Raw point.
    pub point: Point,
    /// Stored result.
    pub result: EvaluationResult,
    /// Insertion order across all runs that shared the cache.
    pub trial_index: usize,
}

/// Evaluations keyed by exact raw coordinates.
#[derive(Debug, Clone, Default)]
pub struct Cache {
    records: Vec<CacheRecord>,
    index: BTreeMap<Vec<u64>, usize>,
}

impl Cache {
    /// Empty cache.
    pub fn new() -> Self {
        Self::default()
    }

    /// Records in insertion order.
    pub fn records(&self) -> &[CacheRecord] {
        &self.records
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True if nothing has been cached.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Stored result for exactly this point.
    pub fn lookup(&self, p: &Point) -> Option<&EvaluationResult> {
        self.index.get(&p.key()).map(|&i| &self.records[i].result)
    }

    /// True if the point has a record.
    pub fn contains(&self, p: &Point) -> bool {
        self.index.contains_key(&p.key())
    }

    /// Appends a record with the next trial index. Returns false (and leaves
    /// the cache untouched) if the point is already present.
    pub fn insert(&mut self, point: Point, result: EvaluationResult) -> bool {
        let trial_index = self.records.last().map_or(0, |r| r.trial_index + 1);
        self.insert_record(CacheRecord {
            point,
            result,
            trial_index,
        })
    }

    /// Appends a record keeping its trial index. Returns false on a duplicate point.
    pub fn insert_record(&mut self, record: CacheRecord) -> bool {
        let key = record.point.key();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.records.len());
        self.records.push(record);
        true
    }
}

/// Something that evaluates points of a fixed space.
///
/// Implementations must return one result per input point, in input order.
/// Failures are reported through [`Status`], never by panicking.
pub trait Blackbox {
    /// Space the points belong to.
    fn space(&self) -> &SpaceDefinition;

    /// Evaluates a batch of points.
    fn evaluate_batch(&mut self, points: &[Point]) -> Vec<EvaluationResult>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn violation_is_squared_positive_part() {
        assert_eq!(violation(&[0.5, -1.0]), 0.25);
        assert_eq!(violation(&[]).to_bits(), 0.0f64.to_bits());
        assert_eq!(violation(&[0.0, -3.0]), 0.0);
        assert_eq!(EvaluationResult::ok(1.0, vec![0.5, -1.0], 0.0).violation_h, 0.25);
    }

    #[test]
    fn failures_have_infinite_objective() {
        let r = EvaluationResult::failure(Status::Timeout, 1.0);
        assert_eq!(r.objective, f64::INFINITY);
        assert_eq!(r.violation_h, f64::INFINITY);
        assert!(!r.is_feasible());
        assert_eq!(EvaluationResult::ok(f64::NAN, vec![], 0.0).status, Status::Failed);
    }

    #[test]
    fn lookup_is_exact() {
        let mut c = Cache::new();
        assert!(c.lookup(&Point::new(vec![0.0])).is_none());
        let p = Point::new(vec![1.0, 2.0]);
        assert!(c.insert(p.clone(), EvaluationResult::ok(5.0, vec![], 0.0)));
        assert_eq!(c.lookup(&p).unwrap().objective, 5.0);
        assert!(c.lookup(&Point::new(vec![1.0 + 1e-12, 2.0])).is_none());
        assert!(!c.insert(p, EvaluationResult::ok(6.0, vec![], 0.0)));
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn negative_zero_shares_key() {
        let mut c = Cache::new();
        c.insert(Point::new(vec![0.0]), EvaluationResult::ok(1.0, vec![], 0.0));
        assert!(c.contains(&Point::new(vec![-0.0])));
    }

    #[test]
    fn trial_indices_continue() {
        let mut c = Cache::new();
        c.insert_record(CacheRecord {
            point: Point::new(vec![1.0]),
            result: EvaluationResult::ok(1.0, vec![], 0.0),
            trial_index: 41,
        });
        c.insert(Point::new(vec![2.0]), EvaluationResult::ok(1.0, vec![], 0.0));
        assert_eq!(c.records()[1].trial_index, 42);
    }
}
