//! Ordered trial records produced by a solver run.

use alloc::string::String;
use alloc::vec::Vec;

use crate::eval::{Blackbox, Cache, EvaluationResult, Status};
use crate::space::{MappedAssignment, Point};

/// One fresh evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Dense index from 0 within the run.
    pub trial_index: usize,
    /// Raw point.
    pub point: Point,
    /// Natural-unit values.
    pub mapped: MappedAssignment,
    /// Objective (`+inf` on failure).
    pub objective: f64,
    /// Constraint violation (`+inf` on failure).
    pub violation_h: f64,
    /// Outcome class.
    pub status: Status,
    /// True if this trial improved the best feasible objective seen so far.
    pub is_new_incumbent: bool,
}

/// Run metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMeta {
    /// `mads`, `tpe` or `random`.
    pub solver: String,
    /// Seed the solver was started with.
    pub seed: u64,
    /// Maximum number of fresh evaluations.
    pub budget: usize,
    /// Problem identifier.
    pub problem: String,
}

/// All fresh evaluations of a run, in evaluation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunHistory {
    /// Metadata.
    pub meta: RunMeta,
    /// Trials.
    pub records: Vec<TrialRecord>,
}

impl RunHistory {
    /// Empty history.
    pub fn new(meta: RunMeta) -> Self {
        RunHistory {
            meta,
            records: Vec::new(),
        }
    }

    /// Number of trials.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True if no trial was recorded.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Lowest objective among feasible ok trials.
    pub fn best_feasible(&self) -> Option<&TrialRecord> {
        self.records
            .iter()
            .filter(|r| r.status == Status::Ok && r.violation_h == 0.0)
            .fold(None, |best: Option<&TrialRecord>, r| match best {
                Some(b) if b.objective <= r.objective => Some(b),
                _ => Some(r),
            })
    }
}

/// Bookkeeping shared by all solvers: cache consultation, budget accounting
/// and history recording.
pub(crate) struct Session<'a, B: Blackbox + ?Sized> {
    pub blackbox: &'a mut B,
    pub cache: &'a mut Cache,
    pub history: RunHistory,
    pub cache_hits: usize,
    best_feasible: f64,
}

impl<'a, B: Blackbox + ?Sized> Session<'a, B> {
    /// Incumbent flags are relative to the best feasible point already cached.
    pub fn new(blackbox: &'a mut B, cache: &'a mut Cache, meta: RunMeta) -> Self {
        let best_feasible = cache
            .records()
            .iter()
            .filter(|r| r.result.is_feasible())
            .map(|r| r.result.objective)
            .fold(f64::INFINITY, f64::min);
        Session {
            blackbox,
            cache,
            history: RunHistory::new(meta),
            cache_hits: 0,
            best_feasible,
        }
    }

    pub fn remaining(&self) -> usize {
        self.history.meta.budget.saturating_sub(self.history.len())
    }

    /// Evaluates `points`, consulting the cache first. Fresh points beyond the
    /// remaining budget are skipped (`None`). Repeated points within the batch
    /// are evaluated once.
    pub fn evaluate(&mut self, points: &[Point]) -> Vec<Option<(EvaluationResult, bool)>> {
        let mut fresh: Vec<Point> = Vec::new();
        let mut fresh_keys: Vec<Vec<u64>> = Vec::new();
        let budget = self.remaining();
        for p in points {
            if self.cache.contains(p) {
                continue;
            }
            let key = p.key();
            if fresh.len() < budget && !fresh_keys.contains(&key) {
                fresh.push(p.clone());
                fresh_keys.push(key);
            }
        }
        let results = if fresh.is_empty() {
            Vec::new()
        } else {
            self.blackbox.evaluate_batch(&fresh)
        };
        debug_assert_eq!(results.len(), fresh.len());
        for (p, r) in fresh.iter().zip(results) {
            self.record(p.clone(), r);
        }
        // Points evaluated in this batch are reported as fresh once, cache hits otherwise.
        let mut reported: Vec<Vec<u64>> = Vec::new();
        points
            .iter()
            .map(|p| {
                let key = p.key();
                let r = self.cache.lookup(p)?.clone();
                let is_fresh = fresh_keys.contains(&key) && !reported.contains(&key);
                if is_fresh {
                    reported.push(key);
                } else {
                    self.cache_hits += 1;
                }
                Some((r, is_fresh))
            })
            .collect()
    }

    fn record(&mut self, point: Point, result: EvaluationResult) {
        let is_new_incumbent = result.is_feasible() && result.objective < self.best_feasible;
        if is_new_incumbent {
            self.best_feasible = result.objective;
        }
        let mapped = self.blackbox.space().map_to_natural(&point);
        self.history.records.push(TrialRecord {
            trial_index: self.history.records.len(),
            point: point.clone(),
            mapped,
            objective: result.objective,
            violation_h: result.violation_h,
            status: result.status,
            is_new_incumbent,
        });
        self.cache.insert(point, result);
    }
}
