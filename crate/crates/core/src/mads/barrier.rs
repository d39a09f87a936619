use crate::eval::{EvaluationResult, Status};
use crate::space::Point;

/// Feasible and infeasible incumbents under the progressive barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbents {
    /// Best feasible point (`h == 0`).
    pub feasible: Option<(Point, EvaluationResult)>,
    /// Best infeasible point with `0 < h <= h_max`.
    pub infeasible: Option<(Point, EvaluationResult)>,
    /// Barrier threshold; infeasible trials above it are rejected.
    pub h_max: f64,
}

impl Default for Incumbents {
    fn default() -> Self {
        Incumbents {
            feasible: None,
            infeasible: None,
            h_max: f64::INFINITY,
        }
    }
}

impl Incumbents {
    /// No incumbent, `h_max = +inf`.
    pub fn new() -> Self {
        Self::default()
    }

    /// Point the poll is centered on: the feasible incumbent if any.
    pub fn frame_center(&self) -> Option<&Point> {
        self.feasible
            .as_ref()
            .or(self.infeasible.as_ref())
            .map(|(p, _)| p)
    }
}

/// Applies the barrier rules to one trial. Returns whether it was a success.
pub fn accept_trial(inc: &mut Incumbents, point: &Point, result: &EvaluationResult) -> bool {
    if result.status != Status::Ok || result.objective.is_nan() {
        return false;
    }
    let h = result.violation_h;
    if h == 0.0 {
        let better = inc
            .feasible
            .as_ref()
            .is_none_or(|(_, best)| result.objective < best.objective);
        if better {
            inc.feasible = Some((point.clone(), result.clone()));
        }
        return better;
    }
    if !(h <= inc.h_max) {
        return false;
    }
    let better = inc.infeasible.as_ref().is_none_or(|(_, best)| {
        h < best.violation_h || (h <= best.violation_h && result.objective < best.objective)
    });
    if better {
        inc.infeasible = Some((point.clone(), result.clone()));
        inc.h_max = h;
    }
    better
}
