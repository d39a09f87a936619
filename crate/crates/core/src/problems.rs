//! Built-in problems: the LoRA hyperparameter space, a synthetic validation
//! loss over it, and closed-form test functions for solver verification.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{Blackbox, EvaluationResult};
use crate::space::{Point, SpaceDefinition, Transform, VariableSpec};
use crate::{Error, Result};

/// LoRA space: rank exponent `r`, dropout code `d`, scaling `alpha` and
/// log10 learning rate `lr`. `rank_exp_upper` is 6 (rank <= 128) or 8 (rank <= 512).
pub fn lora_space(rank_exp_upper: u32) -> Result<SpaceDefinition> {
    if rank_exp_upper != 6 && rank_exp_upper != 8 {
        return Err(Error::InvalidConfig(format!(
            "rank exponent upper bound must be 6 or 8, got {rank_exp_upper}"
        )));
    }
    SpaceDefinition::new(vec![
        VariableSpec::integer("r", 1.0, f64::from(rank_exp_upper))
            .with_transform(Transform::Pow2Plus1)
            .with_label("Rank"),
        VariableSpec::integer("d", 1.0, 6.0)
            .with_transform(Transform::DropoutMap)
            .with_label("Dropout"),
        VariableSpec::integer("alpha", 1.0, 64.0).with_label("α"),
        VariableSpec::real("lr", -6.0, -3.0)
            .with_transform(Transform::Pow10)
            .with_label("LR"),
    ])
}

/// Starting point commonly used for LoRA fine-tuning: rank 8, dropout 0.1,
/// alpha 32, learning rate 1e-5.
pub fn lora_default_point() -> Point {
    Point::new(vec![2.0, 5.0, 32.0, -5.0])
}

/// Synthetic validation loss over `(r, d, alpha, lr)`.
///
/// Minimum 0.7508 at `(8, 4, 60, -3.5)`. The rank term is small so that
/// low-rank configurations stay competitive.
pub fn mock_lora_loss(p: &Point) -> f64 {
    let x = p.values();
    let (r, d, alpha, lr) = (x[0], x[1], x[2], x[3]);
    let q = Transform::DropoutMap.apply(d);
    0.75 + 2.0 * (lr + 3.5) * (lr + 3.5)
        + 0.0004 * (alpha - 60.0) * (alpha - 60.0)
        + 0.5 * (q - 0.05) * (q - 0.05)
        + 0.02 * (1.0 - r / 8.0)
}

/// Closed-form problems selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `sum x_i^2`, no constraints.
    Sphere,
    /// Standard 2-D Rosenbrock.
    Rosenbrock,
    /// `sum x_i^2` subject to `1 - x_1 <= 0`.
    ConstrainedQuad,
    /// [`mock_lora_loss`] over [`lora_space`].
    MockLora,
}

impl Builtin {
    /// Registry lookup. `mock-lora` and `mock_lora` are both accepted.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sphere" => Ok(Builtin::Sphere),
            "rosenbrock" => Ok(Builtin::Rosenbrock),
            "constrained_quad" => Ok(Builtin::ConstrainedQuad),
            "mock_lora" | "mock-lora" => Ok(Builtin::MockLora),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    /// Canonical registry name.
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Sphere => "sphere",
            Builtin::Rosenbrock => "rosenbrock",
            Builtin::ConstrainedQuad => "constrained_quad",
            Builtin::MockLora => "mock-lora",
        }
    }

    /// Number of constraints.
    pub fn constraint_count(&self) -> usize {
        match self {
            Builtin::ConstrainedQuad => 1,
            _ => 0,
        }
    }

    /// Default space. `dim` applies to sphere and constrained_quad; the
    /// synthetic functions use `[-5, 5]` per coordinate.
    pub fn default_space(&self, dim: usize) -> Result<SpaceDefinition> {
        let box_space = |n: usize| {
            SpaceDefinition::new(
                (1..=n)
                    .map(|i| VariableSpec::real(&format!("x{i}"), -5.0, 5.0))
                    .collect(),
            )
        };
        match self {
            Builtin::Sphere | Builtin::ConstrainedQuad => box_space(dim),
            Builtin::Rosenbrock => box_space(2),
            Builtin::MockLora => lora_space(8),
        }
    }

    /// Objective and constraint values at `p`.
    pub fn eval(&self, p: &Point) -> (f64, Vec<f64>) {
        let x = p.values();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        match self {
            Builtin::Sphere => (sq, Vec::new()),
            Builtin::Rosenbrock => {
                let (a, b) = (x[0], x[1]);
                ((1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a), Vec::new())
            }
            Builtin::ConstrainedQuad => (sq, vec![1.0 - x[0]]),
            Builtin::MockLora => (mock_lora_loss(p), Vec::new()),
        }
    }
}

/// Evaluates a built-in by name.
pub fn builtin_eval(name: &str, p: &Point) -> Result<(f64, Vec<f64>)> {
    Ok(Builtin::from_name(name)?.eval(p))
}

/// A built-in problem bound to a space, usable directly by the solvers.
#[derive(Debug, Clone)]
pub struct BuiltinBlackbox {
    problem: Builtin,
    space: SpaceDefinition,
}

impl BuiltinBlackbox {
    /// Built-in over its default space.
    pub fn new(problem: Builtin, dim: usize) -> Result<Self> {
        Ok(BuiltinBlackbox {
            problem,
            space: problem.default_space(dim)?,
        })
    }

    /// Built-in over a caller-supplied space of matching dimension.
    pub fn with_space(problem: Builtin, space: SpaceDefinition) -> Result<Self> {
        let expected = match problem {
            Builtin::Rosenbrock => Some(2),
            Builtin::MockLora => Some(4),
            _ => None,
        };
        if let Some(n) = expected {
            if space.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: space.dim(),
                });
            }
        }
        Ok(BuiltinBlackbox { problem, space })
    }

    /// The wrapped problem.
    pub fn problem(&self) -> Builtin {
        self.problem
    }

    /// Human-readable identifier.
    pub fn label(&self) -> String {
        self.problem.name().to_string()
    }
}

impl Blackbox for BuiltinBlackbox {
    fn space(&self) -> &SpaceDefinition {
        &self.space
    }

    fn evaluate_batch(&mut self, points: &[Point]) -> Vec<EvaluationResult> {
        points
            .iter()
            .map(|p| {
                let (f, c) = self.problem.eval(p);
                EvaluationResult::ok(f, c, 0.0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn lora_space_defaults_map_to_table_values() {
        let s = lora_space(8).unwrap();
        let m: Vec<f64> = s.map_to_natural(&lora_default_point()).values().collect();
        assert_eq!(m, vec![8.0, 0.1, 32.0, 1e-5]);
        let names: Vec<&str> = s.variables().iter().map(|v| v.natural_name()).collect();
        assert_eq!(names, vec!["Rank", "Dropout", "α", "LR"]);
    }

    #[test]
    fn lora_rank_upper_bounds() {
        let max_rank = |e| {
            let s = lora_space(e).unwrap();
            let v = &s.variables()[0];
            v.transform.apply(v.upper)
        };
        assert_eq!(max_rank(6), 128.0);
        assert_eq!(max_rank(8), 512.0);
        assert!(lora_space(7).is_err());
    }

    #[test]
    fn mock_loss_examples() {
        assert!(close(mock_lora_loss(&Point::new(vec![8.0, 4.0, 60.0, -3.5])), 0.7508));
        assert!(close(mock_lora_loss(&Point::new(vec![8.0, 4.0, 60.0, -3.0])), 1.2508));
        // 0.75 + 4.5 + 0.3136 + 0.00125 + 0.015
        assert!(close(mock_lora_loss(&lora_default_point()), 5.57985));
    }

    #[test]
    fn mock_loss_global_minimum_by_enumeration() {
        // lr enters only through 2(lr+3.5)^2, so the lr optimum is -3.5 for
        // every integer combination; enumerate the rest.
        let mut best = (f64::INFINITY, [0.0; 3]);
        let mut best_r2 = f64::INFINITY;
        for r in 1..=8 {
            for d in 1..=6 {
                for a in 1..=64 {
                    let p = Point::new(vec![r as f64, d as f64, a as f64, -3.5]);
                    let f = mock_lora_loss(&p);
                    if f < best.0 {
                        best = (f, [r as f64, d as f64, a as f64]);
                    }
                    if r == 2 {
                        best_r2 = best_r2.min(f);
                    }
                }
            }
        }
        assert_eq!(best.1, [8.0, 4.0, 60.0]);
        assert!(close(best.0, 0.7508));
        assert!((best_r2 - best.0 - 0.015).abs() < 1e-12);
    }

    #[test]
    fn builtin_examples() {
        assert_eq!(builtin_eval("sphere", &Point::new(vec![1.0, 2.0])).unwrap(), (5.0, vec![]));
        assert_eq!(
            builtin_eval("constrained_quad", &Point::new(vec![0.5, 0.0])).unwrap(),
            (0.25, vec![0.5])
        );
        assert_eq!(
            builtin_eval("constrained_quad", &Point::new(vec![1.0, 0.0])).unwrap(),
            (1.0, vec![0.0])
        );
        assert_eq!(builtin_eval("rosenbrock", &Point::new(vec![1.0, 1.0])).unwrap().0, 0.0);
        assert!(matches!(
            builtin_eval("ackley", &Point::new(vec![0.0])),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn blackbox_sphere_at_origin() {
        let mut bb = BuiltinBlackbox::new(Builtin::Sphere, 2).unwrap();
        let r = bb.evaluate_batch(&[Point::new(vec![0.0, 0.0])]);
        assert_eq!(r[0].objective, 0.0);
        assert_eq!(r[0].status, crate::Status::Ok);
    }
}
