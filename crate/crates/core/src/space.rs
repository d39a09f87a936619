//! Optimization variables, grid projection and hyperparameter transforms.
//!
//! Solvers work in a raw space (for LoRA: rank exponent, dropout code, alpha
//! and log10 learning rate). Evaluators see natural units, obtained through a
//! closed set of [`Transform`]s.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Domain of a single variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariableKind {
    /// Continuous variable.
    Real,
    /// Whole numbers only.
    Integer,
    /// Restricted to `lower + k * granularity`.
    Granular(f64),
}

impl VariableKind {
    /// Grid spacing, or `None` for continuous variables.
    pub fn granularity(&self) -> Option<f64> {
        match *self {
            VariableKind::Real => None,
            VariableKind::Integer => Some(1.0),
            VariableKind::Granular(g) => Some(g),
        }
    }

    /// True for integer and granular variables.
    pub fn is_discrete(&self) -> bool {
        self.granularity().is_some()
    }
}

/// Raw to natural-unit mapping applied before a point is handed to an evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    /// `v -> v`
    Identity,
    /// `v -> 2^(v+1)`
    Pow2Plus1,
    /// `v -> 10^v`
    Pow10,
    /// `v -> 0` if `v == 1`, else `10^(v-6)`
    DropoutMap,
}

impl Transform {
    /// Stable identifier used in config and cache files.
    pub fn as_str(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Pow2Plus1 => "pow2_plus1",
            Transform::Pow10 => "pow10",
            Transform::DropoutMap => "dropout_map",
        }
    }

    /// Inverse of [`Transform::as_str`].
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Transform::Identity),
            "pow2_plus1" => Some(Transform::Pow2Plus1),
            "pow10" => Some(Transform::Pow10),
            "dropout_map" => Some(Transform::DropoutMap),
            _ => None,
        }
    }

    /// Maps a raw value to natural units.
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Pow2Plus1 => pow2(v + 1.0),
            Transform::Pow10 => pow10(v),
            Transform::DropoutMap => {
                if v == 1.0 {
                    0.0
                } else {
                    pow10(v - 6.0)
                }
            }
        }
    }
}

fn is_whole(v: f64) -> bool {
    v.is_finite() && libm::trunc(v) == v
}

fn pow2(e: f64) -> f64 {
    if is_whole(e) && e.abs() < 1000.0 {
        libm::ldexp(1.0, e as i32)
    } else {
        libm::exp2(e)
    }
}

// Integer exponents go through exact powers of ten so that e.g. 10^-5 is the
// double nearest to 1e-5.
fn pow10(e: f64) -> f64 {
    if is_whole(e) && e.abs() <= 22.0 {
        let mut p = 1.0;
        for _ in 0..(e.abs() as i32) {
            p *= 10.0;
        }
        if e < 0.0 {
            1.0 / p
        } else {
            p
        }
    } else {
        libm::pow(10.0, e)
    }
}

/// One optimization variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    /// Identifier of the raw variable.
    pub name: String,
    /// Optional display name of the natural-unit hyperparameter.
    pub label: Option<String>,
    /// Domain.
    pub kind: VariableKind,
    /// Inclusive lower bound.
    pub lower: f64,
    /// Inclusive upper bound.
    pub upper: f64,
    /// Raw to natural mapping.
    pub transform: Transform,
}

impl VariableSpec {
    /// A continuous variable with the identity transform.
    pub fn real(name: &str, lower: f64, upper: f64) -> Self {
        Self::new(name, VariableKind::Real, lower, upper)
    }

    /// An integer variable with the identity transform.
    pub fn integer(name: &str, lower: f64, upper: f64) -> Self {
        Self::new(name, VariableKind::Integer, lower, upper)
    }

    /// A variable of any kind with the identity transform.
    pub fn new(name: &str, kind: VariableKind, lower: f64, upper: f64) -> Self {
        VariableSpec {
            name: name.to_string(),
            label: None,
            kind,
            lower,
            upper,
            transform: Transform::Identity,
        }
    }

    /// Sets the transform.
    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    /// Sets the natural-unit display name.
    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Name of the natural-unit value: the label if present, else the name.
    pub fn natural_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    /// `upper - lower`.
    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }

    /// Projects a single coordinate onto `[lower, upper]` and the variable grid.
    pub fn project_value(&self, x: f64) -> f64 {
        let x = if x.is_nan() { self.lower } else { x };
        let x = x.clamp(self.lower, self.upper);
        let v = match self.kind {
            VariableKind::Real => x,
            VariableKind::Integer => libm::round(x),
            VariableKind::Granular(g) => {
                let k = libm::round((x - self.lower) / g);
                let mut v = self.lower + k * g;
                if v > self.upper {
                    v = self.lower + (k - 1.0) * g;
                }
                v
            }
        };
        // -0.0 and 0.0 must be the same cache key.
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }
}

/// Why a variable definition is unusable.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Offending variable (empty for space-level problems).
    pub variable: String,
    /// Description, e.g. `lower > upper`.
    pub message: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.variable.is_empty() {
            f.write_str(self.message)
        } else {
            write!(f, "{}: {}", self.variable, self.message)
        }
    }
}

/// Checks every variable invariant and reports all violations.
pub fn validate_space(variables: &[VariableSpec]) -> core::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |v: &VariableSpec, message| {
        out.push(Violation {
            variable: v.name.clone(),
            message,
        })
    };
    if variables.is_empty() {
        return Err(alloc::vec![Violation {
            variable: String::new(),
            message: "space has no variables",
        }]);
    }
    for (i, v) in variables.iter().enumerate() {
        if variables[..i].iter().any(|w| w.name == v.name) {
            push(v, "duplicate name");
        }
        if !v.lower.is_finite() || !v.upper.is_finite() {
            push(v, "non-finite bound");
            continue;
        }
        if v.lower > v.upper {
            push(v, "lower > upper");
        }
        match v.kind {
            VariableKind::Real => {}
            VariableKind::Integer => {
                if !is_whole(v.lower) || !is_whole(v.upper) {
                    push(v, "non-integer bound");
                }
            }
            VariableKind::Granular(g) => {
                if !(g.is_finite() && g > 0.0) {
                    push(v, "non-positive granularity");
                } else {
                    let steps = (v.upper - v.lower) / g;
                    if (steps - libm::round(steps)).abs() > 1e-9 * steps.abs().max(1.0) {
                        push(v, "range is not a multiple of granularity");
                    }
                }
            }
        }
        if !v.transform.apply(v.lower).is_finite() || !v.transform.apply(v.upper).is_finite() {
            push(v, "transform not finite on bounds");
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// An ordered, validated list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDefinition {
    variables: Vec<VariableSpec>,
}

impl SpaceDefinition {
    /// Validates and builds a space.
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        validate_space(&variables).map_err(Error::InvalidSpace)?;
        Ok(SpaceDefinition { variables })
    }

    /// Variables in order.
    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Clamps and rounds raw coordinates onto the space grid.
    pub fn project(&self, raw: &[f64]) -> Result<Point> {
        if raw.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: raw.len(),
            });
        }
        Ok(Point(
            self.variables
                .iter()
                .zip(raw)
                .map(|(v, &x)| v.project_value(x))
                .collect(),
        ))
    }

    /// Projection of the box center.
    pub fn midpoint(&self) -> Point {
        Point(
            self.variables
                .iter()
                .map(|v| v.project_value(v.lower + 0.5 * v.range()))
                .collect(),
        )
    }

    /// Applies each variable's transform.
    pub fn map_to_natural(&self, p: &Point) -> MappedAssignment {
        MappedAssignment(
            self.variables
                .iter()
                .zip(p.values())
                .map(|(v, &x)| (v.natural_name().to_string(), v.transform.apply(x)))
                .collect(),
        )
    }

    /// True if `p` has the right length and every coordinate is in bounds and on its grid.
    pub fn contains(&self, p: &Point) -> bool {
        p.len() == self.dim()
            && self
                .variables
                .iter()
                .zip(p.values())
                .all(|(v, &x)| v.project_value(x) == x)
    }
}

/// Raw solver-space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Wraps coordinates without projecting them.
    pub fn new(values: Vec<f64>) -> Self {
        Point(values)
    }

    /// Coordinates.
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Dimension.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True for a zero-dimensional point.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Exact-equality key (bit patterns, with -0.0 folded into 0.0).
    pub fn key(&self) -> Vec<u64> {
        self.0
            .iter()
            .map(|&x| if x == 0.0 { 0u64 } else { x.to_bits() })
            .collect()
    }
}

impl From<Vec<f64>> for Point {
    fn from(values: Vec<f64>) -> Self {
        Point(values)
    }
}

/// `(natural name, natural value)` pairs in space order.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedAssignment(pub Vec<(String, f64)>);

impl MappedAssignment {
    /// Natural values in order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|(_, v)| *v)
    }
}
