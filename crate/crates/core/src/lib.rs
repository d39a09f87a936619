//! Derivative-free blackbox optimization for hyperparameter search.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`space`]: variable spaces, grid projection and the raw to natural
//!   hyperparameter transforms.
//! - [`eval`]: evaluation results, constraint violation, the in-memory
//!   evaluation cache and the [`eval::Blackbox`] trait solvers drive.
//! - [`problems`]: built-in closed-form problems, including the LoRA space and
//!   a synthetic validation-loss landscape over it.
//! - [`mads`]: mesh adaptive direct search with a progressive barrier.
//! - [`tpe`]: tree-structured Parzen estimator, plus a uniform [`random`]
//!   search baseline.
//! - [`analysis`]: incumbent traces, Pareto filtering and top-k statistics.
//!
//! Process execution, file formats and the command-line tool live in the
//! `bbhpo` crate.
#![no_std]
#![warn(missing_docs)]
// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod eval;
pub mod history;
pub mod mads;
pub mod problems;
pub mod random;
pub mod space;
pub mod tpe;

mod error;
mod linalg;

pub use self::error::Error;
pub use self::eval::{Blackbox, Cache, CacheRecord, EvaluationResult, Status};
pub use self::history::{RunHistory, RunMeta, TrialRecord};
pub use self::space::{MappedAssignment, Point, SpaceDefinition, Transform, VariableKind, VariableSpec};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Rounds `x` to `decimals` places, ties away from zero.
pub fn round_half_away(x: f64, decimals: i32) -> f64 {
    let scale = libm::pow(10.0, f64::from(decimals));
    libm::round(x * scale) / scale
}
