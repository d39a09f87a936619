//! Mesh adaptive direct search.
//!
//! Each iteration runs a search step (speculative extrapolation of the last
//! success, then a separable quadratic model fitted on cached evaluations)
//! and, if the search did not improve, a poll step over `2n` Householder
//! directions scaled to the frame and rounded to the mesh. Constraints are
//! handled with a progressive barrier on `h(x) = sum max(0, c_j)^2`.
//!
//! Trials always go through the cache first, so warm-started runs never
//! re-evaluate a known point and cache hits do not consume budget.

mod barrier;
mod mesh;
mod poll;
mod search;

pub use self::barrier::{accept_trial, Incumbents};
pub use self::mesh::{update_mesh, MeshState};
pub use self::poll::{householder_offsets, mesh_point, poll_directions, random_unit_vector};
pub use self::search::{quadratic_model_search, speculative_search, SeparableQuadratic};

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::{Blackbox, Cache, EvaluationResult};
use crate::history::{RunHistory, RunMeta, Session};
use crate::space::Point;
use crate::{Error, Result};

/// MADS settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MadsConfig {
    /// Seed of the direction generator.
    pub seed: u64,
    /// Maximum number of fresh evaluations.
    pub budget: usize,
    /// Stop once every continuous frame size is below this.
    pub min_frame: f64,
    /// Stop a step at its first success.
    pub opportunistic: bool,
    /// Try `incumbent + 2 * last step` before polling.
    pub enable_speculative_search: bool,
    /// Try the minimizer of a quadratic model of cached points before polling.
    pub enable_model_search: bool,
    /// Initial frame size as a fraction of each variable's range.
    pub initial_frame_fraction: f64,
    /// Mesh adjustment base.
    pub tau: f64,
    /// Starting point (raw space); the projected midpoint when absent.
    pub start: Option<Vec<f64>>,
}

impl Default for MadsConfig {
    fn default() -> Self {
        MadsConfig {
            seed: 0,
            budget: 100,
            min_frame: 1e-9,
            opportunistic: true,
            enable_speculative_search: true,
            enable_model_search: true,
            initial_frame_fraction: 0.1,
            tau: 2.0,
            start: None,
        }
    }
}

impl MadsConfig {
    /// Rejects unusable settings.
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".to_string()));
        }
        if !(self.initial_frame_fraction > 0.0 && self.initial_frame_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "initial_frame_fraction must be in (0, 1]".to_string(),
            ));
        }
        if !(self.min_frame > 0.0) {
            return Err(Error::InvalidConfig("min_frame must be positive".to_string()));
        }
        if !(self.tau > 1.0) {
            return Err(Error::InvalidConfig("tau must be greater than 1".to_string()));
        }
        Ok(())
    }
}

/// Outcome of a MADS run.
#[derive(Debug, Clone)]
pub struct MadsRun {
    /// Fresh evaluations in order.
    pub history: RunHistory,
    /// Final incumbents (may come from the warm cache).
    pub incumbents: Incumbents,
    /// Final mesh.
    pub mesh: MeshState,
    /// Trials answered by the cache.
    pub cache_hits: usize,
    /// Completed iterations.
    pub iterations: usize,
    /// `h_max` after each iteration.
    pub h_max_trace: Vec<f64>,
    /// Poll points with the frame center and mesh sizes they were generated on.
    pub poll_log: Vec<PollRecord>,
}

/// A generated poll point and the mesh it lies on.
#[derive(Debug, Clone, PartialEq)]
pub struct PollRecord {
    /// Frame center.
    pub center: Point,
    /// Mesh sizes at generation time.
    pub delta: Vec<f64>,
    /// Generated point.
    pub point: Point,
}

struct Solver<'s, 'a, B: Blackbox + ?Sized> {
    session: &'s mut Session<'a, B>,
    incumbents: Incumbents,
    opportunistic: bool,
}

impl<B: Blackbox + ?Sized> Solver<'_, '_, B> {
    /// Evaluates candidates and applies the barrier. Returns the successful
    /// step (trial minus center) of the last success, if any.
    fn try_points(&mut self, center: &Point, points: &[Point]) -> Option<Vec<f64>> {
        let step_to = |p: &Point| -> Vec<f64> {
            p.values().iter().zip(center.values()).map(|(a, b)| a - b).collect()
        };
        if self.opportunistic {
            for p in points {
                let results = self.session.evaluate(core::slice::from_ref(p));
                let Some(Some((r, _))) = results.into_iter().next() else {
                    continue;
                };
                if accept_trial(&mut self.incumbents, p, &r) {
                    return Some(step_to(p));
                }
            }
            None
        } else {
            let results = self.session.evaluate(points);
            let mut step = None;
            for (p, r) in points.iter().zip(results) {
                if let Some((r, _)) = r {
                    if accept_trial(&mut self.incumbents, p, &r) {
                        step = Some(step_to(p));
                    }
                }
            }
            step
        }
    }
}

/// Runs MADS on `blackbox`, reading and extending `cache`.
///
/// Cached points (for example from a previous run) seed the incumbents and
/// the quadratic model and are never evaluated again. The run stops when the
/// budget of fresh evaluations is spent or the continuous frames fall below
/// `min_frame` (for purely discrete spaces: a failed iteration at the
/// granularity floor).
pub fn mads_optimize<B: Blackbox + ?Sized>(
    blackbox: &mut B,
    config: &MadsConfig,
    cache: &mut Cache,
    problem: &str,
) -> Result<MadsRun> {
    config.validate()?;
    let space = blackbox.space().clone();
    let x0 = match &config.start {
        Some(raw) => space.project(raw)?,
        None => space.midpoint(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mesh = MeshState::new(&space, config.initial_frame_fraction, config.tau);

    let mut incumbents = Incumbents::new();
    for rec in cache.records() {
        accept_trial(&mut incumbents, &rec.point, &rec.result);
    }

    let meta = RunMeta {
        solver: "mads".to_string(),
        seed: config.seed,
        budget: config.budget,
        problem: problem.to_string(),
    };
    let mut session = Session::new(blackbox, cache, meta);
    let mut solver = Solver {
        session: &mut session,
        incumbents,
        opportunistic: config.opportunistic,
    };
    solver.try_points(&x0, core::slice::from_ref(&x0));

    let mut last_step: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut h_max_trace = Vec::new();
    let mut poll_log = Vec::new();
    while solver.session.remaining() > 0 {
        let center = solver
            .incumbents
            .frame_center()
            .cloned()
            .unwrap_or_else(|| x0.clone());

        let mut candidates: Vec<Point> = Vec::new();
        if config.enable_speculative_search {
            candidates.extend(speculative_search(&space, &center, last_step.as_deref()));
        }
        if config.enable_model_search {
            for p in quadratic_model_search(solver.session.cache, &center, &mesh, &space) {
                if !candidates.contains(&p) {
                    candidates.push(p);
                }
            }
        }
        let mut step = solver.try_points(&center, &candidates);

        if step.is_none() {
            let mut offsets = poll_directions(&mesh, &mut rng);
            if let Some(dir) = &last_step {
                let cosine = |o: &Vec<f64>| {
                    let dot: f64 = o.iter().zip(dir).map(|(a, b)| a * b).sum();
                    let norm = libm::sqrt(o.iter().map(|a| a * a).sum::<f64>());
                    if norm > 0.0 {
                        dot / norm
                    } else {
                        f64::NEG_INFINITY
                    }
                };
                offsets.sort_by(|a, b| cosine(b).total_cmp(&cosine(a)));
            }
            let mut points: Vec<Point> = Vec::with_capacity(offsets.len());
            for o in &offsets {
                if let Some(p) = mesh_point(&space, &mesh, &center, o) {
                    if !points.contains(&p) {
                        poll_log.push(PollRecord {
                            center: center.clone(),
                            delta: mesh.delta().to_vec(),
                            point: p.clone(),
                        });
                        points.push(p);
                    }
                }
            }
            step = solver.try_points(&center, &points);
        }

        let success = step.is_some();
        if success {
            last_step = step;
        }
        mesh.update(success);
        iterations += 1;
        h_max_trace.push(solver.incumbents.h_max);

        let converged = match mesh.continuous_converged(config.min_frame) {
            Some(done) => done,
            None => !success && mesh.discrete_at_floor(),
        };
        if converged {
            break;
        }
    }

    let incumbents = solver.incumbents;
    let cache_hits = session.cache_hits;
    Ok(MadsRun {
        history: session.history,
        incumbents,
        mesh,
        cache_hits,
        iterations,
        h_max_trace,
        poll_log,
    })
}

/// Best feasible point of a run, falling back to the infeasible incumbent.
pub fn best_of(run: &MadsRun) -> Option<&(Point, EvaluationResult)> {
    run.incumbents
        .feasible
        .as_ref()
        .or(run.incumbents.infeasible.as_ref())
}
