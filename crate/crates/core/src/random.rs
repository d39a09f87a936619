//! Seeded uniform random search, the baseline TPE is compared against.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Blackbox, Cache};
use crate::history::{RunHistory, RunMeta, Session};
use crate::space::{Point, SpaceDefinition, VariableKind};
use crate::{Error, Result};

/// Uniform sample over the space; discrete variables are uniform over their grid.
pub fn sample_uniform<R: Rng + ?Sized>(space: &SpaceDefinition, rng: &mut R) -> Point {
    let raw: Vec<f64> = space
        .variables()
        .iter()
        .map(|v| match v.kind {
            VariableKind::Real => {
                let u: f64 = rng.random();
                v.lower + u * v.range()
            }
            VariableKind::Integer => rng.random_range(v.lower as i64..=v.upper as i64) as f64,
            VariableKind::Granular(g) => {
                let steps = libm::round(v.range() / g) as u64;
                v.lower + rng.random_range(0..=steps) as f64 * g
            }
        })
        .collect();
    space.project(&raw).expect("dimension matches")
}

/// Attempts at drawing a point that is not already cached.
pub(crate) const RESAMPLE_ATTEMPTS: usize = 10;

/// Drives a sequential propose/evaluate loop until the budget is spent.
///
/// A proposal that is already cached is redrawn up to [`RESAMPLE_ATTEMPTS`]
/// times; if it is still cached the cache hit is accepted (no budget used).
/// The loop gives up after `budget * 20` consecutive cache hits.
pub(crate) fn sequential_loop<B, F>(session: &mut Session<'_, B>, mut propose: F)
where
    B: Blackbox + ?Sized,
    F: FnMut(&RunHistory) -> Point,
{
    let max_stalls = session.history.meta.budget.saturating_mul(20).max(100);
    let mut stalls = 0;
    while session.remaining() > 0 && stalls < max_stalls {
        let mut p = propose(&session.history);
        for _ in 0..RESAMPLE_ATTEMPTS {
            if !session.cache.contains(&p) {
                break;
            }
            p = propose(&session.history);
        }
        let fresh = matches!(session.evaluate(core::slice::from_ref(&p)).first(), Some(Some((_, true))));
        stalls = if fresh { 0 } else { stalls + 1 };
    }
}

/// Outcome of a sequential run.
#[derive(Debug, Clone)]
pub struct SequentialRun {
    /// Fresh evaluations.
    pub history: RunHistory,
    /// Proposals answered by the cache.
    pub cache_hits: usize,
}

/// Uniform random search with `budget` fresh evaluations.
pub fn random_search<B: Blackbox + ?Sized>(
    blackbox: &mut B,
    seed: u64,
    budget: usize,
    cache: &mut Cache,
    problem: &str,
) -> Result<SequentialRun> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".to_string()));
    }
    let space = blackbox.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = RunMeta {
        solver: "random".to_string(),
        seed,
        budget,
        problem: problem.to_string(),
    };
    let mut session = Session::new(blackbox, cache, meta);
    sequential_loop(&mut session, |_| sample_uniform(&space, &mut rng));
    Ok(SequentialRun {
        cache_hits: session.cache_hits,
        history: session.history,
    })
}
