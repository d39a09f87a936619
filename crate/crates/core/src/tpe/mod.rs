//! Tree-structured Parzen estimator.
//!
//! Trials are split into a good quantile and the rest; each side gets an
//! independent per-variable Parzen density (`l` for good, `g` for bad) and the
//! next point is the candidate drawn from `l` with the largest `log l - log g`.
//! The search space here is flat, so the tree degenerates to independent
//! dimensions.

mod parzen;

pub use self::parzen::{fit_parzen, ParzenModel};

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Blackbox, Cache, Status};
use crate::history::{RunHistory, RunMeta, Session};
use crate::random::{sample_uniform, sequential_loop, SequentialRun};
use crate::space::{Point, SpaceDefinition};
use crate::{Error, Result};

/// TPE settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TpeConfig {
    /// Generator seed.
    pub seed: u64,
    /// Maximum number of fresh evaluations.
    pub budget: usize,
    /// Fraction of feasible trials treated as good.
    pub gamma: f64,
    /// Uniform trials before the model is used.
    pub n_startup: usize,
    /// Candidates drawn from `l` per proposal.
    pub n_candidates: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            seed: 0,
            budget: 100,
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
        }
    }
}

impl TpeConfig {
    /// Rejects unusable settings.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.budget == 0 {
            return fail("budget must be at least 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must be in (0, 1)");
        }
        if self.n_startup == 0 || self.n_startup > self.budget {
            return fail("n_startup must be in [1, budget]");
        }
        if self.n_candidates == 0 {
            return fail("n_candidates must be at least 1");
        }
        Ok(())
    }
}

/// Splits history positions into good and bad.
///
/// Good is the `ceil(gamma * n_ok)` lowest-objective feasible ok trials (at
/// least one), ties broken by trial index. Bad holds everything else,
/// including failures and infeasible trials, in trial order. `None` when
/// fewer than two feasible ok trials exist.
pub fn split_observations(history: &RunHistory, gamma: f64) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut ok: Vec<usize> = (0..history.len())
        .filter(|&i| {
            let r = &history.records[i];
            r.status == Status::Ok && r.violation_h == 0.0
        })
        .collect();
    if ok.len() < 2 {
        return None;
    }
    ok.sort_by(|&a, &b| {
        let (ra, rb) = (&history.records[a], &history.records[b]);
        ra.objective
            .total_cmp(&rb.objective)
            .then(ra.trial_index.cmp(&rb.trial_index))
    });
    let n_good = (libm::ceil(gamma * ok.len() as f64) as usize).max(1);
    let good: Vec<usize> = ok[..n_good].to_vec();
    let bad: Vec<usize> = (0..history.len()).filter(|i| !good.contains(i)).collect();
    Some((good, bad))
}

/// Per-variable good and bad densities.
#[derive(Debug, Clone)]
pub struct DensityPair {
    /// `l`, fitted on good trials.
    pub good: Vec<ParzenModel>,
    /// `g`, fitted on bad trials.
    pub bad: Vec<ParzenModel>,
}

impl DensityPair {
    /// Fits both sides from history positions.
    pub fn fit(space: &SpaceDefinition, history: &RunHistory, good: &[usize], bad: &[usize]) -> Self {
        let fit_side = |idx: &[usize]| -> Vec<ParzenModel> {
            space
                .variables()
                .iter()
                .enumerate()
                .map(|(d, v)| {
                    let values: Vec<f64> = idx
                        .iter()
                        .map(|&i| history.records[i].point.values()[d])
                        .collect();
                    fit_parzen(&values, v.lower, v.upper)
                })
                .collect()
        };
        DensityPair {
            good: fit_side(good),
            bad: fit_side(bad),
        }
    }

    /// `sum_d log l_d(x_d) - log g_d(x_d)`.
    pub fn score(&self, p: &Point) -> f64 {
        p.values()
            .iter()
            .zip(self.good.iter().zip(&self.bad))
            .map(|(&x, (l, g))| l.log_pdf(x) - g.log_pdf(x))
            .sum()
    }
}

/// A proposal together with the candidates it was chosen from.
#[derive(Debug, Clone)]
pub struct Proposal {
    /// Chosen point.
    pub point: Point,
    /// Drawn candidates (empty during startup).
    pub candidates: Vec<Point>,
    /// Scores of the candidates.
    pub scores: Vec<f64>,
    /// Fitted densities (absent during startup).
    pub densities: Option<DensityPair>,
}

/// Proposes the next point, exposing candidates and scores.
pub fn propose_detailed<R: Rng + ?Sized>(
    history: &RunHistory,
    space: &SpaceDefinition,
    config: &TpeConfig,
    rng: &mut R,
) -> Proposal {
    let n_ok = history
        .records
        .iter()
        .filter(|r| r.status == Status::Ok && r.violation_h == 0.0)
        .count();
    let split = if n_ok < config.n_startup {
        None
    } else {
        split_observations(history, config.gamma)
    };
    let Some((good, bad)) = split else {
        return Proposal {
            point: sample_uniform(space, rng),
            candidates: Vec::new(),
            scores: Vec::new(),
            densities: None,
        };
    };
    let densities = DensityPair::fit(space, history, &good, &bad);
    let candidates: Vec<Point> = (0..config.n_candidates)
        .map(|_| {
            let raw: Vec<f64> = densities.good.iter().map(|l| l.sample(rng)).collect();
            space.project(&raw).expect("dimension matches")
        })
        .collect();
    let scores: Vec<f64> = candidates.iter().map(|c| densities.score(c)).collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Proposal {
        point: candidates[best].clone(),
        candidates,
        scores,
        densities: Some(densities),
    }
}

/// Proposes the next point to evaluate.
pub fn propose<R: Rng + ?Sized>(
    history: &RunHistory,
    space: &SpaceDefinition,
    config: &TpeConfig,
    rng: &mut R,
) -> Point {
    propose_detailed(history, space, config, rng).point
}

/// Runs TPE until `budget` fresh evaluations have been recorded.
pub fn tpe_optimize<B: Blackbox + ?Sized>(
    blackbox: &mut B,
    config: &TpeConfig,
    cache: &mut Cache,
    problem: &str,
) -> Result<SequentialRun> {
    config.validate()?;
    let space = blackbox.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let meta = RunMeta {
        solver: "tpe".to_string(),
        seed: config.seed,
        budget: config.budget,
        problem: problem.to_string(),
    };
    let mut session = Session::new(blackbox, cache, meta);
    sequential_loop(&mut session, |h| propose(h, &space, config, &mut rng));
    Ok(SequentialRun {
        cache_hits: session.cache_hits,
        history: session.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::TrialRecord;
    use crate::space::MappedAssignment;
    use alloc::vec;

    fn history_of(objs: &[(f64, Status)]) -> RunHistory {
        let mut h = RunHistory::default();
        for (i, &(f, status)) in objs.iter().enumerate() {
            h.records.push(TrialRecord {
                trial_index: i,
                point: Point::new(vec![i as f64]),
                mapped: MappedAssignment(vec![]),
                objective: if status == Status::Ok { f } else { f64::INFINITY },
                violation_h: if status == Status::Ok { 0.0 } else { f64::INFINITY },
                status,
                is_new_incumbent: false,
            });
        }
        h
    }

    #[test]
    fn split_takes_ceil_quantile() {
        let h = history_of(&(0..10).map(|i| (i as f64, Status::Ok)).collect::<Vec<_>>());
        let (good, bad) = split_observations(&h, 0.25).unwrap();
        assert_eq!(good, vec![0, 1, 2]);
        assert_eq!(good.len() + bad.len(), 10);
    }

    #[test]
    fn split_ties_prefer_earlier_trials() {
        let h = history_of(&[(1.0, Status::Ok); 10]);
        assert_eq!(split_observations(&h, 0.25).unwrap().0, vec![0, 1, 2]);
    }

    #[test]
    fn split_puts_failures_in_bad() {
        let mut objs: Vec<(f64, Status)> = (0..8).map(|i| (8.0 - i as f64, Status::Ok)).collect();
        objs.insert(3, (0.0, Status::Failed));
        objs.push((0.0, Status::Timeout));
        let h = history_of(&objs);
        let (good, bad) = split_observations(&h, 0.25).unwrap();
        assert_eq!(good, vec![8, 7]);
        assert_eq!(bad.len(), 8);
        assert!(bad.contains(&3) && bad.contains(&9));
    }

    #[test]
    fn split_needs_two_ok_trials() {
        let h = history_of(&[(1.0, Status::Ok), (0.0, Status::Failed)]);
        assert!(split_observations(&h, 0.25).is_none());
    }

    #[test]
    fn infeasible_trials_are_bad() {
        let mut h = history_of(&[(5.0, Status::Ok), (4.0, Status::Ok), (3.0, Status::Ok)]);
        h.records[2].violation_h = 1.0;
        let (good, bad) = split_observations(&h, 0.25).unwrap();
        assert_eq!(good, vec![1]);
        assert_eq!(bad, vec![0, 2]);
    }

    #[test]
    fn startup_samples_uniformly() {
        let space = crate::problems::lora_space(8).unwrap();
        let h = history_of(&[(1.0, Status::Ok); 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prop = propose_detailed(&h, &space, &TpeConfig::default(), &mut rng);
        assert!(prop.candidates.is_empty());
        assert!(space.contains(&prop.point));
    }

    #[test]
    fn config_validation() {
        assert!(TpeConfig::default().validate().is_ok());
        for bad in [
            TpeConfig { budget: 0, ..TpeConfig::default() },
            TpeConfig { gamma: 1.0, ..TpeConfig::default() },
            TpeConfig { n_startup: 101, ..TpeConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
