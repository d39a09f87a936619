//! Blackbox evaluation: built-in closed forms or external programs.
//!
//! External evaluators follow a small text protocol. The harness writes a
//! UTF-8 input file whose first line holds the natural-unit hyperparameter
//! values and whose second line holds their names, then runs the configured
//! command with the file path appended. The evaluator prints, as its last
//! non-empty stdout line, the objective followed by the constraint values.
//! Anything other than exit code 0 with a parsable last line is a failure.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use bbhpo_core::problems::Builtin;
use bbhpo_core::{Blackbox, EvaluationResult, Point, SpaceDefinition, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::num::fmt_f64;

/// Additive Gaussian noise on a built-in objective, seeded per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

/// External evaluator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SubprocessSpec {
    /// Program followed by its fixed arguments.
    pub command: Vec<String>,
    /// Number of constraint values the evaluator prints after the objective.
    pub constraints: usize,
    /// Kill the evaluator after this long. No limit when `None`.
    pub timeout: Option<Duration>,
}

/// Where objective values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    Builtin { problem: Builtin, noise: Option<Noise> },
    Subprocess(SubprocessSpec),
}

/// A space together with its evaluator.
#[derive(Debug, Clone)]
pub struct ProblemDefinition {
    pub name: String,
    pub space: SpaceDefinition,
    pub evaluator: Evaluator,
}

impl ProblemDefinition {
    /// Constraint count `m`.
    pub fn constraint_count(&self) -> usize {
        match &self.evaluator {
            Evaluator::Builtin { problem, .. } => problem.constraint_count(),
            Evaluator::Subprocess(spec) => spec.constraints,
        }
    }

    /// Evaluates one point. Never fails: errors become failed/timeout results.
    pub fn evaluate(&self, p: &Point) -> EvaluationResult {
        match &self.evaluator {
            Evaluator::Builtin { problem, noise } => {
                let (mut f, c) = problem.eval(p);
                if let Some(noise) = noise.filter(|n| n.sigma > 0.0) {
                    f += point_noise(noise, p);
                }
                EvaluationResult::ok(f, c, 0.0)
            }
            Evaluator::Subprocess(spec) => run_subprocess(spec, &self.space, p),
        }
    }
}

fn point_noise(noise: Noise, p: &Point) -> f64 {
    // splitmix64 over the coordinate bits keeps noise independent of evaluation order
    let mut h = noise.seed ^ 0x9e37_79b9_7f4a_7c15;
    for k in p.key() {
        h = (h ^ k).wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    Normal::new(0.0, noise.sigma)
        .map(|d| d.sample(&mut rng))
        .unwrap_or(0.0)
}

/// Renders the evaluator input file: natural values, then names.
pub fn protocol_input(space: &SpaceDefinition, p: &Point) -> String {
    let mapped = space.map_to_natural(p);
    let values: Vec<String> = mapped.values().map(fmt_f64).collect();
    let names: Vec<&str> = mapped.0.iter().map(|(n, _)| n.as_str()).collect();
    format!("{}\n{}\n", values.join(" "), names.join(" "))
}

/// Parses evaluator stdout: the last non-empty line must hold exactly
/// `1 + constraints` decimals.
pub fn parse_protocol_output(stdout: &str, constraints: usize) -> Option<(f64, Vec<f64>)> {
    let line = stdout.lines().rev().find(|l| !l.trim().is_empty())?;
    let values: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().ok())
        .collect::<Option<_>>()?;
    if values.len() != constraints + 1 {
        return None;
    }
    Some((values[0], values[1..].to_vec()))
}

fn run_subprocess(spec: &SubprocessSpec, space: &SpaceDefinition, p: &Point) -> EvaluationResult {
    let start = Instant::now();
    let elapsed = |s: Instant| s.elapsed().as_secs_f64();
    let Some((program, args)) = spec.command.split_first() else {
        return EvaluationResult::failure(Status::Failed, 0.0);
    };
    let input = match write_input_file(space, p) {
        Ok(f) => f,
        Err(_) => return EvaluationResult::failure(Status::Failed, elapsed(start)),
    };
    let mut child = match Command::new(program)
        .args(args)
        .arg(input.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(_) => return EvaluationResult::failure(Status::Failed, elapsed(start)),
    };
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {}
            Err(_) => break None,
        }
        if spec.timeout.is_some_and(|t| start.elapsed() >= t) {
            let _ = child.kill();
            let _ = child.wait();
            // a grandchild may still hold stdout open; leave the reader detached
            drop(reader);
            return EvaluationResult::failure(Status::Timeout, elapsed(start));
        }
        thread::sleep(Duration::from_millis(5));
    };
    let out = reader.join().unwrap_or_default();
    let duration = elapsed(start);
    match status {
        Some(s) if s.success() => {
            let text = String::from_utf8_lossy(&out);
            match parse_protocol_output(&text, spec.constraints) {
                Some((f, c)) => EvaluationResult::ok(f, c, duration),
                None => EvaluationResult::failure(Status::Failed, duration),
            }
        }
        _ => EvaluationResult::failure(Status::Failed, duration),
    }
}

fn write_input_file(space: &SpaceDefinition, p: &Point) -> std::io::Result<tempfile::NamedTempFile> {
    let mut f = tempfile::Builder::new()
        .prefix("bbhpo-input-")
        .suffix(".txt")
        .tempfile()?;
    f.write_all(protocol_input(space, p).as_bytes())?;
    f.flush()?;
    Ok(f)
}

/// Evaluates `points` with up to `workers` concurrent evaluations. Results
/// come back in input order; with one worker, execution order is input order.
pub fn run_batch(problem: &ProblemDefinition, points: &[Point], workers: usize) -> Vec<EvaluationResult> {
    let workers = workers.max(1).min(points.len());
    if workers <= 1 {
        return points.iter().map(|p| problem.evaluate(p)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<EvaluationResult>>> = points.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let r = problem.evaluate(&points[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot is filled"))
        .collect()
}

/// [`Blackbox`] adapter that evaluates batches through [`run_batch`].
#[derive(Debug)]
pub struct Harness<'a> {
    problem: &'a ProblemDefinition,
    workers: usize,
    evaluations: usize,
}

impl<'a> Harness<'a> {
    pub fn new(problem: &'a ProblemDefinition, workers: usize) -> Self {
        Harness {
            problem,
            workers: workers.max(1),
            evaluations: 0,
        }
    }

    /// Number of evaluator invocations so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

impl Blackbox for Harness<'_> {
    fn space(&self) -> &SpaceDefinition {
        &self.problem.space
    }

    fn evaluate_batch(&mut self, points: &[Point]) -> Vec<EvaluationResult> {
        self.evaluations += points.len();
        run_batch(self.problem, points, self.workers)
    }
}

/// Resolves the evaluator program like the shell would: paths containing a
/// separator are checked directly, bare names are looked up on `PATH`.
pub fn find_program(program: &str) -> Option<PathBuf> {
    let candidate = Path::new(program);
    if candidate.components().count() > 1 || candidate.is_absolute() {
        return candidate.is_file().then(|| candidate.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}
