//! Run configuration: a single JSON document with `"version": 1`.
//!
//! ```json
//! {
//!   "version": 1,
//!   "problem": { "kind": "builtin", "name": "mock-lora" },
//!   "solver": "mads",
//!   "budget": 100,
//!   "seed": 7,
//!   "output_dir": "runs/mock"
//! }
//! ```
//!
//! Relative paths (`warm_cache`, `output_dir`, subprocess programs given as
//! paths) resolve against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bbhpo_core::mads::MadsConfig;
use bbhpo_core::problems::{lora_space, Builtin};
use bbhpo_core::tpe::TpeConfig;
use bbhpo_core::{SpaceDefinition, Transform, VariableKind, VariableSpec};
use serde::Deserialize;

use crate::harness::{find_program, Evaluator, Noise, ProblemDefinition, SubprocessSpec};
use crate::{Error, Result};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "BBHPO_SEED";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    problem: RawProblem,
    solver: SolverKind,
    budget: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    mads: Option<RawMads>,
    #[serde(default)]
    tpe: Option<RawTpe>,
    #[serde(default)]
    warm_cache: Option<PathBuf>,
    output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawProblem {
    Builtin {
        name: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        noise_sigma: f64,
        #[serde(default)]
        noise_seed: u64,
        #[serde(default)]
        space: Option<RawSpace>,
    },
    Subprocess {
        name: Option<String>,
        command: Vec<String>,
        #[serde(default)]
        constraints: usize,
        #[serde(default)]
        timeout_s: Option<f64>,
        space: RawSpace,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    rank_exp_upper: Option<u32>,
    #[serde(default)]
    variables: Option<Vec<RawVariable>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: String,
    #[serde(default)]
    label: Option<String>,
    kind: RawKind,
    #[serde(default)]
    granularity: Option<f64>,
    lower: f64,
    upper: f64,
    #[serde(default)]
    transform: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Real,
    Integer,
    Granular,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMads {
    min_frame: Option<f64>,
    opportunistic: Option<bool>,
    speculative_search: Option<bool>,
    model_search: Option<bool>,
    initial_frame_fraction: Option<f64>,
    tau: Option<f64>,
    start: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTpe {
    gamma: Option<f64>,
    n_startup: Option<usize>,
    n_candidates: Option<usize>,
}

/// Solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Mads,
    Tpe,
    Random,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Mads => "mads",
            SolverKind::Tpe => "tpe",
            SolverKind::Random => "random",
        }
    }
}

/// Solver with its validated settings.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSettings {
    Mads(MadsConfig),
    Tpe(TpeConfig),
    Random { seed: u64, budget: usize },
}

impl SolverSettings {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverSettings::Mads(_) => SolverKind::Mads,
            SolverSettings::Tpe(_) => SolverKind::Tpe,
            SolverSettings::Random { .. } => SolverKind::Random,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SolverSettings::Mads(c) => c.seed,
            SolverSettings::Tpe(c) => c.seed,
            SolverSettings::Random { seed, .. } => *seed,
        }
    }

    pub fn budget(&self) -> usize {
        match self {
            SolverSettings::Mads(c) => c.budget,
            SolverSettings::Tpe(c) => c.budget,
            SolverSettings::Random { budget, .. } => *budget,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemDefinition,
    pub solver: SolverSettings,
    pub warm_cache: Option<PathBuf>,
    pub output_dir: PathBuf,
}

/// Reads and validates a config file, applying the `BBHPO_SEED` override.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{s}`")))?,
        ),
        Err(_) => None,
    };
    let base = path.parent().unwrap_or(Path::new(""));
    parse_config(&text, path, base, seed_override)
}

/// Parses config text. Relative paths resolve against `base`; `path` only
/// labels errors.
pub fn parse_config(text: &str, path: &Path, base: &Path, seed_override: Option<u64>) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    if raw.version != 1 {
        return Err(Error::Config(format!("unsupported config version {}", raw.version)));
    }
    let seed = seed_override.unwrap_or(raw.seed);
    let problem = build_problem(raw.problem, base)?;
    let solver = build_solver(raw.solver, raw.budget, seed, raw.mads, raw.tpe)?;
    if let SolverSettings::Mads(c) = &solver {
        if let Some(start) = &c.start {
            if start.len() != problem.space.dim() {
                return Err(Error::Config(format!(
                    "mads.start has {} values, the space has {} variables",
                    start.len(),
                    problem.space.dim()
                )));
            }
        }
    }
    Ok(RunConfig {
        problem,
        solver,
        warm_cache: raw.warm_cache.map(|p| base.join(p)),
        output_dir: base.join(raw.output_dir),
    })
}

fn build_solver(
    kind: SolverKind,
    budget: usize,
    seed: u64,
    mads: Option<RawMads>,
    tpe: Option<RawTpe>,
) -> Result<SolverSettings> {
    if mads.is_some() && kind != SolverKind::Mads {
        return Err(Error::Config("`mads` settings given for a non-MADS solver".into()));
    }
    if tpe.is_some() && kind != SolverKind::Tpe {
        return Err(Error::Config("`tpe` settings given for a non-TPE solver".into()));
    }
    if budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let settings = match kind {
        SolverKind::Mads => {
            let m = mads.unwrap_or_default();
            let d = MadsConfig::default();
            let c = MadsConfig {
                seed,
                budget,
                min_frame: m.min_frame.unwrap_or(d.min_frame),
                opportunistic: m.opportunistic.unwrap_or(d.opportunistic),
                enable_speculative_search: m.speculative_search.unwrap_or(d.enable_speculative_search),
                enable_model_search: m.model_search.unwrap_or(d.enable_model_search),
                initial_frame_fraction: m.initial_frame_fraction.unwrap_or(d.initial_frame_fraction),
                tau: m.tau.unwrap_or(d.tau),
                start: m.start,
            };
            c.validate()?;
            SolverSettings::Mads(c)
        }
        SolverKind::Tpe => {
            let t = tpe.unwrap_or_default();
            let d = TpeConfig::default();
            let c = TpeConfig {
                seed,
                budget,
                gamma: t.gamma.unwrap_or(d.gamma),
                n_startup: t.n_startup.unwrap_or(d.n_startup.min(budget)),
                n_candidates: t.n_candidates.unwrap_or(d.n_candidates),
            };
            c.validate()?;
            SolverSettings::Tpe(c)
        }
        SolverKind::Random => SolverSettings::Random { seed, budget },
    };
    Ok(settings)
}

fn build_problem(raw: RawProblem, base: &Path) -> Result<ProblemDefinition> {
    match raw {
        RawProblem::Builtin {
            name,
            dim,
            noise_sigma,
            noise_seed,
            space,
        } => {
            let problem = Builtin::from_name(&name)?;
            if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
                return Err(Error::Config("noise_sigma must be a finite non-negative number".into()));
            }
            let space = match space {
                Some(s) => build_space(s)?,
                None => problem.default_space(dim.unwrap_or(2))?,
            };
            let fixed = match problem {
                Builtin::Rosenbrock => Some(2),
                Builtin::MockLora => Some(4),
                _ => None,
            };
            if let Some(n) = fixed.filter(|&n| n != space.dim()) {
                return Err(Error::Config(format!("{} needs {n} variables, got {}", problem.name(), space.dim())));
            }
            if let Some(d) = dim.filter(|&d| d != space.dim()) {
                return Err(Error::Config(format!("dim = {d} does not match the {}-variable space", space.dim())));
            }
            let noise = (noise_sigma > 0.0).then_some(Noise {
                sigma: noise_sigma,
                seed: noise_seed,
            });
            Ok(ProblemDefinition {
                name: problem.name().to_string(),
                space,
                evaluator: Evaluator::Builtin { problem, noise },
            })
        }
        RawProblem::Subprocess {
            name,
            mut command,
            constraints,
            timeout_s,
            space,
        } => {
            let program = command
                .first()
                .ok_or_else(|| Error::Config("subprocess command is empty".into()))?
                .clone();
            let is_path = Path::new(&program).components().count() > 1;
            if is_path {
                command[0] = base.join(&program).to_string_lossy().into_owned();
            }
            if find_program(&command[0]).is_none() {
                return Err(Error::EvaluatorMissing(program));
            }
            let timeout = match timeout_s {
                None => None,
                Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
                Some(_) => return Err(Error::Config("timeout_s must be positive".into())),
            };
            let space = build_space(space)?;
            Ok(ProblemDefinition {
                name: name.unwrap_or_else(|| "subprocess".to_string()),
                space,
                evaluator: Evaluator::Subprocess(SubprocessSpec {
                    command,
                    constraints,
                    timeout,
                }),
            })
        }
    }
}

fn build_space(raw: RawSpace) -> Result<SpaceDefinition> {
    match (raw.preset.as_deref(), raw.variables) {
        (Some("lora"), None) => Ok(lora_space(raw.rank_exp_upper.unwrap_or(8))?),
        (Some(other), None) => Err(Error::Config(format!("unknown space preset `{other}`"))),
        (None, Some(vars)) => {
            if raw.rank_exp_upper.is_some() {
                return Err(Error::Config("rank_exp_upper applies to the lora preset only".into()));
            }
            let specs = vars.into_iter().map(build_variable).collect::<Result<Vec<_>>>()?;
            Ok(SpaceDefinition::new(specs)?)
        }
        (Some(_), Some(_)) => Err(Error::Config("give either `preset` or `variables`, not both".into())),
        (None, None) => Err(Error::Config("space needs `preset` or `variables`".into())),
    }
}

fn build_variable(v: RawVariable) -> Result<VariableSpec> {
    let kind = match (v.kind, v.granularity) {
        (RawKind::Real, None) => VariableKind::Real,
        (RawKind::Integer, None) => VariableKind::Integer,
        (RawKind::Granular, Some(g)) => VariableKind::Granular(g),
        (RawKind::Granular, None) => {
            return Err(Error::Config(format!("variable `{}`: granular needs `granularity`", v.name)))
        }
        (_, Some(_)) => {
            return Err(Error::Config(format!(
                "variable `{}`: `granularity` applies to granular variables only",
                v.name
            )))
        }
    };
    let transform = match v.transform.as_deref() {
        None => Transform::Identity,
        Some(t) => Transform::from_name(t)
            .ok_or_else(|| Error::Config(format!("variable `{}`: unknown transform `{t}`", v.name)))?,
    };
    let mut spec = VariableSpec::new(&v.name, kind, v.lower, v.upper).with_transform(transform);
    if let Some(label) = v.label {
        spec = spec.with_label(&label);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("run.json"), Path::new("/base"), None)
    }

    #[test]
    fn minimal_mock_lora() {
        let c = parse(
            r#"{"version":1,"problem":{"kind":"builtin","name":"mock-lora"},
                "solver":"mads","budget":100,"seed":7,"output_dir":"out"}"#,
        )
        .unwrap();
        assert_eq!(c.problem.space.dim(), 4);
        assert_eq!(c.solver.budget(), 100);
        assert_eq!(c.solver.seed(), 7);
        assert_eq!(c.output_dir, PathBuf::from("/base/out"));
    }

    #[test]
    fn unknown_solver_reports_line() {
        let err = parse("{\"version\":1,\n\"problem\":{\"kind\":\"builtin\",\"name\":\"sphere\"},\n\"solver\":\"cmaes\",\"budget\":5,\"output_dir\":\"o\"}")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(Error::Config(String::new()).exit_code(), 2);
    }

    #[test]
    fn seed_override_wins() {
        let c = parse_config(
            r#"{"version":1,"problem":{"kind":"builtin","name":"sphere","dim":3},
                "solver":"tpe","budget":20,"seed":1,"output_dir":"o","tpe":{"gamma":0.3}}"#,
            Path::new("run.json"),
            Path::new(""),
            Some(99),
        )
        .unwrap();
        assert_eq!(c.solver.seed(), 99);
        assert_eq!(c.problem.space.dim(), 3);
        match c.solver {
            SolverSettings::Tpe(t) => assert_eq!(t.gamma, 0.3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_solver_block_is_rejected() {
        assert!(parse(
            r#"{"version":1,"problem":{"kind":"builtin","name":"sphere"},
                "solver":"random","budget":5,"output_dir":"o","mads":{}}"#
        )
        .is_err());
    }

    #[test]
    fn custom_variables() {
        let c = parse(
            r#"{"version":1,"solver":"random","budget":5,"output_dir":"o",
                "problem":{"kind":"builtin","name":"sphere","space":{"variables":[
                  {"name":"a","kind":"granular","granularity":0.5,"lower":0,"upper":2},
                  {"name":"b","kind":"real","lower":-6,"upper":-3,"transform":"pow10","label":"LR"}]}}}"#,
        )
        .unwrap();
        let v = c.problem.space.variables();
        assert_eq!(v[0].kind, VariableKind::Granular(0.5));
        assert_eq!(v[1].natural_name(), "LR");
    }

    #[test]
    fn missing_program_exits_3() {
        let err = parse(
            r#"{"version":1,"solver":"mads","budget":5,"output_dir":"o",
                "problem":{"kind":"subprocess","command":["no-such-evaluator-xyz"],"space":{"preset":"lora"}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn wrong_version_is_rejected() {
        assert!(parse(
            r#"{"version":2,"problem":{"kind":"builtin","name":"sphere"},"solver":"mads","budget":5,"output_dir":"o"}"#
        )
        .is_err());
    }
}
