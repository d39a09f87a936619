//! `bbhpo` subcommands.
//!
//! Exit codes: 0 success, 2 usage, config or parse errors, 3 evaluator
//! program not found.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bbhpo_core::analysis::{pareto_filter, summarize_top_k};
use bbhpo_core::{mads, random, tpe, Cache, RunHistory, SpaceDefinition};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cachefile::{load_cache, save_cache};
use crate::config::{load_config, RunConfig, SolverSettings};
use crate::export::{write_report, ReportKind};
use crate::harness::Harness;
use crate::historyfile::{load_history_with_names, save_history};
use crate::scores::load_scores;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "bbhpo", version, about = "Blackbox hyperparameter optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver described by a JSON config.
    Optimize {
        config: PathBuf,
        /// Concurrent evaluations for MADS step batches.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        workers: u32,
    },
    /// Write a plot-ready CSV next to a history file.
    Report {
        history: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Print the ids of non-dominated rows of a score table.
    Pareto { scores: PathBuf },
    /// Print min, max, mean and sample std of each metric over the first k rows.
    Stats {
        scores: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Trace,
    Parallel,
}

/// File names written by `optimize` inside the output directory.
pub const HISTORY_FILE: &str = "history.csv";
pub const CACHE_FILE: &str = "cache.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Best point of a run, in raw and natural units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPoint {
    pub raw: Vec<f64>,
    #[serde(serialize_with = "ordered_map")]
    pub natural: Vec<(String, f64)>,
    pub objective: f64,
}

// JSON object in space order.
fn ordered_map<S: serde::Serializer>(pairs: &[(String, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub solver: String,
    pub problem: String,
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub warm_records: usize,
    pub feasible_found: bool,
    pub best: Option<BestPoint>,
}

/// Result of [`optimize`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub history: RunHistory,
    pub cache: Cache,
    pub summary: Summary,
}

/// Runs the configured solver. Nothing is written to disk.
pub fn optimize(config: &RunConfig, workers: usize) -> Result<Outcome> {
    let problem = &config.problem;
    let mut cache = match &config.warm_cache {
        Some(path) => load_cache(path, &problem.space)?,
        None => Cache::new(),
    };
    let warm_records = cache.len();
    let mut harness = Harness::new(problem, workers);
    let (history, cache_hits) = match &config.solver {
        SolverSettings::Mads(c) => {
            let run = mads::mads_optimize(&mut harness, c, &mut cache, &problem.name)?;
            (run.history, run.cache_hits)
        }
        SolverSettings::Tpe(c) => {
            let run = tpe::tpe_optimize(&mut harness, c, &mut cache, &problem.name)?;
            (run.history, run.cache_hits)
        }
        SolverSettings::Random { seed, budget } => {
            let run = random::random_search(&mut harness, *seed, *budget, &mut cache, &problem.name)?;
            (run.history, run.cache_hits)
        }
    };
    let best = best_in_cache(&cache, &problem.space);
    let summary = Summary {
        solver: config.solver.kind().as_str().to_string(),
        problem: problem.name.clone(),
        seed: config.solver.seed(),
        budget: config.solver.budget(),
        evaluations: history.len(),
        cache_hits,
        warm_records,
        feasible_found: best.is_some(),
        best,
    };
    Ok(Outcome { history, cache, summary })
}

// Lowest feasible objective; ties go to the earliest record.
fn best_in_cache(cache: &Cache, space: &SpaceDefinition) -> Option<BestPoint> {
    let rec = cache
        .records()
        .iter()
        .filter(|r| r.result.is_feasible())
        .fold(None, |best: Option<&bbhpo_core::CacheRecord>, r| match best {
            Some(b) if b.result.objective <= r.result.objective => Some(b),
            _ => Some(r),
        })?;
    Some(BestPoint {
        raw: rec.point.values().to_vec(),
        natural: space.map_to_natural(&rec.point).0,
        objective: rec.result.objective,
    })
}

/// Writes history, cache and summary into `config.output_dir`.
pub fn write_outputs(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let space = &config.problem.space;
    save_history(&outcome.history, space, &dir.join(HISTORY_FILE))?;
    save_cache(
        &outcome.cache,
        space,
        config.problem.constraint_count(),
        &dir.join(CACHE_FILE),
    )?;
    let summary_path = dir.join(SUMMARY_FILE);
    fs::write(&summary_path, render_summary(&outcome.summary)).map_err(|e| Error::io(&summary_path, e))
}

/// Pretty JSON with a trailing newline.
pub fn render_summary(summary: &Summary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

fn cmd_optimize(config_path: &Path, workers: usize, out: &mut dyn Write) -> Result<()> {
    let config = load_config(config_path)?;
    let outcome = optimize(&config, workers)?;
    write_outputs(&config, &outcome)?;
    let s = &outcome.summary;
    let mut text = format!(
        "{} on {}: {} evaluations, {} cache hits\n",
        s.solver, s.problem, s.evaluations, s.cache_hits
    );
    match &s.best {
        Some(b) => {
            let natural: Vec<String> = b
                .natural
                .iter()
                .map(|(n, v)| format!("{n}={}", crate::num::fmt_f64(*v)))
                .collect();
            text.push_str(&format!("best objective {} at {}\n", crate::num::fmt_f64(b.objective), natural.join(" ")));
        }
        None => text.push_str("no feasible point found\n"),
    }
    text.push_str(&format!("outputs in {}\n", config.output_dir.display()));
    write_stdout(out, &text)
}

fn cmd_report(history_path: &Path, kind: ReportKind, out: &mut dyn Write) -> Result<()> {
    let (history, names) = load_history_with_names(history_path)?;
    let path = write_report(&history, &names, history_path, kind)?;
    write_stdout(out, &format!("{}\n", path.display()))
}

fn cmd_pareto(scores: &Path, out: &mut dyn Write) -> Result<()> {
    let table = load_scores(scores)?;
    write_stdout(out, &format!("{}\n", pareto_filter(&table).join(" ")))
}

fn cmd_stats(scores: &Path, k: usize, out: &mut dyn Write) -> Result<()> {
    let table = load_scores(scores)?;
    let stats = summarize_top_k(&table, k)?;
    let text: String = stats
        .iter()
        .map(|s| format!("{} {}\n", s.metric, s.report_line()))
        .collect();
    write_stdout(out, &text)
}

fn write_stdout(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Optimize { config, workers } => cmd_optimize(&config, workers as usize, out),
        Command::Report { history, kind } => {
            let kind = match kind {
                KindArg::Trace => ReportKind::Trace,
                KindArg::Parallel => ReportKind::Parallel,
            };
            cmd_report(&history, kind, out)
        }
        Command::Pareto { scores } => cmd_pareto(&scores, out),
        Command::Stats { scores, k } => cmd_stats(&scores, k, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "bbhpo: {e}");
            e.exit_code()
        }
    }
}
