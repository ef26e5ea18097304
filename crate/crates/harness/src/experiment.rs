//! Batch runs: every strategy on the same seeded instances, with per-run
//! traces, per-strategy aggregates and a comparison chart.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kemeny_elicit::seed::{derive, rng};
use kemeny_elicit::{
    adaptive_elicit, AdaptiveConfig, BernoulliOracle, ComparisonSource, ElicitationTrace, Outcome,
    PreferenceProfile, StrategyKind, Termination, VoterPool,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode};
use crate::error::{HarnessError, Result};
use crate::svg::{line_chart, Series};

pub const TRACE_HEADER: [&str; 7] = ["step", "pair_i", "pair_j", "outcome", "total_bound_W", "true_gap", "pulls_total"];
pub const AGGREGATE_HEADER: [&str; 5] = ["step", "strategy", "mean_W", "mean_true_gap", "live_instances"];

/// The profile of instance `index`. Depends only on the master seed, so
/// every strategy sees the same instances.
pub fn instance_profile(cfg: &ExperimentConfig, index: usize) -> Result<PreferenceProfile> {
    let mut r = rng(derive(cfg.seed, 2 * index as u64));
    Ok(cfg.generator.generate(cfg.k, cfg.n, &mut r)?)
}

/// Seed of the comparison source of instance `index`.
pub fn instance_sampler_seed(cfg: &ExperimentConfig, index: usize) -> u64 {
    derive(cfg.seed, 2 * index as u64 + 1)
}

#[derive(Debug, Clone)]
pub struct Run {
    pub instance: usize,
    pub strategy: StrategyKind,
    pub trace: ElicitationTrace,
}

#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub step: u64,
    pub mean_bound: f64,
    pub mean_gap: Option<f64>,
    pub live: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    /// Ordered by instance, then by strategy in config order.
    pub runs: Vec<Run>,
    /// Mean optimal score of the hidden matrices.
    pub mean_true_score: Option<f64>,
}

impl Report {
    pub fn runs_for(&self, strategy: StrategyKind) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn aggregate(&self, strategy: StrategyKind) -> Vec<AggregateRow> {
        let traces: Vec<&ElicitationTrace> = self.runs_for(strategy).map(|r| &r.trace).collect();
        let longest = traces.iter().map(|t| t.steps.len()).max().unwrap_or(0);
        (0..longest)
            .map(|s| {
                let live: Vec<_> = traces.iter().filter_map(|t| t.steps.get(s)).collect();
                let gaps: Vec<f64> = live.iter().filter_map(|r| r.true_gap).collect();
                AggregateRow {
                    step: s as u64 + 1,
                    mean_bound: live.iter().map(|r| r.bound).sum::<f64>() / live.len() as f64,
                    mean_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
                    live: live.len(),
                }
            })
            .collect()
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "k={} n={} rho={} delta={} mode={} instances={} seed={}",
            cfg.k,
            cfg.n,
            (cfg.rho_value() * 1e9).round() / 1e9,
            cfg.delta,
            cfg.mode.name(),
            cfg.instances,
            cfg.seed
        );
        if let Some(s) = self.mean_true_score {
            let _ = writeln!(out, "mean true Kemeny score: {s:.4}");
        }
        for &strategy in &cfg.strategies {
            let runs: Vec<_> = self.runs_for(strategy).collect();
            let count = runs.len() as f64;
            let samples = runs.iter().map(|r| r.trace.total_samples as f64).sum::<f64>() / count;
            let bound = runs.iter().map(|r| r.trace.final_bound).sum::<f64>() / count;
            let gaps: Vec<f64> = runs.iter().filter_map(|r| r.trace.final_gap()).collect();
            let met = runs.iter().filter(|r| r.trace.termination == Termination::BoundMet).count();
            let misses = runs.iter().filter(|r| r.trace.final_gap().is_some_and(|g| g > cfg.rho_value() + 1e-9)).count();
            let uncovered = runs
                .iter()
                .filter(|r| r.trace.steps.last().and_then(|s| s.covered) == Some(false))
                .count();
            let _ = writeln!(
                out,
                "{strategy}: mean samples {samples:.1}, mean final bound {bound:.4}, mean final gap {:.4}, bound met {met}/{}, gap above rho {misses}, truth outside intervals {uncovered}",
                gaps.iter().sum::<f64>() / gaps.len().max(1) as f64,
                runs.len(),
            );
        }
        out
    }
}

fn run_one(cfg: &ExperimentConfig, profile: &PreferenceProfile, instance: usize, strategy: StrategyKind) -> Result<Run> {
    let params = cfg.params()?;
    let config = AdaptiveConfig::new(strategy, cfg.prune, &params)?
        .with_budget(cfg.budget_value()?)
        .with_cert_every(cfg.cert_every_value());
    let seed = instance_sampler_seed(cfg, instance);
    let mut source: Box<dyn ComparisonSource + Send> = match cfg.mode {
        Mode::WithReplacement => Box::new(BernoulliOracle::new(kemeny_elicit::profile_to_matrix(profile), seed)),
        Mode::WithoutReplacement => Box::new(VoterPool::new(profile.clone(), seed)),
    };
    let (_, trace) = adaptive_elicit(source.as_mut(), &params, &config)?;
    Ok(Run { instance, strategy, trace })
}

/// Runs every strategy on every instance, in a pool of `cfg.jobs` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let profiles = (0..cfg.instances).map(|i| instance_profile(cfg, i)).collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, StrategyKind)> =
        (0..cfg.instances).flat_map(|i| cfg.strategies.iter().map(move |&s| (i, s))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let runs = pool.install(|| {
        tasks.par_iter().map(|&(i, s)| run_one(cfg, &profiles[i], i, s)).collect::<Result<Vec<_>>>()
    })?;
    let scores: Vec<f64> = cfg
        .strategies
        .first()
        .map(|&s| runs.iter().filter(|r| r.strategy == s).filter_map(|r| r.trace.optimal_score).collect())
        .unwrap_or_default();
    let mean_true_score = (scores.len() == cfg.instances).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
    Ok(Report { runs, mean_true_score })
}

/// Shortest decimal after rounding to nine places, so sums of five-digit
/// bounds print without float noise.
fn fmt_f64(x: f64) -> String {
    format!("{}", (x * 1e9).round() / 1e9)
}

fn outcome_label(o: Outcome) -> &'static str {
    match o {
        Outcome::IWins => "i",
        Outcome::JWins => "j",
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })
}

pub fn write_trace_csv(path: &Path, trace: &ElicitationTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    w.write_record(TRACE_HEADER).map_err(wrap)?;
    for s in &trace.steps {
        w.write_record([
            s.step.to_string(),
            s.pair.0.to_string(),
            s.pair.1.to_string(),
            outcome_label(s.outcome).to_string(),
            fmt_f64(s.bound),
            s.true_gap.map(fmt_f64).unwrap_or_default(),
            s.step.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_aggregate_csv(path: &Path, strategy: StrategyKind, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    w.write_record(AGGREGATE_HEADER).map_err(wrap)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            strategy.to_string(),
            fmt_f64(r.mean_bound),
            r.mean_gap.map(fmt_f64).unwrap_or_default(),
            r.live.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn trace_path(out: &Path, instance: usize, strategy: StrategyKind) -> PathBuf {
    out.join("traces").join(format!("instance_{instance:04}_{strategy}.csv"))
}

pub fn aggregate_path(out: &Path, strategy: StrategyKind) -> PathBuf {
    out.join(format!("aggregate_{strategy}.csv"))
}

/// Writes traces, aggregates, `comparison.svg` and `summary.txt` under
/// `cfg.out`. Returns the written paths.
pub fn write_outputs(cfg: &ExperimentConfig, report: &Report) -> Result<Vec<PathBuf>> {
    let traces = cfg.out.join("traces");
    fs::create_dir_all(&traces).map_err(|e| HarnessError::io(&traces, e))?;
    let mut written = Vec::new();
    for run in &report.runs {
        let path = trace_path(&cfg.out, run.instance, run.strategy);
        write_trace_csv(&path, &run.trace)?;
        written.push(path);
    }
    let mut series = Vec::new();
    for &strategy in &cfg.strategies {
        let rows = report.aggregate(strategy);
        let path = aggregate_path(&cfg.out, strategy);
        write_aggregate_csv(&path, strategy, &rows)?;
        written.push(path);
        series.push(Series {
            name: strategy.to_string(),
            points: rows.iter().map(|r| (r.step as f64, r.mean_bound)).collect(),
        });
    }
    let svg = cfg.out.join("comparison.svg");
    fs::write(&svg, line_chart("Average confidence bound", "samples", "mean certified bound", &series))
        .map_err(|e| HarnessError::io(&svg, e))?;
    written.push(svg);
    let summary = cfg.out.join("summary.txt");
    fs::write(&summary, report.summary(cfg)).map_err(|e| HarnessError::io(&summary, e))?;
    written.push(summary);
    Ok(written)
}
