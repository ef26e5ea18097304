//! Elicitation loops: the two fixed-budget algorithms, which sample every
//! pair the same number of times, and the adaptive loop, which picks one
//! pair at a time and stops as soon as the certified bound drops to `rho`.

use std::fmt;

use crate::confidence::{
    approximation_bound, best_bound, hoeffding_bound, sample_size_with_replacement,
    without_replacement_plan, IntervalMatrix, PacParams, SamplingMode,
};
use crate::error::{invalid, Result};
use crate::oracle::{ComparisonSource, Outcome};
use crate::pruning::refresh_and_prune;
use crate::ranking::{kemeny_score, solve_kemeny, KemenyResult, Ranking, SOLVER_CAP};
use crate::strategy::{all_pairs, select, StrategyKind};

/// Slack when comparing the certified bound with `rho`.
const BOUND_SLACK: f64 = 1e-12;

/// Tolerance for checking whether the truth lies inside the intervals.
const COVER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The certified bound reached `rho`.
    BoundMet,
    Budget,
    /// Every pair was asked of every voter.
    Exhausted,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::BoundMet => "bound-met",
            Termination::Budget => "budget",
            Termination::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// One-based step number; equals the total samples drawn so far.
    pub step: u64,
    /// The pair as queried; `outcome` refers to its first arm.
    pub pair: (usize, usize),
    pub outcome: Outcome,
    pub pulls_hash: u64,
    /// Total certified bound after this sample.
    pub bound: f64,
    /// Whether a ranking was solved at this step.
    pub certified: bool,
    /// Score gap of the current ranking on the hidden matrix, on certified
    /// steps when the truth is tracked.
    pub true_gap: Option<f64>,
    /// Whether the hidden matrix lay inside all intervals, on certified steps.
    pub covered: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationTrace {
    pub steps: Vec<StepRecord>,
    pub ranking: Ranking,
    pub total_samples: u64,
    pub termination: Termination,
    pub final_bound: f64,
    /// The optimal score on the hidden matrix, when tracked.
    pub optimal_score: Option<f64>,
}

impl ElicitationTrace {
    /// Gap of the returned ranking on the hidden matrix, when tracked.
    pub fn final_gap(&self) -> Option<f64> {
        self.steps.last().and_then(|s| s.true_gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub strategy: StrategyKind,
    pub prune: bool,
    /// Maximum total samples.
    pub budget: u64,
    /// Solve for a ranking every this many steps (and at the end).
    pub cert_every: u64,
    /// Evaluate rankings against the hidden matrix.
    pub track_truth: bool,
}

impl AdaptiveConfig {
    /// Defaults: [`default_budget`], [`default_cert_every`], truth tracked.
    pub fn new(strategy: StrategyKind, prune: bool, params: &PacParams) -> Result<Self> {
        Ok(Self {
            strategy,
            prune,
            budget: default_budget(params)?,
            cert_every: default_cert_every(params.k()),
            track_truth: true,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_cert_every(mut self, cert_every: u64) -> Self {
        self.cert_every = cert_every;
        self
    }

    pub fn with_track_truth(mut self, track: bool) -> Self {
        self.track_truth = track;
        self
    }
}

/// Twice the fixed-budget total with replacement; the whole population for
/// every pair without.
pub fn default_budget(params: &PacParams) -> Result<u64> {
    let pairs = params.pairs() as u64;
    Ok(match params.mode() {
        SamplingMode::WithReplacement => 2 * pairs * sample_size_with_replacement(params),
        SamplingMode::WithoutReplacement { n } => pairs * n as u64,
    })
}

pub fn default_cert_every(k: usize) -> u64 {
    if k <= 6 {
        1
    } else {
        10
    }
}

fn check_source<S: ComparisonSource + ?Sized>(source: &S, params: &PacParams) -> Result<()> {
    if source.k() != params.k() {
        return invalid(format!("source has {} arms, parameters expect {}", source.k(), params.k()));
    }
    if source.mode() != params.mode() {
        return invalid(format!("source samples {:?}, parameters expect {:?}", source.mode(), params.mode()));
    }
    Ok(())
}

/// Evaluates rankings against the source's hidden matrix.
struct Judge {
    optimal: Option<f64>,
}

impl Judge {
    fn new<S: ComparisonSource + ?Sized>(source: &S, enabled: bool) -> Result<Self> {
        let optimal = if enabled && source.k() <= SOLVER_CAP {
            Some(solve_kemeny(source.ground_truth(), &Ranking::identity(source.k()))?.score)
        } else {
            None
        };
        Ok(Self { optimal })
    }

    fn gap<S: ComparisonSource + ?Sized>(&self, source: &S, r: &Ranking) -> Result<Option<f64>> {
        match self.optimal {
            Some(opt) => Ok(Some((kemeny_score(source.ground_truth(), r)? - opt).max(0.0))),
            None => Ok(None),
        }
    }

    fn covered<S: ComparisonSource + ?Sized>(&self, source: &S, m: &IntervalMatrix) -> Option<bool> {
        self.optimal.map(|_| m.contains(source.ground_truth(), COVER_TOLERANCE))
    }
}

/// Samples each pair `t` times (pairs in lexicographic order), then solves
/// on the means shifted up by `c` everywhere.
fn fixed_plan<S: ComparisonSource + ?Sized>(
    source: &mut S,
    params: &PacParams,
    t: u64,
    c: f64,
) -> Result<(KemenyResult, ElicitationTrace)> {
    let k = params.k();
    let judge = Judge::new(source, true)?;
    let mut m = IntervalMatrix::new(k);
    let mut bound = approximation_bound(&m);
    let mut steps = Vec::with_capacity(params.pairs() * t as usize);
    for (i, j) in all_pairs(k) {
        for _ in 0..t {
            let outcome = source.draw(i, j)?;
            m.record(i, j, outcome.i_wins());
            let old = m.width(i, j);
            m.set_symmetric(i, j, best_bound(m.pulls(i, j), params.n(), params));
            bound += m.width(i, j) - old;
            steps.push(StepRecord {
                step: steps.len() as u64 + 1,
                pair: (i, j),
                outcome,
                pulls_hash: m.pulls_hash(),
                bound,
                certified: false,
                true_gap: None,
                covered: None,
            });
        }
    }
    for (i, j) in all_pairs(k) {
        m.set_symmetric(i, j, c);
    }
    let final_bound = approximation_bound(&m);
    let result = solve_kemeny(&m.upper_matrix(), &Ranking::identity(k))?;
    if let Some(last) = steps.last_mut() {
        last.bound = final_bound;
        last.certified = true;
        last.true_gap = judge.gap(source, &result.ranking)?;
        last.covered = judge.covered(source, &m);
    }
    let termination = if final_bound <= params.rho() + BOUND_SLACK { Termination::BoundMet } else { Termination::Budget };
    let trace = ElicitationTrace {
        total_samples: steps.len() as u64,
        steps,
        ranking: result.ranking.clone(),
        termination,
        final_bound,
        optimal_score: judge.optimal,
    };
    Ok((result, trace))
}

/// Fixed-budget elicitation with independent samples: every pair is
/// compared `ceil(x^2 y / 2)` times. With probability at least `1 - delta`
/// the returned ranking's score is within `rho` of optimal.
pub fn kemeny_el_with_replacement<S: ComparisonSource + ?Sized>(
    source: &mut S,
    params: &PacParams,
) -> Result<(KemenyResult, ElicitationTrace)> {
    if params.mode() != SamplingMode::WithReplacement {
        return invalid("parameters are for sampling without replacement");
    }
    check_source(source, params)?;
    let t = sample_size_with_replacement(params);
    fixed_plan(source, params, t, hoeffding_bound(t, params))
}

/// Fixed-budget elicitation from a finite population, each voter asked
/// about each pair at most once.
pub fn kemeny_el_without_replacement<S: ComparisonSource + ?Sized>(
    source: &mut S,
    params: &PacParams,
) -> Result<(KemenyResult, ElicitationTrace)> {
    check_source(source, params)?;
    let (t, c) = without_replacement_plan(params)?;
    fixed_plan(source, params, t, c)
}

/// Adaptive elicitation: repeatedly select a pair, draw one answer, refresh
/// all bounds (and prune them if enabled), until the certified bound is at
/// most `rho`, the budget is spent, or no pair has answers left.
///
/// The returned ranking is the Kemeny ranking of the upper-bound matrix
/// `mean_ij + upper_ij`, whose score gap is at most the final bound whenever
/// the intervals hold.
pub fn adaptive_elicit<S: ComparisonSource + ?Sized>(
    source: &mut S,
    params: &PacParams,
    config: &AdaptiveConfig,
) -> Result<(KemenyResult, ElicitationTrace)> {
    check_source(source, params)?;
    if config.budget == 0 || config.cert_every == 0 {
        return invalid("budget and certification interval must be at least 1");
    }
    let k = params.k();
    let judge = Judge::new(source, config.track_truth)?;
    let pairs = all_pairs(k);
    let available = |s: &S| pairs.iter().copied().filter(|&(i, j)| s.remaining(i, j) != Some(0)).collect::<Vec<_>>();
    let mut m = IntervalMatrix::new(k);
    let mut steps = Vec::new();
    let mut open = available(source);
    loop {
        let step = steps.len() as u64 + 1;
        let (i, j) = select(config.strategy, &m, &open, params, config.prune)?;
        let outcome = source.draw(i, j)?;
        m.record(i, j, outcome.i_wins());
        refresh_and_prune(&mut m, params, config.prune);
        let bound = approximation_bound(&m);
        open = available(source);

        let termination = if bound <= params.rho() + BOUND_SLACK {
            Some(Termination::BoundMet)
        } else if open.is_empty() {
            Some(Termination::Exhausted)
        } else if step >= config.budget {
            Some(Termination::Budget)
        } else {
            None
        };
        let certified = termination.is_some() || step.is_multiple_of(config.cert_every);
        let mut record = StepRecord {
            step,
            pair: (i, j),
            outcome,
            pulls_hash: m.pulls_hash(),
            bound,
            certified,
            true_gap: None,
            covered: None,
        };
        let mut solved = None;
        if certified {
            let result = solve_kemeny(&m.upper_matrix(), &Ranking::identity(k))?;
            record.true_gap = judge.gap(source, &result.ranking)?;
            record.covered = judge.covered(source, &m);
            solved = Some(result);
        }
        steps.push(record);
        if let Some(termination) = termination {
            let result = solved.expect("solved at termination");
            let trace = ElicitationTrace {
                total_samples: step,
                steps,
                ranking: result.ranking.clone(),
                termination,
                final_bound: bound,
                optimal_score: judge.optimal,
            };
            return Ok((result, trace));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::WinMatrix;
    use crate::oracle::{BernoulliOracle, VoterPool};
    use crate::preferences::{gen_uniform_profile, PreferenceProfile};
    use crate::seed;

    #[test]
    fn fixed_with_replacement_sample_count() {
        let params = PacParams::with_replacement(4, 0.6, 0.05).unwrap();
        let q = WinMatrix::from_upper(4, |_, _| 1.0).unwrap();
        let mut oracle = BernoulliOracle::new(q, 3);
        let (result, trace) = kemeny_el_with_replacement(&mut oracle, &params).unwrap();
        assert_eq!(trace.total_samples, 6 * 1097);
        assert_eq!(result.ranking.order(), &[0, 1, 2, 3]);
        assert_eq!(trace.termination, Termination::BoundMet);
        assert_eq!(trace.final_gap(), Some(0.0));
    }

    #[test]
    fn fixed_without_replacement_full_population() {
        let params = PacParams::without_replacement(6, 10, 1.5, 0.05).unwrap();
        let profile = gen_uniform_profile(6, 10, &mut seed::rng(4)).unwrap();
        let mut pool = VoterPool::new(profile, 9);
        let (_, trace) = kemeny_el_without_replacement(&mut pool, &params).unwrap();
        assert_eq!(trace.total_samples, 150);
        assert_eq!(trace.final_bound, 0.0);
        assert_eq!(trace.final_gap(), Some(0.0));
    }

    #[test]
    fn mismatched_source_is_rejected() {
        let params = PacParams::with_replacement(3, 0.3, 0.05).unwrap();
        let mut oracle = BernoulliOracle::new(WinMatrix::uniform(4), 0);
        assert!(kemeny_el_with_replacement(&mut oracle, &params).is_err());
        let profile = PreferenceProfile::from_orders(3, &[vec![0, 1, 2]]).unwrap();
        let mut pool = VoterPool::new(profile, 0);
        assert!(kemeny_el_with_replacement(&mut pool, &params).is_err());
    }

    #[test]
    fn budget_of_one() {
        let params = PacParams::with_replacement(4, 0.6, 0.05).unwrap();
        let mut oracle = BernoulliOracle::new(WinMatrix::uniform(4), 1);
        let config = AdaptiveConfig::new(StrategyKind::Uniform, true, &params).unwrap().with_budget(1);
        let (_, trace) = adaptive_elicit(&mut oracle, &params, &config).unwrap();
        assert_eq!(trace.total_samples, 1);
        assert_eq!(trace.termination, Termination::Budget);
        assert!(trace.final_bound > 0.6);
        assert_eq!(trace.steps[0].pair, (0, 1));
    }

    #[test]
    fn adaptive_exhausts_small_population() {
        let params = PacParams::without_replacement(3, 4, 0.01, 0.05).unwrap();
        let profile = PreferenceProfile::from_orders(3, &[vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]]).unwrap();
        let mut pool = VoterPool::new(profile, 2);
        let config = AdaptiveConfig::new(StrategyKind::Opportunistic, true, &params).unwrap();
        let (result, trace) = adaptive_elicit(&mut pool, &params, &config).unwrap();
        assert!(trace.total_samples <= 12);
        assert_eq!(trace.final_gap(), Some(0.0));
        let exact = solve_kemeny(pool.ground_truth(), &Ranking::identity(3)).unwrap();
        if trace.total_samples == 12 {
            assert_eq!(result.ranking, exact.ranking);
        }
    }

    #[test]
    fn defaults() {
        let p = PacParams::with_replacement(4, 0.6, 0.05).unwrap();
        assert_eq!(default_budget(&p).unwrap(), 2 * 6 * 1097);
        let p = PacParams::without_replacement(6, 10, 1.5, 0.05).unwrap();
        assert_eq!(default_budget(&p).unwrap(), 150);
        assert_eq!(default_cert_every(6), 1);
        assert_eq!(default_cert_every(7), 10);
    }
}
