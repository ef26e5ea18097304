//! Choosing the next pair to query.
//!
//! Pairs are unordered and written `(i, j)` with `i < j`. Every strategy
//! breaks ties lexicographically, so selection is a deterministic function
//! of the interval state.

use std::fmt;
use std::str::FromStr;

use crate::confidence::{approximation_bound, IntervalMatrix, PacParams};
use crate::error::{invalid, Error, Result};
use crate::pruning::refresh_and_prune;

/// Scores closer than this count as tied.
pub const SCORE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Fewest pulls first.
    Uniform,
    /// Widest interval first.
    Opportunistic,
    /// Best case of one more sample.
    Optimistic,
    /// Worst case of one more sample.
    Pessimistic,
    /// Expected outcome of one more sample under the current means.
    Bayesian,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Uniform,
        StrategyKind::Opportunistic,
        StrategyKind::Optimistic,
        StrategyKind::Pessimistic,
        StrategyKind::Bayesian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Uniform => "uniform",
            StrategyKind::Opportunistic => "opportunistic",
            StrategyKind::Optimistic => "optimistic",
            StrategyKind::Pessimistic => "pessimistic",
            StrategyKind::Bayesian => "bayesian",
        }
    }

    pub fn is_lookahead(self) -> bool {
        matches!(self, StrategyKind::Optimistic | StrategyKind::Pessimistic | StrategyKind::Bayesian)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|kind| kind.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown strategy {s:?}")))
    }
}

fn nonempty(available: &[(usize, usize)]) -> Result<()> {
    if available.is_empty() {
        return Err(Error::Exhausted("no pair left to query".into()));
    }
    Ok(())
}

/// Returns the pair minimising `score`, ties going to the lexicographically
/// smallest pair.
fn argmin_by(available: &[(usize, usize)], mut score: impl FnMut((usize, usize)) -> f64) -> (usize, usize) {
    let mut pairs = available.to_vec();
    pairs.sort_unstable();
    let mut best = pairs[0];
    let mut best_score = score(best);
    for &p in &pairs[1..] {
        let s = score(p);
        if s < best_score - SCORE_TOLERANCE {
            best = p;
            best_score = s;
        }
    }
    best
}

pub fn select_uniform(m: &IntervalMatrix, available: &[(usize, usize)]) -> Result<(usize, usize)> {
    nonempty(available)?;
    Ok(argmin_by(available, |(i, j)| m.pulls(i, j) as f64))
}

pub fn select_opportunistic(m: &IntervalMatrix, available: &[(usize, usize)]) -> Result<(usize, usize)> {
    nonempty(available)?;
    Ok(argmin_by(available, |(i, j)| -m.width(i, j)))
}

/// Total interval width after one hypothetical comparison of `i` and `j`,
/// run through the same update as a real sample.
pub fn hypothetical_bound(m: &IntervalMatrix, params: &PacParams, prune: bool, i: usize, j: usize, i_wins: bool) -> f64 {
    let mut next = m.clone();
    next.record(i, j, i_wins);
    refresh_and_prune(&mut next, params, prune);
    approximation_bound(&next)
}

/// Look-ahead score of querying `(i, j)` next; lower is better.
pub fn lookahead_score(
    m: &IntervalMatrix,
    params: &PacParams,
    prune: bool,
    kind: StrategyKind,
    (i, j): (usize, usize),
) -> Result<f64> {
    let win = || hypothetical_bound(m, params, prune, i, j, true);
    let lose = || hypothetical_bound(m, params, prune, i, j, false);
    match kind {
        StrategyKind::Optimistic => Ok(win().min(lose())),
        StrategyKind::Pessimistic => Ok(win().max(lose())),
        StrategyKind::Bayesian => {
            let p = if m.pulls(i, j) == 0 { 0.5 } else { m.mean(i, j).clamp(0.0, 1.0) };
            let mut score = 0.0;
            if p > 0.0 {
                score += p * win();
            }
            if p < 1.0 {
                score += (1.0 - p) * lose();
            }
            Ok(score)
        }
        other => invalid(format!("{other} is not a look-ahead strategy")),
    }
}

/// One-step look-ahead: the pair whose next sample is expected (in the
/// sense of `kind`) to leave the smallest total interval width.
pub fn select_lookahead(
    m: &IntervalMatrix,
    available: &[(usize, usize)],
    kind: StrategyKind,
    params: &PacParams,
    prune: bool,
) -> Result<(usize, usize)> {
    nonempty(available)?;
    if !kind.is_lookahead() {
        return invalid(format!("{kind} is not a look-ahead strategy"));
    }
    Ok(argmin_by(available, |p| lookahead_score(m, params, prune, kind, p).expect("look-ahead kind")))
}

pub fn select(
    kind: StrategyKind,
    m: &IntervalMatrix,
    available: &[(usize, usize)],
    params: &PacParams,
    prune: bool,
) -> Result<(usize, usize)> {
    match kind {
        StrategyKind::Uniform => select_uniform(m, available),
        StrategyKind::Opportunistic => select_opportunistic(m, available),
        _ => select_lookahead(m, available, kind, params, prune),
    }
}

/// All unordered pairs of `k` arms in lexicographic order.
pub fn all_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize) -> PacParams {
        PacParams::with_replacement(k, 0.1 * (k * (k - 1) / 2) as f64, 0.05).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for kind in StrategyKind::ALL {
            assert_eq!(kind.to_string().parse::<StrategyKind>().unwrap(), kind);
        }
        assert!("greedy".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn uniform_examples() {
        let m = IntervalMatrix::new(3);
        assert_eq!(select_uniform(&m, &all_pairs(3)).unwrap(), (0, 1));
        let mut m = IntervalMatrix::new(3);
        m.record(0, 1, true);
        m.record(1, 0, true);
        m.record(0, 2, true);
        m.record(1, 2, false);
        assert_eq!(select_uniform(&m, &all_pairs(3)).unwrap(), (0, 2));
        assert_eq!(select_uniform(&m, &[(1, 2)]).unwrap(), (1, 2));
        assert!(matches!(select_uniform(&m, &[]), Err(Error::Exhausted(_))));
    }

    #[test]
    fn opportunistic_examples() {
        let m = IntervalMatrix::new(4);
        assert_eq!(select_opportunistic(&m, &all_pairs(4)).unwrap(), (0, 1));
        let mut m = IntervalMatrix::new(3);
        m.set_symmetric(0, 1, 0.0);
        m.set_symmetric(0, 2, 0.1);
        m.set_symmetric(1, 2, 0.2);
        assert_eq!(select_opportunistic(&m, &all_pairs(3)).unwrap(), (1, 2));
        assert_eq!(select_opportunistic(&m, &[(0, 1), (0, 2)]).unwrap(), (0, 2));
    }

    #[test]
    fn lookahead_rejects_non_lookahead_kinds() {
        let m = IntervalMatrix::new(3);
        assert!(select_lookahead(&m, &all_pairs(3), StrategyKind::Uniform, &params(3), true).is_err());
    }

    #[test]
    fn lookahead_scores_are_ordered() {
        let p = params(4);
        let mut m = IntervalMatrix::new(4);
        for (step, (i, j)) in all_pairs(4).into_iter().cycle().take(40).enumerate() {
            m.record(i, j, step % 3 != 0);
        }
        refresh_and_prune(&mut m, &p, true);
        for pair in all_pairs(4) {
            let lo = lookahead_score(&m, &p, true, StrategyKind::Optimistic, pair).unwrap();
            let mid = lookahead_score(&m, &p, true, StrategyKind::Bayesian, pair).unwrap();
            let hi = lookahead_score(&m, &p, true, StrategyKind::Pessimistic, pair).unwrap();
            assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12, "{pair:?}: {lo} {mid} {hi}");
        }
    }

    #[test]
    fn bayesian_with_certain_mean_uses_one_branch() {
        let p = params(3);
        let mut m = IntervalMatrix::new(3);
        for _ in 0..5 {
            m.record(0, 1, true);
        }
        refresh_and_prune(&mut m, &p, false);
        let score = lookahead_score(&m, &p, false, StrategyKind::Bayesian, (0, 1)).unwrap();
        assert_eq!(score, hypothetical_bound(&m, &p, false, 0, 1, true));
    }

    #[test]
    fn strategies_agree_when_pruning_is_inert_and_pulls_equal() {
        let p = params(4);
        let mut m = IntervalMatrix::new(4);
        for (i, j) in all_pairs(4) {
            m.record(i, j, true);
            m.record(i, j, false);
        }
        refresh_and_prune(&mut m, &p, true);
        let picks: Vec<_> = StrategyKind::ALL.iter().map(|&s| select(s, &m, &all_pairs(4), &p, true).unwrap()).collect();
        assert!(picks.iter().all(|&x| x == (0, 1)), "{picks:?}");
    }
}
