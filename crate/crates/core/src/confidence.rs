//! Confidence bounds on estimated winning probabilities, the per-pair
//! sample sizes they imply, and the interval state kept during elicitation.
//!
//! With `x = k(k-1)/rho` and `y = ln(k(k-1)/delta)`:
//!
//! | sampling                 | bound after `t` pulls                  |
//! |--------------------------|----------------------------------------|
//! | with replacement         | `c   = sqrt(y / 2t)`                    |
//! | without, any `t`         | `c'  = sqrt((n-t+1) y / 2tn)`           |
//! | without, useful `t > n/2`| `c'' = sqrt((n-t)(t+1) y / 2t^2 n)`     |
//!
//! Every bound is a simultaneous `(1 - delta)` confidence bound for all
//! `k(k-1)` ordered entries, and all bounds handed to callers are rounded to
//! five decimal digits.

use crate::error::{invalid, Result};
use crate::matrix::{ScoreMatrix, WinMatrix};

/// Offset used for pairs that have not been sampled: the interval `[0, 1]`
/// around the initial estimate 0.5.
pub const VACUOUS_BOUND: f64 = 0.5;

/// Rounds to five decimal digits, halves away from zero.
pub fn round5(x: f64) -> f64 {
    (x * 1e5).round() / 1e5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    WithReplacement,
    WithoutReplacement { n: usize },
}

impl SamplingMode {
    pub fn population(self) -> Option<usize> {
        match self {
            SamplingMode::WithReplacement => None,
            SamplingMode::WithoutReplacement { n } => Some(n),
        }
    }
}

/// Accuracy target `rho` (on the Kemeny score gap) and failure probability
/// `delta` for `k` arms, optionally for a finite population of `n` voters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacParams {
    k: usize,
    n: Option<usize>,
    rho: f64,
    delta: f64,
}

impl PacParams {
    pub fn new(k: usize, n: Option<usize>, rho: f64, delta: f64) -> Result<Self> {
        if k < 2 {
            return invalid(format!("need at least two arms, got {k}"));
        }
        let worst = (k * (k - 1)) as f64 / 2.0;
        if !(rho > 0.0 && rho <= worst) {
            return invalid(format!("rho must lie in (0, {worst}], got {rho}"));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return invalid(format!("delta must lie in (0, 0.5), got {delta}"));
        }
        if n == Some(0) {
            return invalid("population must be positive");
        }
        let p = Self { k, n, rho, delta };
        if p.y() <= 1.0 {
            return invalid(format!("ln(k(k-1)/delta) = {} must exceed 1", p.y()));
        }
        Ok(p)
    }

    pub fn with_replacement(k: usize, rho: f64, delta: f64) -> Result<Self> {
        Self::new(k, None, rho, delta)
    }

    pub fn without_replacement(k: usize, n: usize, rho: f64, delta: f64) -> Result<Self> {
        Self::new(k, Some(n), rho, delta)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> Option<usize> {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> SamplingMode {
        match self.n {
            None => SamplingMode::WithReplacement,
            Some(n) => SamplingMode::WithoutReplacement { n },
        }
    }

    fn ordered_pairs(&self) -> f64 {
        (self.k * (self.k - 1)) as f64
    }

    /// `k(k-1) / rho`
    pub fn x(&self) -> f64 {
        self.ordered_pairs() / self.rho
    }

    /// `ln(k(k-1) / delta)`
    pub fn y(&self) -> f64 {
        (self.ordered_pairs() / self.delta).ln()
    }

    /// Number of unordered pairs, `k(k-1)/2`.
    pub fn pairs(&self) -> usize {
        self.k * (self.k - 1) / 2
    }
}

/// Unrounded bound formulas, parameterised by `y` directly.
pub mod formulas {
    pub fn hoeffding(t: f64, y: f64) -> f64 {
        (y / (2.0 * t)).sqrt()
    }

    pub fn serfling(t: f64, n: f64, y: f64) -> f64 {
        ((n - t + 1.0) * y / (2.0 * t * n)).sqrt()
    }

    pub fn serfling_reverse(t: f64, n: f64, y: f64) -> f64 {
        ((n - t) * (t + 1.0) * y / (2.0 * t * t * n)).sqrt()
    }
}

/// `sqrt(y / 2t)`, or [`VACUOUS_BOUND`] before the first pull.
pub fn hoeffding_bound(t: u64, params: &PacParams) -> f64 {
    if t == 0 {
        return VACUOUS_BOUND;
    }
    round5(formulas::hoeffding(t as f64, params.y()))
}

fn check_population(t: u64, n: usize) -> Result<()> {
    if n == 0 || t > n as u64 {
        return invalid(format!("{t} pulls exceed the population of {n}"));
    }
    Ok(())
}

/// `sqrt((n-t+1) y / 2tn)` for sampling without replacement.
pub fn serfling_bound(t: u64, n: usize, params: &PacParams) -> Result<f64> {
    check_population(t, n)?;
    if t == 0 {
        return Ok(VACUOUS_BOUND);
    }
    Ok(round5(formulas::serfling(t as f64, n as f64, params.y())))
}

/// `sqrt((n-t)(t+1) y / 2t^2 n)`; tighter than [`serfling_bound`] once `t > n/2`.
pub fn serfling_reverse_bound(t: u64, n: usize, params: &PacParams) -> Result<f64> {
    check_population(t, n)?;
    if t == 0 {
        return Ok(VACUOUS_BOUND);
    }
    Ok(round5(formulas::serfling_reverse(t as f64, n as f64, params.y())))
}

/// Tightest available bound after `t` pulls. Pull counts above the
/// population are clamped to it.
pub fn best_bound(t: u64, n: Option<usize>, params: &PacParams) -> f64 {
    if t == 0 {
        return VACUOUS_BOUND;
    }
    match n {
        None => hoeffding_bound(t, params),
        Some(n) => {
            let t = t.min(n as u64);
            let a = serfling_bound(t, n, params).expect("t within population");
            let b = serfling_reverse_bound(t, n, params).expect("t within population");
            a.min(b)
        }
    }
}

/// Pulls per pair for the with-replacement algorithm, `ceil(x^2 y / 2)`.
pub fn sample_size_with_replacement(params: &PacParams) -> u64 {
    let x = params.x();
    (x * x * params.y() / 2.0).ceil() as u64
}

/// Pulls per pair and the matching confidence bound when sampling without
/// replacement. Small populations (`n < (x^2 y - 4)/2`) use the reversed
/// bound, larger ones the plain finite-population bound.
pub fn without_replacement_plan(params: &PacParams) -> Result<(u64, f64)> {
    let Some(n) = params.n() else {
        return invalid("sampling without replacement needs a population size");
    };
    let x2y = params.x().powi(2) * params.y();
    let nf = n as f64;
    let small = nf < (x2y - 4.0) / 2.0;
    let raw = if small { (x2y * nf + 2.0 * nf) / (2.0 * nf + x2y) } else { x2y * (nf + 1.0) / (2.0 * nf + x2y) };
    let t = (raw.ceil() as u64).clamp(1, n as u64);
    let c = if small { serfling_reverse_bound(t, n, params)? } else { serfling_bound(t, n, params)? };
    Ok((t, c))
}

pub fn sample_size_without_replacement(params: &PacParams) -> Result<u64> {
    without_replacement_plan(params).map(|(t, _)| t)
}

/// Per-pair estimates and (possibly asymmetric) confidence offsets.
///
/// The interval for `q_ij` is `[mean_ij - lower_ij, mean_ij + upper_ij]`.
/// Once intervals have been made consistent across `(i, j)` and `(j, i)`,
/// `lower_ij == upper_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    k: usize,
    pulls: Vec<u64>,
    wins: Vec<u64>,
    pub(crate) means: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) lower: Vec<f64>,
}

impl IntervalMatrix {
    /// Nothing sampled yet: every mean 0.5, every interval `[0, 1]`.
    pub fn new(k: usize) -> Self {
        let mut offsets = vec![VACUOUS_BOUND; k * k];
        for i in 0..k {
            offsets[i * k + i] = 0.0;
        }
        Self {
            k,
            pulls: vec![0; k * k],
            wins: vec![0; k * k],
            means: vec![0.5; k * k],
            upper: offsets.clone(),
            lower: offsets,
        }
    }

    /// Builds a state from given means and offsets (row-major `k x k`),
    /// without sample counts.
    pub fn from_parts(k: usize, means: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if [means.len(), lower.len(), upper.len()].iter().any(|&l| l != k * k) {
            return invalid(format!("expected {} entries per matrix", k * k));
        }
        for i in 0..k {
            for j in i + 1..k {
                if (means[i * k + j] + means[j * k + i] - 1.0).abs() > 1e-12 {
                    return invalid(format!("means for ({i}, {j}) do not sum to 1"));
                }
            }
        }
        Ok(Self { k, pulls: vec![0; k * k], wins: vec![0; k * k], means, upper, lower })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pulls(&self, i: usize, j: usize) -> u64 {
        self.pulls[i * self.k + j]
    }

    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.k + j]
    }

    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.means[i * self.k + j]
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        self.upper[i * self.k + j]
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.k + j]
    }

    /// Samples taken over all pairs.
    pub fn total_pulls(&self) -> u64 {
        (0..self.k).flat_map(|i| (i + 1..self.k).map(move |j| (i, j))).map(|(i, j)| self.pulls(i, j)).sum()
    }

    /// Records one comparison of `i` against `j`.
    pub fn record(&mut self, i: usize, j: usize, i_wins: bool) {
        let k = self.k;
        assert!(i != j && i < k && j < k, "invalid pair ({i}, {j})");
        self.pulls[i * k + j] += 1;
        self.pulls[j * k + i] += 1;
        if i_wins {
            self.wins[i * k + j] += 1;
        } else {
            self.wins[j * k + i] += 1;
        }
        let t = self.pulls[i * k + j] as f64;
        self.means[i * k + j] = self.wins[i * k + j] as f64 / t;
        self.means[j * k + i] = self.wins[j * k + i] as f64 / t;
    }

    /// Sets the same offset on both sides of both orientations of a pair.
    pub fn set_symmetric(&mut self, i: usize, j: usize, c: f64) {
        let k = self.k;
        for idx in [i * k + j, j * k + i] {
            self.upper[idx] = c;
            self.lower[idx] = c;
        }
    }

    /// Resets every pair's offsets to the formula bound at its pull count.
    pub fn refresh_offsets(&mut self, params: &PacParams) {
        for i in 0..self.k {
            for j in i + 1..self.k {
                let c = best_bound(self.pulls(i, j), params.n(), params);
                self.set_symmetric(i, j, c);
            }
        }
    }

    /// Width of the interval of `q_ij` once intervals are consistent:
    /// `upper_ij + upper_ji`.
    pub fn width(&self, i: usize, j: usize) -> f64 {
        self.upper(i, j) + self.upper(j, i)
    }

    /// The matrix `mean_ij + upper_ij` on which certified rankings are solved.
    /// When all offsets are zero and all pairs share a pull count, the
    /// result carries exact counts.
    pub fn upper_matrix(&self) -> ScoreMatrix {
        let k = self.k;
        let mut entries = vec![0.5; k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    entries[i * k + j] = self.mean(i, j) + self.upper(i, j);
                }
            }
        }
        let t = if k > 1 { self.pulls(0, 1) } else { 0 };
        let exact = t > 0
            && (0..k).all(|i| (0..k).all(|j| i == j || (self.pulls(i, j) == t && self.upper(i, j) == 0.0)));
        if exact {
            let wins = self.wins.iter().map(|&w| w as i64).collect();
            return ScoreMatrix::from_counts(k, wins, t).expect("valid shape");
        }
        ScoreMatrix::new(k, entries).expect("finite entries")
    }

    /// Whether every entry of `q` lies inside its interval, up to `tol`.
    pub fn contains(&self, q: &WinMatrix, tol: f64) -> bool {
        (0..self.k).all(|i| {
            (0..self.k).filter(|&j| j != i).all(|j| {
                let v = q.get(i, j);
                v >= self.mean(i, j) - self.lower(i, j) - tol && v <= self.mean(i, j) + self.upper(i, j) + tol
            })
        })
    }

    /// FNV-1a hash of the pull counts, for trace records.
    pub fn pulls_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &p in &self.pulls {
            for b in p.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Certified bound on the Kemeny score gap of the ranking solved on
/// [`IntervalMatrix::upper_matrix`]: `sum_{i<j} (upper_ij + upper_ji)`.
pub fn approximation_bound(m: &IntervalMatrix) -> f64 {
    let k = m.k();
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| m.width(i, j)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Expected values below were evaluated independently (Python, math module).
    const LN_240: f64 = 5.480_638_923_341_991;
    const LN_600: f64 = 6.396_929_655_216_146;

    fn p(k: usize, n: Option<usize>, rho: f64) -> PacParams {
        PacParams::new(k, n, rho, 0.05).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(PacParams::new(1, None, 0.1, 0.05).is_err());
        assert!(PacParams::new(3, None, 0.0, 0.05).is_err());
        assert!(PacParams::new(3, None, 3.5, 0.05).is_err());
        assert!(PacParams::new(3, None, 1.0, 0.5).is_err());
        assert!(PacParams::new(3, Some(0), 1.0, 0.1).is_err());
        let q = p(4, None, 0.6);
        assert!((q.y() - LN_240).abs() < 1e-12);
        assert!((q.x() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_examples() {
        let q = p(4, None, 0.6);
        assert_eq!(hoeffding_bound(1096, &q), 0.05);
        assert_eq!(hoeffding_bound(1095, &q), 0.05003);
        assert_eq!(hoeffding_bound(0, &q), VACUOUS_BOUND);
        let c = formulas::hoeffding(100.0, q.y());
        assert!((formulas::hoeffding(400.0, q.y()) - c / 2.0).abs() < 1e-15);
        assert!((formulas::hoeffding(q.y() / 2.0, q.y()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn serfling_examples() {
        let q = p(6, Some(10), 1.5);
        assert!((q.y() - LN_600).abs() < 1e-12);
        // sqrt(6 * ln 600 / 100) = 0.6195286751...
        assert_eq!(serfling_bound(5, 10, &q).unwrap(), 0.61953);
        // sqrt(2 * 9 * ln 600 / 1280) = 0.2999280301...
        assert_eq!(serfling_reverse_bound(8, 10, &q).unwrap(), 0.29993);
        assert_eq!(serfling_reverse_bound(10, 10, &q).unwrap(), 0.0);
        assert!(serfling_bound(10, 10, &q).unwrap() > 0.0);
        assert!(serfling_bound(11, 10, &q).is_err());
        assert!(serfling_reverse_bound(11, 10, &q).is_err());
    }

    #[test]
    fn best_bound_dispatch() {
        let q = p(6, Some(10), 1.5);
        for t in 1..=5 {
            assert_eq!(best_bound(t, Some(10), &q), serfling_bound(t, 10, &q).unwrap());
        }
        assert_eq!(best_bound(10, Some(10), &q), 0.0);
        assert_eq!(best_bound(0, Some(10), &q), 0.5);
        assert_eq!(best_bound(7, None, &q), hoeffding_bound(7, &q));
    }

    #[test]
    fn sample_sizes() {
        let q = p(4, None, 0.6);
        assert_eq!(sample_size_with_replacement(&q), 1097);
        let q2 = p(4, None, 1.2);
        let (a, b) = (sample_size_with_replacement(&q), sample_size_with_replacement(&q2));
        assert!(b * 4 >= a - 3 && b * 4 <= a + 3);
        // ceil(2 ln 40) = ceil(7.3777...)
        assert_eq!(sample_size_with_replacement(&PacParams::new(2, None, 1.0, 0.05).unwrap()), 8);

        let w = p(6, Some(10), 1.5);
        assert_eq!(without_replacement_plan(&w).unwrap(), (10, 0.0));
        assert!(sample_size_without_replacement(&p(6, None, 1.5)).is_err());

        // large population approaches the with-replacement size
        let big = p(3, Some(10_000_000), 0.5);
        let wr = sample_size_with_replacement(&p(3, None, 0.5));
        let wo = sample_size_without_replacement(&big).unwrap();
        assert!(wo <= wr && wr - wo <= 1, "{wo} vs {wr}");
    }

    #[test]
    fn interval_state_updates() {
        let mut m = IntervalMatrix::new(3);
        assert_eq!(approximation_bound(&m), 3.0);
        m.record(0, 1, true);
        m.record(1, 0, true);
        m.record(0, 1, true);
        assert_eq!(m.pulls(0, 1), 3);
        assert_eq!(m.pulls(1, 0), 3);
        assert_eq!(m.mean(0, 1), 2.0 / 3.0);
        assert_eq!(m.mean(1, 0), 1.0 / 3.0);
        assert_eq!(m.total_pulls(), 3);
        let params = p(3, Some(3), 1.0);
        m.refresh_offsets(&params);
        assert_eq!(m.upper(0, 1), 0.0);
        assert_eq!(m.upper(0, 2), 0.5);
        assert_eq!(approximation_bound(&m), 2.0);
    }

    #[test]
    fn approximation_bound_examples() {
        let mut m = IntervalMatrix::new(4);
        for i in 0..4 {
            for j in i + 1..4 {
                m.set_symmetric(i, j, 0.0);
            }
        }
        assert_eq!(approximation_bound(&m), 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                m.set_symmetric(i, j, 0.05);
            }
        }
        assert!((approximation_bound(&m) - 12.0 * 0.05).abs() < 1e-12);
    }
}
