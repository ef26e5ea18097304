//! Ground-truth comparison sources.
//!
//! [`BernoulliOracle`] answers each query independently with the hidden
//! winning probability (sampling with replacement). [`VoterPool`] reveals
//! the answers of a fixed profile's voters, never asking one voter about the
//! same pair twice (sampling without replacement).
//!
//! Both keep an independent random stream per unordered pair, derived from
//! the master seed and the pair index, so the `t`-th answer for a pair does
//! not depend on the order in which pairs are queried.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::confidence::SamplingMode;
use crate::error::{invalid, Error, Result};
use crate::matrix::WinMatrix;
use crate::preferences::{profile_to_matrix, PreferenceProfile};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The first arm of the query won.
    IWins,
    JWins,
}

impl Outcome {
    pub fn i_wins(self) -> bool {
        self == Outcome::IWins
    }

    fn from_bool(i_wins: bool) -> Self {
        if i_wins {
            Outcome::IWins
        } else {
            Outcome::JWins
        }
    }
}

/// Anything that can answer pairwise queries during elicitation.
pub trait ComparisonSource {
    fn k(&self) -> usize;

    fn mode(&self) -> SamplingMode;

    fn draw(&mut self, i: usize, j: usize) -> Result<Outcome>;

    /// Answers still available for the pair; `None` when unlimited.
    fn remaining(&self, i: usize, j: usize) -> Option<usize>;

    /// The hidden matrix, used only for evaluation.
    fn ground_truth(&self) -> &WinMatrix;
}

fn check_pair(k: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= k || j >= k {
        return invalid(format!("({i}, {j}) is not a pair of distinct arms among {k}"));
    }
    Ok(())
}

fn pair_streams(k: usize, master: u64) -> Vec<ChaCha8Rng> {
    (0..k * k.saturating_sub(1) / 2).map(|p| seed::rng(seed::derive(master, p as u64))).collect()
}

#[derive(Debug, Clone)]
pub struct BernoulliOracle {
    q: WinMatrix,
    streams: Vec<ChaCha8Rng>,
}

impl BernoulliOracle {
    pub fn new(q: WinMatrix, seed: u64) -> Self {
        let streams = pair_streams(q.k(), seed);
        Self { q, streams }
    }
}

impl ComparisonSource for BernoulliOracle {
    fn k(&self) -> usize {
        self.q.k()
    }

    fn mode(&self) -> SamplingMode {
        SamplingMode::WithReplacement
    }

    fn draw(&mut self, i: usize, j: usize) -> Result<Outcome> {
        let k = self.q.k();
        check_pair(k, i, j)?;
        let (a, b) = (i.min(j), i.max(j));
        let u: f64 = self.streams[seed::pair_index(k, a, b)].random();
        let a_wins = u < self.q.get(a, b);
        Ok(Outcome::from_bool(a_wins == (a == i)))
    }

    fn remaining(&self, _i: usize, _j: usize) -> Option<usize> {
        None
    }

    fn ground_truth(&self) -> &WinMatrix {
        &self.q
    }
}

/// A fixed voter population queried without replacement, per pair.
#[derive(Debug, Clone)]
pub struct VoterPool {
    profile: PreferenceProfile,
    truth: WinMatrix,
    positions: Vec<Vec<usize>>,
    orders: Vec<Vec<usize>>,
    cursors: Vec<usize>,
}

impl VoterPool {
    pub fn new(profile: PreferenceProfile, seed: u64) -> Self {
        let k = profile.k();
        let n = profile.n();
        let orders = pair_streams(k, seed)
            .into_iter()
            .map(|mut rng| {
                let mut o: Vec<usize> = (0..n).collect();
                o.shuffle(&mut rng);
                o
            })
            .collect::<Vec<_>>();
        let positions = profile.voters().iter().map(|v| v.positions()).collect();
        let truth = profile_to_matrix(&profile);
        let cursors = vec![0; orders.len()];
        Self { profile, truth, positions, orders, cursors }
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn profile(&self) -> &PreferenceProfile {
        &self.profile
    }

    /// Voters already asked about the pair.
    pub fn revealed(&self, i: usize, j: usize) -> usize {
        self.cursors[seed::pair_index(self.profile.k(), i, j)]
    }
}

impl ComparisonSource for VoterPool {
    fn k(&self) -> usize {
        self.profile.k()
    }

    fn mode(&self) -> SamplingMode {
        SamplingMode::WithoutReplacement { n: self.n() }
    }

    fn draw(&mut self, i: usize, j: usize) -> Result<Outcome> {
        let k = self.profile.k();
        check_pair(k, i, j)?;
        let p = seed::pair_index(k, i, j);
        let cursor = self.cursors[p];
        if cursor >= self.n() {
            return Err(Error::Exhausted(format!("all {} voters asked about ({i}, {j})", self.n())));
        }
        let voter = self.orders[p][cursor];
        self.cursors[p] += 1;
        let pos = &self.positions[voter];
        Ok(Outcome::from_bool(pos[i] < pos[j]))
    }

    fn remaining(&self, i: usize, j: usize) -> Option<usize> {
        Some(self.n() - self.revealed(i, j))
    }

    fn ground_truth(&self) -> &WinMatrix {
        &self.truth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preferences::gen_uniform_profile;

    #[test]
    fn bernoulli_degenerate_and_symmetric() {
        let q = WinMatrix::from_upper(3, |_, _| 1.0).unwrap();
        let mut o = BernoulliOracle::new(q, 1);
        for _ in 0..200 {
            assert_eq!(o.draw(0, 2).unwrap(), Outcome::IWins);
            assert_eq!(o.draw(2, 1).unwrap(), Outcome::JWins);
        }
        assert!(o.draw(1, 1).is_err());
        assert!(o.draw(0, 3).is_err());
        assert_eq!(o.remaining(0, 1), None);

        let mut o = BernoulliOracle::new(WinMatrix::uniform(2), 7);
        let wins = (0..100_000).filter(|_| o.draw(0, 1).unwrap().i_wins()).count();
        assert!((wins as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn bernoulli_is_reproducible() {
        let q = WinMatrix::from_upper(4, |i, j| 0.1 * (i + j) as f64).unwrap();
        let mut a = BernoulliOracle::new(q.clone(), 42);
        let mut b = BernoulliOracle::new(q, 42);
        let sa: Vec<_> = (0..50).map(|s| a.draw(s % 4, (s + 1) % 4).unwrap()).collect();
        let sb: Vec<_> = (0..50).map(|s| b.draw(s % 4, (s + 1) % 4).unwrap()).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn pool_reveals_each_voter_once() {
        let profile = gen_uniform_profile(4, 9, &mut seed::rng(2)).unwrap();
        let truth = profile_to_matrix(&profile);
        let mut pool = VoterPool::new(profile, 5);
        assert_eq!(pool.remaining(1, 3), Some(9));
        let mut wins = 0;
        for step in 0..9 {
            if pool.draw(1, 3).unwrap().i_wins() {
                wins += 1;
            }
            assert_eq!(pool.remaining(3, 1), Some(9 - step - 1));
        }
        assert_eq!(wins as f64 / 9.0, truth.get(1, 3));
        assert!(matches!(pool.draw(3, 1), Err(Error::Exhausted(_))));
        assert_eq!(pool.remaining(1, 3), Some(0));
        // other pairs are untouched
        assert_eq!(pool.remaining(0, 1), Some(9));
    }

    #[test]
    fn unanimous_pool() {
        let profile = PreferenceProfile::from_orders(3, &vec![vec![2, 0, 1]; 6]).unwrap();
        let mut pool = VoterPool::new(profile, 0);
        for _ in 0..6 {
            assert!(pool.draw(2, 1).unwrap().i_wins());
        }
    }
}
