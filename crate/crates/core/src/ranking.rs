//! Rankings, Kendall-tau distance, Kemeny scores and exact Kemeny solvers.

use std::fmt;
use std::ops::Add;

use crate::error::{invalid, Error, Result};
use crate::matrix::ScoreMatrix;

/// Largest arm count accepted by [`solve_kemeny`].
pub const SOLVER_CAP: usize = 20;
/// Largest arm count accepted by [`brute_force_kemeny`].
pub const BRUTE_FORCE_CAP: usize = 8;

/// Two real-valued scores closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A strict total order over arms `0..k`, best first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let k = order.len();
        if k == 0 {
            return invalid("ranking must contain at least one arm");
        }
        let mut seen = vec![false; k];
        for &a in &order {
            if a >= k || seen[a] {
                return invalid(format!("{order:?} is not a permutation of 0..{k}"));
            }
            seen[a] = true;
        }
        Ok(Self { order })
    }

    pub fn identity(k: usize) -> Self {
        Self { order: (0..k).collect() }
    }

    pub fn k(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    /// `positions()[a]` is the rank of arm `a` (0 = top).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.k()];
        for (p, &a) in self.order.iter().enumerate() {
            pos[a] = p;
        }
        pos
    }

    pub fn reverse(&self) -> Self {
        Self { order: self.order.iter().rev().copied().collect() }
    }

    /// Formats the ranking with arms numbered from one, e.g. `1>2>3`.
    pub fn to_one_based_string(&self) -> String {
        self.order.iter().map(|a| (a + 1).to_string()).collect::<Vec<_>>().join(">")
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.order.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(">"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KemenyResult {
    pub ranking: Ranking,
    /// Kemeny score of `ranking` against the matrix it was solved on.
    pub score: f64,
}

/// Number of pairs the two rankings order differently.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<usize> {
    if a.k() != b.k() {
        return invalid(format!("rankings over {} and {} arms", a.k(), b.k()));
    }
    let pos_b = b.positions();
    let mut d = 0;
    for (x, &i) in a.order.iter().enumerate() {
        for &j in &a.order[x + 1..] {
            if pos_b[j] < pos_b[i] {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// `sum over (i above j in r) of q_ji`.
pub fn kemeny_score(q: &impl AsRef<ScoreMatrix>, r: &Ranking) -> Result<f64> {
    let q = q.as_ref();
    check_dims(q, r)?;
    let o = r.order();
    let mut s = 0.0;
    for x in 0..o.len() {
        for y in x + 1..o.len() {
            s += q.get(o[y], o[x]);
        }
    }
    Ok(s)
}

fn check_dims(q: &ScoreMatrix, r: &Ranking) -> Result<()> {
    if q.k() != r.k() {
        return invalid(format!("matrix over {} arms, ranking over {}", q.k(), r.k()));
    }
    Ok(())
}

/// Exact Kemeny ranking by dynamic programming over subsets.
///
/// `f[S]` is the cheapest cost of ordering the arms outside `S` below the
/// already-placed set `S`. Appending arm `e` directly after `S` costs
/// `sum_{j not in S, j != e} q_je`. The ranking is rebuilt top-down by
/// taking, at every step, the optimal extension whose arm comes earliest in
/// `tiebreak`; the result is therefore the minimiser that is
/// lexicographically smallest with respect to `tiebreak` positions.
///
/// Matrices carrying exact counts are solved in integer arithmetic; other
/// matrices use `f64` with ties within [`TIE_TOLERANCE`].
pub fn solve_kemeny(q: &impl AsRef<ScoreMatrix>, tiebreak: &Ranking) -> Result<KemenyResult> {
    let q = q.as_ref();
    check_dims(q, tiebreak)?;
    let k = q.k();
    if k > SOLVER_CAP {
        return Err(Error::Capacity { what: "exact Kemeny solver", k, cap: SOLVER_CAP });
    }
    let order = match q.exact() {
        Some(ex) => subset_dp(k, tiebreak, |a, b| ex.numerators[a * k + b], |a, b| a <= b),
        None => subset_dp(k, tiebreak, |a, b| q.get(a, b), |a, b| a <= b + TIE_TOLERANCE),
    };
    finish(q, order)
}

/// Enumerates all `k!` rankings in tie-break order and keeps the first
/// minimiser. Same contract as [`solve_kemeny`]; meant as a test oracle.
pub fn brute_force_kemeny(q: &impl AsRef<ScoreMatrix>, tiebreak: &Ranking) -> Result<KemenyResult> {
    let q = q.as_ref();
    check_dims(q, tiebreak)?;
    let k = q.k();
    if k > BRUTE_FORCE_CAP {
        return Err(Error::Capacity { what: "brute-force Kemeny solver", k, cap: BRUTE_FORCE_CAP });
    }
    let order = match q.exact() {
        Some(ex) => enumerate(k, tiebreak, |a, b| ex.numerators[a * k + b], |a, b| a < b),
        None => enumerate(k, tiebreak, |a, b| q.get(a, b), |a, b| a < b - TIE_TOLERANCE),
    };
    finish(q, order)
}

fn finish(q: &ScoreMatrix, order: Vec<usize>) -> Result<KemenyResult> {
    let ranking = Ranking::new(order)?;
    let score = kemeny_score(q, &ranking)?;
    Ok(KemenyResult { ranking, score })
}

/// `w(a, b)` is the weight of arm `a` beating arm `b`; arms here are
/// tie-break positions, translated back on output.
fn subset_dp<C, W, L>(k: usize, tiebreak: &Ranking, weight: W, leq: L) -> Vec<usize>
where
    C: Copy + Default + Add<Output = C> + PartialOrd,
    W: Fn(usize, usize) -> C,
    L: Fn(C, C) -> bool,
{
    let tb = tiebreak.order();
    let w = |a: usize, b: usize| weight(tb[a], tb[b]);
    let full = (1usize << k) - 1;
    let mut f: Vec<C> = vec![C::default(); full + 1];

    // Cost of putting `e` on top of the unplaced set `rest` (which contains e).
    let place_cost = |rest: usize, e: usize| -> C {
        let mut c = C::default();
        let mut bits = rest & !(1 << e);
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            c = c + w(j, e);
            bits &= bits - 1;
        }
        c
    };

    for placed in (0..full).rev() {
        let rest = full & !placed;
        let mut best: Option<C> = None;
        let mut bits = rest;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let total = place_cost(rest, e) + f[placed | (1 << e)];
            if best.is_none_or(|b| total < b) {
                best = Some(total);
            }
        }
        f[placed] = best.expect("rest is non-empty");
    }

    let mut order = Vec::with_capacity(k);
    let mut placed = 0usize;
    while placed != full {
        let rest = full & !placed;
        let e = (0..k)
            .filter(|e| rest & (1 << e) != 0)
            .find(|&e| leq(place_cost(rest, e) + f[placed | (1 << e)], f[placed]))
            .expect("some extension attains the optimum");
        order.push(tb[e]);
        placed |= 1 << e;
    }
    order
}

fn enumerate<C, W, B>(k: usize, tiebreak: &Ranking, weight: W, better: B) -> Vec<usize>
where
    C: Copy + Default + Add<Output = C> + PartialOrd,
    W: Fn(usize, usize) -> C,
    B: Fn(C, C) -> bool,
{
    struct Search<'a, C, W, B> {
        tb: &'a [usize],
        weight: W,
        better: B,
        prefix: Vec<usize>,
        used: Vec<bool>,
        best: Option<(C, Vec<usize>)>,
    }

    impl<C, W, B> Search<'_, C, W, B>
    where
        C: Copy + Default + Add<Output = C> + PartialOrd,
        W: Fn(usize, usize) -> C,
        B: Fn(C, C) -> bool,
    {
        fn go(&mut self, cost: C) {
            let k = self.tb.len();
            if self.prefix.len() == k {
                if self.best.as_ref().is_none_or(|(b, _)| (self.better)(cost, *b)) {
                    self.best = Some((cost, self.prefix.clone()));
                }
                return;
            }
            for p in 0..k {
                if self.used[p] {
                    continue;
                }
                let arm = self.tb[p];
                // arm goes above every arm not yet placed
                let mut add = C::default();
                for (p2, &used) in self.used.iter().enumerate() {
                    if !used && p2 != p {
                        add = add + (self.weight)(self.tb[p2], arm);
                    }
                }
                self.used[p] = true;
                self.prefix.push(arm);
                self.go(cost + add);
                self.prefix.pop();
                self.used[p] = false;
            }
        }
    }

    let mut s = Search {
        tb: tiebreak.order(),
        weight,
        better,
        prefix: Vec::with_capacity(k),
        used: vec![false; k],
        best: None,
    };
    s.go(C::default());
    s.best.expect("at least one ranking").1
}
