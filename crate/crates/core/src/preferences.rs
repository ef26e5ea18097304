//! Voter profiles, their winning-probability matrices, structural checks
//! on those matrices, and profile generators.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::matrix::WinMatrix;
use crate::ranking::Ranking;

/// Tolerance used by the structural checks on real-valued matrices.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    k: usize,
    voters: Vec<Ranking>,
}

impl PreferenceProfile {
    pub fn new(voters: Vec<Ranking>) -> Result<Self> {
        let Some(first) = voters.first() else {
            return invalid("profile needs at least one voter");
        };
        let k = first.k();
        if let Some(v) = voters.iter().find(|v| v.k() != k) {
            return invalid(format!("voter ranking {v} is not over {k} arms"));
        }
        Ok(Self { k, voters })
    }

    pub fn from_orders(k: usize, orders: &[Vec<usize>]) -> Result<Self> {
        let voters = orders.iter().map(|o| Ranking::new(o.clone())).collect::<Result<Vec<_>>>()?;
        let p = Self::new(voters)?;
        if p.k != k {
            return invalid(format!("expected rankings over {k} arms, got {}", p.k));
        }
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn voters(&self) -> &[Ranking] {
        &self.voters
    }

    /// Whether voter `v` ranks arm `i` above arm `j`.
    pub fn prefers(&self, v: usize, i: usize, j: usize) -> bool {
        let o = self.voters[v].order();
        o.iter().position(|&a| a == i) < o.iter().position(|&a| a == j)
    }
}

/// `q_ij = |{v : i above j}| / n`, carried exactly as counts over `n`.
pub fn profile_to_matrix(p: &PreferenceProfile) -> WinMatrix {
    let k = p.k();
    let mut wins = vec![0i64; k * k];
    for v in p.voters() {
        let o = v.order();
        for x in 0..k {
            for &below in &o[x + 1..] {
                wins[o[x] * k + below] += 1;
            }
        }
    }
    WinMatrix::from_counts(k, wins, p.n() as u64).expect("profile counts are complementary")
}

/// Every `n * q_ij` is an integer and `q_ij + q_ji = 1`.
pub fn check_completeness(q: &WinMatrix, n: usize) -> bool {
    let k = q.k();
    if n == 0 {
        return false;
    }
    if let Some(ex) = q.exact() {
        let d = ex.denominator as i128;
        return (0..k).all(|i| {
            (0..k).filter(|&j| j != i).all(|j| {
                let a = ex.numerators[i * k + j] as i128;
                let b = ex.numerators[j * k + i] as i128;
                (a * n as i128) % d == 0 && a + b == d
            })
        });
    }
    (0..k).all(|i| {
        (0..k).filter(|&j| j != i).all(|j| {
            let scaled = q.get(i, j) * n as f64;
            (scaled - scaled.round()).abs() <= CHECK_TOLERANCE
                && (q.get(i, j) + q.get(j, i) - 1.0).abs() <= CHECK_TOLERANCE
        })
    })
}

/// Ordered triples `(l, j, i)` of distinct arms with `q_lj + q_ji < q_li`.
pub fn check_triangle(q: &WinMatrix) -> Vec<(usize, usize, usize)> {
    let k = q.k();
    let violates = |l: usize, j: usize, i: usize| -> bool {
        match q.exact() {
            Some(ex) => {
                let c = |a: usize, b: usize| ex.numerators[a * k + b];
                c(l, j) + c(j, i) < c(l, i)
            }
            None => q.get(l, j) + q.get(j, i) < q.get(l, i) - CHECK_TOLERANCE,
        }
    };
    let mut out = Vec::new();
    for l in 0..k {
        for j in 0..k {
            for i in 0..k {
                if l != j && j != i && l != i && violates(l, j, i) {
                    out.push((l, j, i));
                }
            }
        }
    }
    out
}

/// Upper bound on the summed row sums of any `a` arms.
pub fn borda_bound(k: usize, a: usize) -> f64 {
    a as f64 * (k as f64 - (a as f64 + 1.0) / 2.0)
}

/// Returns the first set of top row-sum arms whose summed row sums exceed
/// [`borda_bound`], if any. Only the `k` prefixes of the row sums sorted in
/// decreasing order need checking, since the bound depends on `|A|` alone.
pub fn borda_violation(q: &WinMatrix) -> Option<Vec<usize>> {
    let k = q.k();
    let mut arms: Vec<(usize, f64)> = (0..k).map(|i| (i, q.row_sum(i))).collect();
    arms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut acc = 0.0;
    for a in 1..=k {
        acc += arms[a - 1].1;
        if acc > borda_bound(k, a) + CHECK_TOLERANCE {
            return Some(arms[..a].iter().map(|x| x.0).collect());
        }
    }
    None
}

pub fn check_borda_realisability(q: &WinMatrix) -> bool {
    borda_violation(q).is_none()
}

/// Whether every top segment of `r` is contiguous on the axis `0 < 1 < ... < k-1`.
pub fn is_single_peaked(r: &Ranking) -> bool {
    let (mut lo, mut hi) = (usize::MAX, 0);
    for (m, &a) in r.order().iter().enumerate() {
        lo = lo.min(a);
        hi = hi.max(a);
        if hi - lo != m {
            return false;
        }
    }
    true
}

pub fn gen_uniform_profile<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<PreferenceProfile> {
    use rand::seq::SliceRandom;
    check_sizes(k, n)?;
    let voters = (0..n)
        .map(|_| {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(rng);
            Ranking::new(order)
        })
        .collect::<Result<Vec<_>>>()?;
    PreferenceProfile::new(voters)
}

/// Mallows model by repeated insertion.
///
/// Reference arms are inserted top-down. When the `m`-th arm is inserted,
/// landing `d` places above the bottom of the partial ranking creates `d`
/// disagreements with the reference and has weight `phi^d`.
pub fn gen_mallows_profile<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    phi: f64,
    reference: &Ranking,
    rng: &mut R,
) -> Result<PreferenceProfile> {
    check_sizes(k, n)?;
    if !(phi > 0.0 && phi <= 1.0) {
        return invalid(format!("Mallows dispersion must lie in (0, 1], got {phi}"));
    }
    if reference.k() != k {
        return invalid(format!("reference ranking over {} arms, expected {k}", reference.k()));
    }
    let mut voters = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(k);
    for _ in 0..n {
        let mut order: Vec<usize> = Vec::with_capacity(k);
        for (idx, &arm) in reference.order().iter().enumerate() {
            let m = idx + 1;
            weights.clear();
            weights.extend((0..m).map(|d| phi.powi(d as i32)));
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut d = m - 1;
            for (cand, w) in weights.iter().enumerate() {
                if u < *w {
                    d = cand;
                    break;
                }
                u -= w;
            }
            // d places above the bottom
            order.insert(order.len() - d, arm);
        }
        voters.push(Ranking::new(order)?);
    }
    PreferenceProfile::new(voters)
}

/// Uniform single-peaked preferences on the natural axis: built bottom-up by
/// peeling the leftmost or rightmost remaining arm with equal probability.
pub fn gen_single_peaked_profile<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<PreferenceProfile> {
    check_sizes(k, n)?;
    let voters = (0..n)
        .map(|_| {
            let (mut left, mut right) = (0, k - 1);
            let mut bottom_up = Vec::with_capacity(k);
            while left < right {
                if rng.random::<bool>() {
                    bottom_up.push(left);
                    left += 1;
                } else {
                    bottom_up.push(right);
                    right -= 1;
                }
            }
            bottom_up.push(left);
            bottom_up.reverse();
            Ranking::new(bottom_up)
        })
        .collect::<Result<Vec<_>>>()?;
    PreferenceProfile::new(voters)
}

fn check_sizes(k: usize, n: usize) -> Result<()> {
    if k == 0 || n == 0 {
        return invalid(format!("need k >= 1 and n >= 1, got k = {k}, n = {n}"));
    }
    Ok(())
}

/// Profile generator choice.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Uniform,
    Mallows { phi: f64, reference: Option<Ranking> },
    SinglePeaked,
}

impl Generator {
    pub fn generate<R: Rng + ?Sized>(&self, k: usize, n: usize, rng: &mut R) -> Result<PreferenceProfile> {
        match self {
            Generator::Uniform => gen_uniform_profile(k, n, rng),
            Generator::Mallows { phi, reference } => {
                let reference = reference.clone().unwrap_or_else(|| Ranking::identity(k));
                gen_mallows_profile(k, n, *phi, &reference, rng)
            }
            Generator::SinglePeaked => gen_single_peaked_profile(k, n, rng),
        }
    }
}

/// Random matrix in which every `q_ij`, `i < j`, is uniform on `[0, 1]`.
pub fn random_win_matrix<R: Rng + ?Sized>(k: usize, rng: &mut R) -> WinMatrix {
    let upper: Vec<f64> = (0..k * k).map(|_| rng.random::<f64>()).collect();
    WinMatrix::from_upper(k, |i, j| upper[i * k + j]).expect("entries in [0, 1)")
}

/// Two matrices at L1 distance `epsilon` whose Kemeny rankings are reverses
/// of each other: `q_ij = (1 + d) / 2` for `i < j` with `d = epsilon / (k(k-1))`,
/// and its transpose.
pub fn fixture_transposed_near_tie(k: usize, epsilon: f64) -> Result<(WinMatrix, WinMatrix)> {
    let pairs = (k * k.saturating_sub(1)) as f64;
    if k < 2 || !(epsilon > 0.0 && epsilon < pairs / 2.0) {
        return invalid(format!("need k >= 2 and 0 < epsilon < {}", pairs / 2.0));
    }
    let d = epsilon / pairs;
    let q = WinMatrix::from_upper(k, |_, _| (1.0 + d) / 2.0)?;
    let t = q.transpose();
    Ok((q, t))
}

/// Two profiles, of `n` and `n - 1` voters, that split between the identity
/// order and its reverse and whose Kemeny rankings (identity tie-break) are
/// reverses of each other.
///
/// Even `n`: half identity, half reverse; the second profile drops one
/// identity voter. Odd `n`: `floor(n/2)` identity and `ceil(n/2)` reverse;
/// the second profile drops one reverse voter.
pub fn fixture_one_voter_flip(k: usize, n: usize) -> Result<(PreferenceProfile, PreferenceProfile)> {
    if k <= 2 || n <= 2 {
        return invalid(format!("need k > 2 and n > 2, got k = {k}, n = {n}"));
    }
    let tau = Ranking::identity(k);
    let rev = tau.reverse();
    let forward = n / 2;
    let backward = n - forward;
    let build = |f: usize, b: usize| {
        let voters = std::iter::repeat_n(tau.clone(), f).chain(std::iter::repeat_n(rev.clone(), b)).collect();
        PreferenceProfile::new(voters)
    };
    let first = build(forward, backward)?;
    let second = if n.is_multiple_of(2) { build(forward - 1, backward)? } else { build(forward, backward - 1)? };
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::{kendall_tau, solve_kemeny};
    use crate::seed;

    fn example1() -> (PreferenceProfile, PreferenceProfile) {
        let p1 = PreferenceProfile::from_orders(3, &[vec![0, 1, 2], vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let p2 = PreferenceProfile::from_orders(3, &[vec![0, 1, 2], vec![1, 0, 2], vec![2, 0, 1]]).unwrap();
        (p1, p2)
    }

    #[test]
    fn example1_profiles_share_a_matrix() {
        let (p1, p2) = example1();
        let (q1, q2) = (profile_to_matrix(&p1), profile_to_matrix(&p2));
        assert_eq!(q1, q2);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(q1.get(i, j), 2.0 / 3.0);
            assert_eq!(q1.get(j, i), 1.0 / 3.0);
        }
        assert_eq!(q1.get(1, 1), 0.5);
    }

    #[test]
    fn single_voter_is_unanimous() {
        let p = PreferenceProfile::from_orders(2, &[vec![0, 1]]).unwrap();
        let q = profile_to_matrix(&p);
        assert_eq!((q.get(0, 1), q.get(1, 0)), (1.0, 0.0));
    }

    #[test]
    fn completeness_examples() {
        let q = profile_to_matrix(&example1().0);
        assert!(check_completeness(&q, 3));
        assert!(check_completeness(&q, 6));
        assert!(!check_completeness(&q, 2));
        let half = WinMatrix::uniform(3);
        assert!(check_completeness(&half, 2));
        assert!(!check_completeness(&half, 3));
    }

    #[test]
    fn triangle_examples() {
        // q_02 = 1, q_01 = 0, q_12 = 0
        let q = WinMatrix::from_rows(&[vec![0.5, 0.0, 1.0], vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.5]]).unwrap();
        let v = check_triangle(&q);
        assert!(v.contains(&(0, 1, 2)));
        assert!(check_triangle(&WinMatrix::uniform(4)).is_empty());
        assert!(check_triangle(&profile_to_matrix(&example1().1)).is_empty());
    }

    #[test]
    fn borda_examples() {
        let q = profile_to_matrix(&example1().0);
        assert!(check_borda_realisability(&q));
        let dom = WinMatrix::from_upper(3, |_, _| 1.0).unwrap();
        assert!(check_borda_realisability(&dom));
        // the full arm set meets the bound with equality
        let total: f64 = (0..3).map(|i| dom.row_sum(i)).sum();
        assert!((total - borda_bound(3, 3)).abs() < 1e-12);
        // only a matrix breaking q_ij + q_ji = 1 can exceed the bound
        let loose = WinMatrix::with_tolerance(2, vec![0.5, 1.0, 0.15, 0.5], 0.2).unwrap();
        assert_eq!(borda_violation(&loose), Some(vec![0, 1]));
    }

    #[test]
    fn single_peaked_predicate() {
        assert!(is_single_peaked(&Ranking::new(vec![2, 1, 3, 0]).unwrap()));
        assert!(!is_single_peaked(&Ranking::new(vec![0, 2, 1]).unwrap()));
        assert!(is_single_peaked(&Ranking::identity(5).reverse()));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_uniform_profile(5, 20, &mut seed::rng(3)).unwrap();
        let b = gen_uniform_profile(5, 20, &mut seed::rng(3)).unwrap();
        assert_eq!(a, b);
        let one = gen_uniform_profile(1, 4, &mut seed::rng(1)).unwrap();
        assert!(one.voters().iter().all(|v| v.order() == [0]));
        let m = gen_mallows_profile(4, 50, 1e-6, &Ranking::identity(4), &mut seed::rng(9)).unwrap();
        assert!(m.voters().iter().all(|v| v.order() == [0, 1, 2, 3]));
        let sp = gen_single_peaked_profile(7, 200, &mut seed::rng(5)).unwrap();
        assert!(sp.voters().iter().all(is_single_peaked));
    }

    #[test]
    fn mallows_rejects_bad_phi() {
        let r = Ranking::identity(3);
        assert!(gen_mallows_profile(3, 1, 0.0, &r, &mut seed::rng(0)).is_err());
        assert!(gen_mallows_profile(3, 1, 1.5, &r, &mut seed::rng(0)).is_err());
        assert!(gen_mallows_profile(3, 1, f64::NAN, &r, &mut seed::rng(0)).is_err());
    }

    #[test]
    fn transposed_near_tie_fixture() {
        let (q, t) = fixture_transposed_near_tie(3, 0.006).unwrap();
        assert!((q.get(0, 1) - 0.5005).abs() < 1e-15);
        assert!((q.l1_distance(&t).unwrap() - 0.006).abs() < 1e-15);
        let a = solve_kemeny(&q, &Ranking::identity(3)).unwrap().ranking;
        let b = solve_kemeny(&t, &Ranking::identity(3)).unwrap().ranking;
        assert_eq!(a.order(), &[0, 1, 2]);
        assert_eq!(b.order(), &[2, 1, 0]);
        assert_eq!(kendall_tau(&a, &b).unwrap(), 3);
        assert!(fixture_transposed_near_tie(3, 3.0).is_err());
        assert!(fixture_transposed_near_tie(3, 0.0).is_err());
    }

    #[test]
    fn one_voter_flip_fixture_even_and_odd() {
        let (p, p_hat) = fixture_one_voter_flip(4, 6).unwrap();
        assert_eq!((p.n(), p_hat.n()), (6, 5));
        let q = profile_to_matrix(&p);
        assert_eq!(q, WinMatrix::from_counts(4, {
            let mut c = vec![3; 16];
            for i in 0..4 { c[i * 4 + i] = 0; }
            c
        }, 6).unwrap());
        assert!(q.entries().iter().all(|&v| v == 0.5));
        let q_hat = profile_to_matrix(&p_hat);
        assert!((q.l1_distance(&q_hat).unwrap() - 12.0 / 10.0).abs() < 1e-12);

        let (p, p_hat) = fixture_one_voter_flip(3, 5).unwrap();
        assert_eq!((p.n(), p_hat.n()), (5, 4));
        let tau = Ranking::identity(3);
        let a = solve_kemeny(&profile_to_matrix(&p), &tau).unwrap().ranking;
        let b = solve_kemeny(&profile_to_matrix(&p_hat), &tau).unwrap().ranking;
        assert_eq!(a.order(), &[2, 1, 0]);
        assert_eq!(b.order(), &[0, 1, 2]);
        assert!(fixture_one_voter_flip(2, 5).is_err());
    }
}
