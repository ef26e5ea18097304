//! Square matrices of pairwise weights.
//!
//! [`ScoreMatrix`] is any `k x k` table of reals that a Kemeny score can be
//! taken against (including upper-confidence matrices whose entries need not
//! sum to one). [`WinMatrix`] adds the winning-probability constraints:
//! `q_ii = 0.5`, `q_ij + q_ji = 1` and entries in `[0, 1]`.
//!
//! Matrices derived from voter counts also carry the integer counts and the
//! common denominator, so that solvers can compare scores without rounding.

use std::ops::Deref;

use crate::error::{invalid, Result};

/// Tolerance for the `q_ij + q_ji = 1` constraint on real-valued input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Integer numerators sharing one denominator. Diagonal numerators are
/// unused and stored as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub numerators: Vec<i64>,
    pub denominator: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    k: usize,
    entries: Vec<f64>,
    exact: Option<ExactCounts>,
}

impl ScoreMatrix {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return invalid("matrix needs at least one arm");
        }
        if entries.len() != k * k {
            return invalid(format!("expected {} entries for k = {k}, got {}", k * k, entries.len()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite matrix entry {bad}"));
        }
        Ok(Self { k, entries, exact: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return invalid("matrix rows must all have length k");
        }
        Self::new(k, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix whose off-diagonal entries are `numerators / denominator`.
    pub fn from_counts(k: usize, numerators: Vec<i64>, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return invalid("denominator must be positive");
        }
        if numerators.len() != k * k {
            return invalid(format!("expected {} counts for k = {k}", k * k));
        }
        let mut numerators = numerators;
        let mut entries = vec![0.5; k * k];
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    numerators[i * k + j] = 0;
                } else {
                    entries[i * k + j] = numerators[i * k + j] as f64 / denominator as f64;
                }
            }
        }
        let mut m = Self::new(k, entries)?;
        m.exact = Some(ExactCounts { numerators, denominator });
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn exact(&self) -> Option<&ExactCounts> {
        self.exact.as_ref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    /// Sum of `|a_ij - b_ij|` over all entries.
    pub fn l1_distance(&self, other: &ScoreMatrix) -> Result<f64> {
        if self.k != other.k {
            return invalid(format!("dimension mismatch: {} vs {}", self.k, other.k));
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).sum())
    }
}

impl AsRef<ScoreMatrix> for ScoreMatrix {
    fn as_ref(&self) -> &ScoreMatrix {
        self
    }
}

/// Matrix of winning probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WinMatrix(ScoreMatrix);

impl WinMatrix {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(k, entries, SYMMETRY_TOLERANCE)
    }

    /// Like [`WinMatrix::new`] but accepts `|q_ij + q_ji - 1| <= tolerance`,
    /// for matrices read from rounded decimal text.
    pub fn with_tolerance(k: usize, entries: Vec<f64>, tolerance: f64) -> Result<Self> {
        let m = ScoreMatrix::new(k, entries)?;
        validate(&m, tolerance)?;
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = ScoreMatrix::from_rows(rows)?;
        validate(&m, SYMMETRY_TOLERANCE)?;
        Ok(Self(m))
    }

    /// Builds the matrix from the strict upper triangle; `q_ji = 1 - q_ij`.
    pub fn from_upper(k: usize, upper: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut entries = vec![0.5; k * k];
        for i in 0..k {
            for j in i + 1..k {
                let v = upper(i, j);
                entries[i * k + j] = v;
                entries[j * k + i] = 1.0 - v;
            }
        }
        Self::new(k, entries)
    }

    /// Exact matrix `q_ij = wins_ij / n`. Requires `wins_ij + wins_ji = n`.
    pub fn from_counts(k: usize, wins: Vec<i64>, n: u64) -> Result<Self> {
        let m = ScoreMatrix::from_counts(k, wins, n)?;
        let ex = m.exact().expect("counts were just attached");
        for i in 0..k {
            for j in i + 1..k {
                let (a, b) = (ex.numerators[i * k + j], ex.numerators[j * k + i]);
                if a < 0 || b < 0 || (a + b) as u64 != n {
                    return invalid(format!("counts for pair ({i}, {j}) do not sum to {n}"));
                }
            }
        }
        Ok(Self(m))
    }

    /// The all-0.5 matrix.
    pub fn uniform(k: usize) -> Self {
        Self(ScoreMatrix::new(k, vec![0.5; k * k]).expect("k >= 1"))
    }

    pub fn transpose(&self) -> Self {
        let k = self.k();
        let mut entries = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                entries[j * k + i] = self.get(i, j);
            }
        }
        let mut t = ScoreMatrix::new(k, entries).expect("same shape");
        if let Some(ex) = self.exact() {
            let mut nums = vec![0; k * k];
            for i in 0..k {
                for j in 0..k {
                    nums[j * k + i] = ex.numerators[i * k + j];
                }
            }
            t.exact = Some(ExactCounts { numerators: nums, denominator: ex.denominator });
        }
        Self(t)
    }

    /// Relabels arms: arm `a` of `self` becomes arm `perm[a]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let k = self.k();
        let mut entries = vec![0.5; k * k];
        for i in 0..k {
            for j in 0..k {
                entries[perm[i] * k + perm[j]] = self.get(i, j);
            }
        }
        let mut m = ScoreMatrix::new(k, entries).expect("same shape");
        if let Some(ex) = self.exact() {
            let mut nums = vec![0; k * k];
            for i in 0..k {
                for j in 0..k {
                    nums[perm[i] * k + perm[j]] = ex.numerators[i * k + j];
                }
            }
            m.exact = Some(ExactCounts { numerators: nums, denominator: ex.denominator });
        }
        Self(m)
    }

    /// `sum_{j != i} q_ij`, the normalised Borda score of arm `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.k()).filter(|&j| j != i).map(|j| self.get(i, j)).sum()
    }

    pub fn as_score_matrix(&self) -> &ScoreMatrix {
        &self.0
    }
}

impl Deref for WinMatrix {
    type Target = ScoreMatrix;

    fn deref(&self) -> &ScoreMatrix {
        &self.0
    }
}

impl AsRef<ScoreMatrix> for WinMatrix {
    fn as_ref(&self) -> &ScoreMatrix {
        &self.0
    }
}

fn validate(m: &ScoreMatrix, tolerance: f64) -> Result<()> {
    let k = m.k();
    for i in 0..k {
        if m.get(i, i) != 0.5 {
            return invalid(format!("diagonal entry ({i}, {i}) must be 0.5, got {}", m.get(i, i)));
        }
        for j in 0..k {
            let v = m.get(i, j);
            if !(-tolerance..=1.0 + tolerance).contains(&v) {
                return invalid(format!("entry ({i}, {j}) = {v} outside [0, 1]"));
            }
            if i < j && (v + m.get(j, i) - 1.0).abs() > tolerance {
                return invalid(format!(
                    "entries ({i}, {j}) and ({j}, {i}) sum to {}, expected 1",
                    v + m.get(j, i)
                ));
            }
        }
    }
    Ok(())
}
