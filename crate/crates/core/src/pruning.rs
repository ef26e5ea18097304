//! Tightening of confidence intervals using constraints that every
//! preference matrix satisfies: `q_ij + q_ji = 1`, `q_ij in [0, 1]`, and the
//! triangle inequality `q_ij <= q_il + q_lj`.
//!
//! All three steps only ever shrink intervals, and each keeps any matrix
//! that satisfies the constraints and lay inside the input intervals inside
//! the output intervals.

use crate::confidence::{IntervalMatrix, PacParams};

/// Safety cap on triangle passes. Offsets live on a finite grid, so the
/// fixpoint is always reached long before this.
pub const MAX_TRIANGLE_PASSES: usize = 1_000_000;

/// Rounds up to the five-digit grid. The small slack absorbs floating-point
/// noise on values that are already grid points.
fn ceil5(x: f64) -> f64 {
    (x * 1e5 - 1e-6).ceil() / 1e5
}

fn sync_lower(m: &mut IntervalMatrix) {
    let k = m.k();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                m.lower[i * k + j] = m.upper[j * k + i];
            }
        }
    }
}

/// `c_ij <- min(upper_ij, lower_ji)`: an upper bound on `q_ij` is also
/// implied by the lower bound on `q_ji`.
pub fn prune_symmetry(m: &IntervalMatrix) -> IntervalMatrix {
    let mut out = m.clone();
    let k = m.k();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                out.upper[i * k + j] = m.upper(i, j).min(m.lower(j, i));
            }
        }
    }
    sync_lower(&mut out);
    out
}

/// Keeps every upper bound `mean_ij + c_ij` inside `[0, 1]`.
pub fn prune_clamp(m: &IntervalMatrix) -> IntervalMatrix {
    let mut out = m.clone();
    let k = m.k();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let mean = m.mean(i, j);
                out.upper[i * k + j] = m.upper(i, j).min(1.0 - mean).max(-mean);
            }
        }
    }
    sync_lower(&mut out);
    out
}

/// Repeats `c_ij <- min(c_ij, min_{l != i,j} mean_il + c_il + mean_lj + c_lj - mean_ij)`,
/// floored at `-mean_ij`, until nothing changes.
///
/// Each pass reads only the previous pass's offsets. Candidates from the
/// triangle term are rounded up to the five-digit grid so the bound stays
/// valid and the iteration stops on an exact fixpoint.
pub fn prune_triangle_fixpoint(m: &IntervalMatrix) -> IntervalMatrix {
    prune_triangle_counted(m).0
}

/// Like [`prune_triangle_fixpoint`], also returning the number of passes
/// that changed at least one offset.
pub fn prune_triangle_counted(m: &IntervalMatrix) -> (IntervalMatrix, usize) {
    let k = m.k();
    let mut cur = m.clone();
    let mut next = m.upper.clone();
    let mut passes = 0;
    while passes < MAX_TRIANGLE_PASSES {
        let mut changed = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let mean_ij = cur.mean(i, j);
                let mut best = cur.upper(i, j);
                for l in 0..k {
                    if l == i || l == j {
                        continue;
                    }
                    let via = cur.mean(i, l) + cur.upper(i, l) + cur.mean(l, j) + cur.upper(l, j) - mean_ij;
                    best = best.min(ceil5(via));
                }
                let updated = best.max(-mean_ij);
                if updated != cur.upper(i, j) {
                    changed = true;
                }
                next[i * k + j] = updated;
            }
        }
        if !changed {
            break;
        }
        passes += 1;
        cur.upper.copy_from_slice(&next);
    }
    sync_lower(&mut cur);
    (cur, passes)
}

/// Symmetry, then clamping, then the triangle fixpoint.
pub fn prune(m: &IntervalMatrix) -> IntervalMatrix {
    prune_triangle_fixpoint(&prune_clamp(&prune_symmetry(m)))
}

/// Resets offsets to the formula bounds at the current pull counts and,
/// when `enabled`, prunes the result. This is the full per-sample update.
pub fn refresh_and_prune(m: &mut IntervalMatrix, params: &PacParams, enabled: bool) {
    m.refresh_offsets(params);
    if enabled {
        *m = prune(m);
    }
}
