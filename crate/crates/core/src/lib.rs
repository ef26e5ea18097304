//! Elicitation of approximate Kemeny rankings from pairwise comparisons.
//!
//! Voters (or a hidden matrix of winning probabilities) are queried one pair
//! of alternatives at a time. Sample means and confidence intervals are
//! tracked per pair, tightened with the structural constraints every
//! preference matrix satisfies, and the Kemeny ranking of the upper-bound
//! matrix is returned together with a certified bound on its score gap.
//!
//! ```
//! use kemeny_elicit::{profile_to_matrix, solve_kemeny, PreferenceProfile, Ranking};
//!
//! let profile = PreferenceProfile::from_orders(3, &[
//!     vec![0, 1, 2],
//!     vec![0, 1, 2],
//!     vec![2, 1, 0],
//! ]).unwrap();
//! let q = profile_to_matrix(&profile);
//! let result = solve_kemeny(&q, &Ranking::identity(3)).unwrap();
//! assert_eq!(result.ranking.order(), &[0, 1, 2]);
//! assert!((result.score - 1.0).abs() < 1e-12);
//! ```

pub mod confidence;
pub mod elicitation;
pub mod error;
pub mod formats;
pub mod matrix;
pub mod oracle;
pub mod preferences;
pub mod pruning;
pub mod ranking;
pub mod seed;
pub mod strategy;

pub use confidence::{
    approximation_bound, best_bound, hoeffding_bound, sample_size_with_replacement,
    sample_size_without_replacement, serfling_bound, serfling_reverse_bound, IntervalMatrix,
    PacParams, SamplingMode,
};
pub use elicitation::{
    adaptive_elicit, kemeny_el_with_replacement, kemeny_el_without_replacement, AdaptiveConfig,
    ElicitationTrace, StepRecord, Termination,
};
pub use error::{Error, Result};
pub use matrix::{ScoreMatrix, WinMatrix};
pub use oracle::{BernoulliOracle, ComparisonSource, Outcome, VoterPool};
pub use preferences::{
    check_borda_realisability, check_completeness, check_triangle, fixture_transposed_near_tie,
    fixture_one_voter_flip, gen_mallows_profile, gen_single_peaked_profile, gen_uniform_profile,
    is_single_peaked, profile_to_matrix, random_win_matrix, Generator, PreferenceProfile,
};
pub use pruning::{prune, prune_clamp, prune_symmetry, prune_triangle_fixpoint};
pub use ranking::{
    brute_force_kemeny, kemeny_score, kendall_tau, solve_kemeny, KemenyResult, Ranking,
    BRUTE_FORCE_CAP, SOLVER_CAP,
};
pub use strategy::{select, select_lookahead, select_opportunistic, select_uniform, StrategyKind};
