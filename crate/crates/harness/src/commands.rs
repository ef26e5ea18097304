//! File-level subcommands: matrix checks, solving, profile generation.

use std::fmt::Write as _;
use std::path::Path;

use kemeny_elicit::formats::{parse_any, parse_win_matrix, write_profile, Parsed};
use kemeny_elicit::preferences::borda_violation;
use kemeny_elicit::{check_completeness, check_triangle, profile_to_matrix, solve_kemeny, Ranking, WinMatrix};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::instance_profile;

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

/// Five decimals with trailing zeros dropped, keeping at least one.
pub fn format_score(x: f64) -> String {
    let s = format!("{x:.5}");
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

fn one_based(arms: &[usize]) -> String {
    arms.iter().map(|a| (a + 1).to_string()).collect::<Vec<_>>().join(", ")
}

/// Runs the completeness, triangle and Borda checks on a matrix or profile
/// file. Completeness needs the voter count, taken from a profile or `n`.
pub fn validate(text: &str, n: Option<usize>) -> Result<String> {
    let (q, n) = match parse_any(text)? {
        Parsed::Profile(p) => (profile_to_matrix(&p), Some(p.n())),
        Parsed::Matrix(_) => (parse_win_matrix(text)?, n),
    };
    let mut out = String::new();
    match n {
        Some(n) if check_completeness(&q, n) => out.push_str(&format!("completeness: pass (n = {n})\n")),
        Some(n) => out.push_str(&format!("completeness: fail (entries are not multiples of 1/{n})\n")),
        None => out.push_str("completeness: skipped (voter count unknown)\n"),
    }
    let triangles = check_triangle(&q);
    if triangles.is_empty() {
        out.push_str("triangle: pass\n");
    } else {
        let _ = write!(out, "triangle: fail ({} violations)", triangles.len());
        for (l, j, i) in triangles.iter().take(20) {
            let _ = write!(out, " ({}, {}, {})", l + 1, j + 1, i + 1);
        }
        out.push('\n');
    }
    match borda_violation(&q) {
        None => out.push_str("borda: pass\n"),
        Some(set) => {
            let _ = writeln!(out, "borda: fail (arms {{{}}})", one_based(&set));
        }
    }
    Ok(out)
}

/// Solves a matrix or profile file; prints `1>2>3 score=1.33333`.
pub fn solve(text: &str, tiebreak: Option<&Ranking>) -> Result<String> {
    let result = match parse_any(text)? {
        Parsed::Profile(p) => solve_with(&profile_to_matrix(&p), tiebreak)?,
        Parsed::Matrix(m) => {
            let tb = tiebreak.cloned().unwrap_or_else(|| Ranking::identity(m.k()));
            solve_kemeny(&m, &tb)?
        }
    };
    Ok(format!("{} score={}\n", result.ranking.to_one_based_string(), format_score(result.score)))
}

fn solve_with(q: &WinMatrix, tiebreak: Option<&Ranking>) -> Result<kemeny_elicit::KemenyResult> {
    let tb = tiebreak.cloned().unwrap_or_else(|| Ranking::identity(q.k()));
    Ok(solve_kemeny(q, &tb)?)
}

/// The profile file of an experiment instance.
pub fn generate(cfg: &ExperimentConfig, instance: usize) -> Result<String> {
    Ok(write_profile(&instance_profile(cfg, instance)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_formatting() {
        assert_eq!(format_score(4.0 / 3.0), "1.33333");
        assert_eq!(format_score(1.0), "1.0");
        assert_eq!(format_score(0.0), "0.0");
        assert_eq!(format_score(2.5), "2.5");
    }

    #[test]
    fn solve_outputs() {
        assert_eq!(solve("3\n1/2 2/3 1/3\n1/3 1/2 2/3\n2/3 1/3 1/2\n", None).unwrap(), "1>2>3 score=1.33333\n");
        assert_eq!(solve("3 3\n0 1 2\n0 1 2\n2 1 0\n", None).unwrap(), "1>2>3 score=1.0\n");
        assert_eq!(solve("3 2\n2 0 1\n2 0 1\n", None).unwrap(), "3>1>2 score=0.0\n");
        let tb = Ranking::new(vec![2, 1, 0]).unwrap();
        assert_eq!(solve("3\n0.5 0.5 0.5\n0.5 0.5 0.5\n0.5 0.5 0.5\n", Some(&tb)).unwrap(), "3>2>1 score=1.5\n");
    }

    #[test]
    fn validate_reports() {
        let report = validate("3\n1/2 2/3 2/3\n1/3 1/2 2/3\n1/3 1/3 1/2\n", Some(3)).unwrap();
        assert_eq!(report, "completeness: pass (n = 3)\ntriangle: pass\nborda: pass\n");
        let report = validate("3\n0.5 0.5005 0.5005\n0.4995 0.5 0.5005\n0.4995 0.4995 0.5\n", None).unwrap();
        assert!(report.starts_with("completeness: skipped"));
        let report = validate("3\n0.5 1 0\n0 0.5 1\n1 0 0.5\n", Some(1)).unwrap();
        assert!(report.contains("triangle: fail"), "{report}");
        assert!(validate("", None).is_err());
    }
}
