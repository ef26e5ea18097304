//! Plain-text file formats.
//!
//! Profile file: first line `k n`, then `n` lines, each a space-separated
//! permutation of `0..k`, best first.
//!
//! Matrix file: first line `k`, then `k` rows of `k` space-separated
//! entries. Entries are decimals or fractions such as `2/3`.
//!
//! Blank lines and lines starting with `#` are ignored. Parse errors carry
//! the one-based line number.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{ScoreMatrix, WinMatrix};
use crate::preferences::{PreferenceProfile, CHECK_TOLERANCE};
use crate::ranking::Ranking;

/// Either kind of input file.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Profile(PreferenceProfile),
    Matrix(ScoreMatrix),
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Content lines with their one-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().or_else(|_| err(line, format!("expected a non-negative integer, got {tok:?}")))
}

fn parse_entry(line: usize, tok: &str) -> Result<f64> {
    let value = match tok.split_once('/') {
        Some((a, b)) => match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => a / b,
            _ => return err(line, format!("bad fraction {tok:?}")),
        },
        None => tok.parse().or_else(|_| err(line, format!("expected a number, got {tok:?}")))?,
    };
    if !value.is_finite() {
        return err(line, format!("entry {tok:?} is not finite"));
    }
    Ok(value)
}

fn header(text: &str) -> Result<(usize, Vec<&str>)> {
    match lines(text).next() {
        Some((no, l)) => Ok((no, l.split_whitespace().collect())),
        None => err(1, "empty input"),
    }
}

pub fn parse_profile(text: &str) -> Result<PreferenceProfile> {
    let (hline, head) = header(text)?;
    if head.len() != 2 {
        return err(hline, "profile header must be `k n`");
    }
    let k = parse_usize(hline, head[0])?;
    let n = parse_usize(hline, head[1])?;
    if k == 0 || n == 0 {
        return err(hline, "k and n must be positive");
    }
    let mut voters = Vec::with_capacity(n);
    let mut last = hline;
    for (no, l) in lines(text).skip(1) {
        last = no;
        if voters.len() == n {
            return err(no, format!("more than {n} voters"));
        }
        let order = l.split_whitespace().map(|t| parse_usize(no, t)).collect::<Result<Vec<_>>>()?;
        if order.len() != k {
            return err(no, format!("expected {k} arms, got {}", order.len()));
        }
        let ranking = Ranking::new(order).or_else(|e| err(no, e.to_string()))?;
        voters.push(ranking);
    }
    if voters.len() < n {
        return err(last + 1, format!("expected {n} voters, got {}", voters.len()));
    }
    PreferenceProfile::new(voters)
}

pub fn parse_matrix(text: &str) -> Result<ScoreMatrix> {
    let (hline, head) = header(text)?;
    if head.len() != 1 {
        return err(hline, "matrix header must be `k`");
    }
    let k = parse_usize(hline, head[0])?;
    if k == 0 {
        return err(hline, "k must be positive");
    }
    let mut entries = Vec::with_capacity(k * k);
    let mut rows = 0;
    let mut last = hline;
    for (no, l) in lines(text).skip(1) {
        last = no;
        if rows == k {
            return err(no, format!("more than {k} rows"));
        }
        let row = l.split_whitespace().map(|t| parse_entry(no, t)).collect::<Result<Vec<_>>>()?;
        if row.len() != k {
            return err(no, format!("expected {k} entries, got {}", row.len()));
        }
        entries.extend(row);
        rows += 1;
    }
    if rows < k {
        return err(last + 1, format!("expected {k} rows, got {rows}"));
    }
    ScoreMatrix::new(k, entries)
}

/// Parses a matrix file and checks it is a preference matrix, allowing the
/// rounding found in decimal files.
pub fn parse_win_matrix(text: &str) -> Result<WinMatrix> {
    let m = parse_matrix(text)?;
    WinMatrix::with_tolerance(m.k(), m.entries().to_vec(), CHECK_TOLERANCE)
}

/// Detects the file kind from the header: two numbers for a profile, one
/// for a matrix.
pub fn parse_any(text: &str) -> Result<Parsed> {
    let (hline, head) = header(text)?;
    match head.len() {
        2 => parse_profile(text).map(Parsed::Profile),
        1 => parse_matrix(text).map(Parsed::Matrix),
        _ => err(hline, "header must be `k n` (profile) or `k` (matrix)"),
    }
}

pub fn write_profile(p: &PreferenceProfile) -> String {
    let mut out = format!("{} {}\n", p.k(), p.n());
    for v in p.voters() {
        let line: Vec<String> = v.order().iter().map(|a| a.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix(m: &ScoreMatrix) -> String {
    let k = m.k();
    let mut out = format!("{k}\n");
    for i in 0..k {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
