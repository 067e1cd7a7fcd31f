//! Young diagrams and the exact combinatorics attached to them: enumeration,
//! symmetric-group irrep dimensions, box removal, branching multiplicities
//! and Kostka numbers.
//!
//! All counts are exact unbounded integers ([`BigCount`]). Probabilities built
//! from them downstream go through [`BigCount::ln`].

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition `λ_1 ≥ λ_2 ≥ … ≥ λ_k > 0`, stored without trailing zeros.
///
/// Two diagrams compare equal iff their nonzero rows coincide, so a diagram
/// padded to `d` rows and its unpadded form are the same value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct YoungDiagram {
    rows: Vec<usize>,
}

impl YoungDiagram {
    /// Builds a diagram from row lengths. Trailing zeros are stripped.
    pub fn new(rows: impl Into<Vec<usize>>) -> Result<Self> {
        let mut rows = rows.into();
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidDiagram(format!("rows {rows:?} are not weakly decreasing")));
        }
        while rows.last() == Some(&0) {
            rows.pop();
        }
        Ok(Self { rows })
    }

    /// The empty diagram with zero boxes.
    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    pub(crate) fn from_rows_unchecked(mut rows: Vec<usize>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] >= w[1]));
        while rows.last() == Some(&0) {
            rows.pop();
        }
        Self { rows }
    }

    /// Nonzero rows.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Length of row `r` (1-based); zero past the last nonzero row.
    pub fn row(&self, r: usize) -> usize {
        if r == 0 {
            return 0;
        }
        self.rows.get(r - 1).copied().unwrap_or(0)
    }

    /// Number of nonzero rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total number of boxes.
    pub fn boxes(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Rows padded with zeros to length `d`. Panics if `d` is smaller than
    /// the number of nonzero rows.
    pub fn padded(&self, d: usize) -> Vec<usize> {
        assert!(d >= self.rows.len(), "cannot pad {self} to {d} rows");
        let mut out = self.rows.clone();
        out.resize(d, 0);
        out
    }

    /// `true` if every row of `other` fits inside the corresponding row of `self`.
    pub fn contains(&self, other: &YoungDiagram) -> bool {
        other.rows.len() <= self.rows.len() && other.rows.iter().zip(&self.rows).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<usize>> for YoungDiagram {
    type Error = Error;

    fn try_from(rows: Vec<usize>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<YoungDiagram> for Vec<usize> {
    fn from(d: YoungDiagram) -> Self {
        d.rows
    }
}

/// Exact non-negative integer count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn one() -> Self {
        Self(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.0.bits();
        if bits <= 1000 {
            return self.0.to_f64().expect("fits in f64").ln();
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_f64().expect("64-bit value");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }

    /// Lossy conversion; `inf` once the value exceeds the f64 range.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All partitions of `n` into at most `d` parts, in reverse-lexicographic
/// order: `(n)` first, the most balanced diagram last.
pub fn enumerate_diagrams(n: usize, d: usize) -> Vec<YoungDiagram> {
    fn rec(remaining: usize, max_part: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<YoungDiagram>) {
        if remaining == 0 {
            out.push(YoungDiagram::from_rows_unchecked(prefix.clone()));
            return;
        }
        if slots == 0 {
            return;
        }
        // The remaining boxes must fit in `slots` rows of length ≤ part.
        let hi = remaining.min(max_part);
        let lo = remaining.div_ceil(slots);
        for part in (lo..=hi).rev() {
            prefix.push(part);
            rec(remaining - part, part, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        if n == 0 {
            out.push(YoungDiagram::empty());
        }
        return out;
    }
    rec(n, n, d, &mut Vec::with_capacity(d), &mut out);
    out
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Dimension of the symmetric-group irrep labelled by `lambda`, evaluated as
/// `n!/(l_1!…l_d!) · Π_{i<j}(l_i − l_j)` with `l_i = λ_i + d − i`.
pub fn dimension_sn(lambda: &YoungDiagram, d: usize) -> Result<BigCount> {
    if lambda.num_rows() > d {
        return Err(Error::TooManyRows { rows: lambda.num_rows(), max: d });
    }
    let l: Vec<usize> = (1..=d).map(|i| lambda.row(i) + d - i).collect();
    let mut num = factorial(lambda.boxes());
    for i in 0..d {
        for j in i + 1..d {
            num *= (l[i] - l[j]) as u64;
        }
    }
    let den = l.iter().fold(BigUint::one(), |acc, &li| acc * factorial(li));
    debug_assert!((&num % &den).is_zero());
    Ok(BigCount(num / den))
}

/// [`dimension_sn`] with the row-count context equal to the diagram's own row count.
pub fn dimension(lambda: &YoungDiagram) -> BigCount {
    dimension_sn(lambda, lambda.num_rows()).expect("row context matches")
}

/// Dimension of the SU(d) irrep labelled by `lambda`:
/// `Π_{i<j}(l_i − l_j) / Π_{i<j}(j − i)`.
pub fn dimension_su(lambda: &YoungDiagram, d: usize) -> Result<BigCount> {
    if lambda.num_rows() > d {
        return Err(Error::TooManyRows { rows: lambda.num_rows(), max: d });
    }
    let l: Vec<usize> = (1..=d).map(|i| lambda.row(i) + d - i).collect();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        for j in i + 1..d {
            num *= (l[i] - l[j]) as u64;
            den *= (j - i) as u64;
        }
    }
    Ok(BigCount(num / den))
}

/// Removes one box from row `r` (1-based). `None` when the result would not
/// be a valid diagram (`λ_r = λ_{r+1}` or `λ_r = 0`).
pub fn remove_box(lambda: &YoungDiagram, r: usize) -> Option<YoungDiagram> {
    if r == 0 {
        return None;
    }
    let len = lambda.row(r);
    if len == 0 || len == lambda.row(r + 1) {
        return None;
    }
    let mut rows = lambda.rows.clone();
    rows[r - 1] -= 1;
    Some(YoungDiagram::from_rows_unchecked(rows))
}

/// All valid single-box removals as `(row, diagram)` pairs, rows 1-based.
pub fn removable_boxes(lambda: &YoungDiagram) -> impl Iterator<Item = (usize, YoungDiagram)> + '_ {
    (1..=lambda.num_rows()).filter_map(move |r| remove_box(lambda, r).map(|d| (r, d)))
}

/// Number of down-paths in the Young lattice from `lambda` to `xi`, removing
/// one box per step. Equals the multiplicity of `xi` in the restriction of
/// the `lambda` irrep of `S_n` to `S_{|xi|}`.
pub fn branching_multiplicity(lambda: &YoungDiagram, xi: &YoungDiagram) -> Result<BigCount> {
    if xi.boxes() > lambda.boxes() {
        return Err(Error::InvalidParameter(format!("target {xi} has more boxes than source {lambda}")));
    }
    let mut memo = HashMap::new();
    Ok(BigCount(paths_down(lambda, xi, &mut memo)))
}

fn paths_down(from: &YoungDiagram, to: &YoungDiagram, memo: &mut HashMap<YoungDiagram, BigUint>) -> BigUint {
    if from == to {
        return BigUint::one();
    }
    if !from.contains(to) || from.boxes() <= to.boxes() {
        return BigUint::zero();
    }
    if let Some(v) = memo.get(from) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    for (_, next) in removable_boxes(from) {
        total += paths_down(&next, to, memo);
    }
    memo.insert(from.clone(), total.clone());
    total
}

/// Memoized Kostka-number evaluator. Keep one per computation to share work
/// between related queries.
#[derive(Default)]
pub struct KostkaTable {
    memo: HashMap<(YoungDiagram, Vec<usize>), BigUint>,
}

impl KostkaTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of semistandard tableaux of shape `lambda` and content `mu`
    /// (`mu[i]` copies of `i + 1`).
    pub fn get(&mut self, lambda: &YoungDiagram, mu: &[usize]) -> Result<BigCount> {
        let total: usize = mu.iter().sum();
        if total != lambda.boxes() {
            return Err(Error::SizeMismatch { expected: lambda.boxes(), got: total });
        }
        Ok(BigCount(self.count(lambda, mu)))
    }

    // Peel off the boxes holding the largest entry: they form a horizontal
    // strip of size mu.last().
    fn count(&mut self, lambda: &YoungDiagram, mu: &[usize]) -> BigUint {
        let Some((&last, rest)) = mu.split_last() else {
            return if lambda.num_rows() == 0 { BigUint::one() } else { BigUint::zero() };
        };
        if lambda.num_rows() > mu.len() {
            return BigUint::zero();
        }
        let key = (lambda.clone(), mu.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut strips = Vec::new();
        horizontal_strips(lambda.rows(), last, &mut Vec::new(), &mut strips);
        let mut total = BigUint::zero();
        for nu in strips {
            total += self.count(&YoungDiagram::from_rows_unchecked(nu), rest);
        }
        self.memo.insert(key, total.clone());
        total
    }
}

// Every nu with lambda_{i+1} ≤ nu_i ≤ lambda_i and Σ(lambda_i − nu_i) = size.
fn horizontal_strips(lambda: &[usize], size: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let i = prefix.len();
    if i == lambda.len() {
        if size == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let lo = lambda.get(i + 1).copied().unwrap_or(0);
    let max_take = (lambda[i] - lo).min(size);
    // Later rows can absorb at most this many boxes.
    let capacity_after: usize = (i + 1..lambda.len()).map(|j| lambda[j] - lambda.get(j + 1).copied().unwrap_or(0)).sum();
    let min_take = size.saturating_sub(capacity_after);
    if min_take > max_take {
        return;
    }
    for take in min_take..=max_take {
        prefix.push(lambda[i] - take);
        horizontal_strips(lambda, size - take, prefix, out);
        prefix.pop();
    }
}

/// Kostka number `K_{λμ}`. The weight `mu` need not be sorted.
pub fn kostka(lambda: &YoungDiagram, mu: &[usize]) -> Result<BigCount> {
    KostkaTable::new().get(lambda, mu)
}
