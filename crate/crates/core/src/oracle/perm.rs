//! Permutation operators on `(C^d)^{⊗m}` and symmetric-group characters.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use crate::young::{dimension, YoungDiagram};

/// Largest `m` and `d` accepted by the explicit matrix-side trace.
pub const MATRIX_TRACE_MAX_M: usize = 8;
pub const MATRIX_TRACE_MAX_D: usize = 4;

/// A permutation of `{0, …, m−1}` in one-line notation: `σ(i) = perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermOp {
    perm: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl PermOp {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let m = perm.len();
        let mut seen = vec![false; m];
        for &x in &perm {
            if x >= m || seen[x] {
                return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
            }
            seen[x] = true;
        }
        let cycles = cycles_of(&perm);
        Ok(Self { perm, cycles })
    }

    /// One-line notation with entries `1..=m`.
    pub fn from_one_based(perm: &[usize]) -> Result<Self> {
        if perm.contains(&0) {
            return Err(Error::InvalidParameter("one-based permutation contains 0".into()));
        }
        Self::new(perm.iter().map(|x| x - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self::new((0..m).collect()).expect("identity")
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        Self::new(perm).expect("shuffled identity")
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Disjoint cycles, fixed points included, each starting at its smallest element.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// Cycle lengths, sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }
}

fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = perm[i];
        }
        out.push(cycle);
    }
    out
}

/// `Tr(P(σ) ρ^{⊗m}) = Π_cycles Σ_r p_r^{|cycle|}`.
pub fn permutation_trace(sigma: &PermOp, p: &Spectrum) -> f64 {
    sigma.cycles().iter().map(|c| p.power_trace(c.len())).product()
}

/// `Tr(P(σ) ρ^{⊗m})` by explicit contraction over all `d^m` basis indices:
/// `Σ_i Π_l ρ[i_{σ(l)}, i_l]`. `rho` may be any `d × d` matrix.
pub fn permutation_trace_matrix(sigma: &PermOp, rho: &DMatrix<Complex64>) -> Result<Complex64> {
    let m = sigma.len();
    let d = rho.nrows();
    if rho.ncols() != d {
        return Err(Error::SizeMismatch { expected: d, got: rho.ncols() });
    }
    if m > MATRIX_TRACE_MAX_M || d > MATRIX_TRACE_MAX_D {
        return Err(Error::SizeLimit { dim: d.pow(m as u32), limit: MATRIX_TRACE_MAX_D.pow(MATRIX_TRACE_MAX_M as u32) });
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; m];
    loop {
        let mut term = Complex64::new(1.0, 0.0);
        for l in 0..m {
            term *= rho[(idx[sigma.image(l)], idx[l])];
        }
        total += term;
        if !next_index(&mut idx, d) {
            break;
        }
    }
    Ok(total)
}

/// Odometer increment over `{0..d}^m`; returns `false` after the last tuple.
pub(crate) fn next_index(idx: &mut [usize], d: usize) -> bool {
    for x in idx.iter_mut().rev() {
        *x += 1;
        if *x < d {
            return true;
        }
        *x = 0;
    }
    false
}

/// Basis index of a tuple, first site most significant.
pub(crate) fn tuple_index(tuple: &[usize], d: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * d + x)
}

/// Digits of `index` in base `d`, padded to `m` sites.
pub(crate) fn index_tuple(mut index: usize, d: usize, m: usize) -> Vec<usize> {
    let mut t = vec![0; m];
    for x in t.iter_mut().rev() {
        *x = index % d;
        index /= d;
    }
    t
}

/// Dense `d^m × d^m` matrix of `P(σ)`, which moves the factor on site `l` to site `σ(l)`.
pub fn permutation_matrix(sigma: &PermOp, d: usize) -> DMatrix<f64> {
    let m = sigma.len();
    let dim = d.pow(m as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let t = index_tuple(col, d, m);
        let mut moved = vec![0; m];
        for l in 0..m {
            moved[sigma.image(l)] = t[l];
        }
        out[(tuple_index(&moved, d), col)] = 1.0;
    }
    out
}

/// `χ_λ` at a permutation of the given cycle type, by the Murnaghan–Nakayama rule.
pub fn sn_character(lambda: &YoungDiagram, cycle_type: &[usize]) -> Result<i64> {
    let total: usize = cycle_type.iter().sum();
    if total != lambda.boxes() || cycle_type.contains(&0) {
        return Err(Error::SizeMismatch { expected: lambda.boxes(), got: total });
    }
    let k = lambda.num_rows();
    let beta: Vec<usize> = (1..=k).map(|i| lambda.row(i) + k - i).collect();
    let mut parts = cycle_type.to_vec();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    let mut memo = HashMap::new();
    Ok(rim_hook_sum(beta, &parts, &mut memo))
}

// Removing a rim hook of length h moves one bead of the beta-set down by h;
// the sign counts the beads jumped over.
fn rim_hook_sum(beta: Vec<usize>, parts: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    let Some((&h, rest)) = parts.split_first() else {
        return 1;
    };
    let key = (beta.clone(), parts.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < h || beta.contains(&(b - h)) {
            continue;
        }
        let jumped = beta.iter().filter(|&&x| x > b - h && x < b).count();
        let mut next = beta.clone();
        next[idx] = b - h;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let sign = if jumped % 2 == 0 { 1 } else { -1 };
        total += sign * rim_hook_sum(next, rest, memo);
    }
    memo.insert(key, total);
    total
}

/// Largest `d^n` accepted by [`character_projector`].
pub const PROJECTOR_MAX_DIM: usize = 4096;

/// `Π_λ = (‖λ‖/n!) Σ_σ χ_λ(σ) P(σ)` on `(C^d)^{⊗n}`.
pub fn character_projector(lambda: &YoungDiagram, d: usize) -> Result<DMatrix<f64>> {
    let n = lambda.boxes();
    let dim = d.pow(n as u32);
    if dim > PROJECTOR_MAX_DIM || n > 8 {
        return Err(Error::SizeLimit { dim, limit: PROJECTOR_MAX_DIM });
    }
    let mut out = DMatrix::zeros(dim, dim);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut n_fact = 0u64;
    let mut chars: HashMap<Vec<usize>, i64> = HashMap::new();
    loop {
        n_fact += 1;
        let sigma = PermOp::new(perm.clone())?;
        let ct = sigma.cycle_type();
        let chi = match chars.get(&ct) {
            Some(&c) => c,
            None => {
                let c = sn_character(lambda, &ct)?;
                chars.insert(ct, c);
                c
            }
        };
        if chi != 0 {
            out += permutation_matrix(&sigma, d) * chi as f64;
        }
        if !crate::numeric::next_permutation(&mut perm) {
            break;
        }
    }
    let scale = dimension(lambda).to_f64() / n_fact as f64;
    Ok(out * scale)
}
