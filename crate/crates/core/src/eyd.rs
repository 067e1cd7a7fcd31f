//! Outcome statistics of the empirical-Young-diagram (EYD) measurement on
//! `ρ^{⊗n}`, plus the square-well interaction energy of each diagram.
//!
//! `Pr(λ|n,p) = ‖λ‖ Σ_m p_1^{m_1}…p_d^{m_d} K_{λ,m}`. Kostka numbers are
//! symmetric in the weight, so the sum runs over sorted weights `μ` and each
//! contributes `K_{λμ}` times the monomial symmetric polynomial `m_μ(p)`.
//! Every term is formed in log space from exact integer factors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, log_sum_exp, next_permutation, xlny};
use crate::spectrum::Spectrum;
use crate::young::{dimension_sn, enumerate_diagrams, BigCount, KostkaTable, YoungDiagram};

/// One row of an [`EydDistribution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EydEntry {
    pub lambda: YoungDiagram,
    pub prob: f64,
}

/// `Pr(λ|n,p)` over every diagram of `n` boxes with at most `d` rows, in
/// [`enumerate_diagrams`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EydDistribution {
    pub n: usize,
    pub d: usize,
    pub entries: Vec<EydEntry>,
}

impl EydDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    /// Entry with the largest probability (first one on ties).
    pub fn mode(&self) -> &EydEntry {
        self.entries.iter().reduce(|best, e| if e.prob > best.prob { e } else { best }).expect("distribution is never empty")
    }

    pub fn probability_of(&self, lambda: &YoungDiagram) -> f64 {
        self.entries.iter().find(|e| &e.lambda == lambda).map_or(0.0, |e| e.prob)
    }
}

/// Precomputed `p`-independent structure for evaluating `Pr(λ|n,p)` at many
/// spectra with fixed `(n, d)`.
#[derive(Clone, Debug)]
pub struct EydModel {
    n: usize,
    d: usize,
    diagrams: Vec<YoungDiagram>,
    ln_dims: Vec<f64>,
    // Padded sorted weights μ ⊢ n with at most d parts.
    weights: Vec<Vec<usize>>,
    // ln K_{λμ} per (diagram, weight); -inf when zero.
    ln_kostka: Vec<Vec<f64>>,
}

impl EydModel {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        let diagrams = enumerate_diagrams(n, d);
        let weights: Vec<Vec<usize>> = diagrams.iter().map(|mu| mu.padded(d)).collect();
        let mut table = KostkaTable::new();
        let mut ln_dims = Vec::with_capacity(diagrams.len());
        let mut ln_kostka = Vec::with_capacity(diagrams.len());
        for lambda in &diagrams {
            ln_dims.push(dimension_sn(lambda, d)?.ln());
            let row = weights
                .iter()
                .map(|mu| {
                    // Dominance: K vanishes unless μ ⊴ λ.
                    if dominated_by(mu, lambda) {
                        table.get(lambda, mu).map(|k| k.ln())
                    } else {
                        Ok(f64::NEG_INFINITY)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            ln_kostka.push(row);
        }
        Ok(Self { n, d, diagrams, ln_dims, weights, ln_kostka })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn diagrams(&self) -> &[YoungDiagram] {
        &self.diagrams
    }

    /// `Pr(λ|n,p)` for every diagram, in [`Self::diagrams`] order.
    pub fn probabilities(&self, p: &Spectrum) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        let ln_monomials: Vec<f64> = self.weights.iter().map(|mu| ln_monomial_symmetric(mu, p.as_slice())).collect();
        let mut terms = Vec::with_capacity(self.weights.len());
        Ok(self
            .ln_kostka
            .iter()
            .zip(&self.ln_dims)
            .map(|(row, ln_dim)| {
                terms.clear();
                terms.extend(row.iter().zip(&ln_monomials).map(|(k, m)| k + m));
                (ln_dim + log_sum_exp(&terms)).exp()
            })
            .collect())
    }

    /// `Pr(λ|n,p)` for a single diagram.
    pub fn probability(&self, lambda: &YoungDiagram, p: &Spectrum) -> Result<f64> {
        self.check_dim(p)?;
        let idx = self.index_of(lambda)?;
        let terms: Vec<f64> = self.ln_kostka[idx].iter().zip(&self.weights).map(|(k, mu)| k + ln_monomial_symmetric(mu, p.as_slice())).collect();
        Ok((self.ln_dims[idx] + log_sum_exp(&terms)).exp())
    }

    pub fn distribution(&self, p: &Spectrum) -> Result<EydDistribution> {
        let probs = self.probabilities(p)?;
        Ok(EydDistribution {
            n: self.n,
            d: self.d,
            entries: self.diagrams.iter().cloned().zip(probs).map(|(lambda, prob)| EydEntry { lambda, prob }).collect(),
        })
    }

    fn index_of(&self, lambda: &YoungDiagram) -> Result<usize> {
        if lambda.boxes() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: lambda.boxes() });
        }
        if lambda.num_rows() > self.d {
            return Err(Error::TooManyRows { rows: lambda.num_rows(), max: self.d });
        }
        Ok(self.diagrams.iter().position(|l| l == lambda).expect("enumeration is complete"))
    }

    fn check_dim(&self, p: &Spectrum) -> Result<()> {
        if p.dim() != self.d {
            return Err(Error::InvalidSpectrum(format!("expected {} entries, got {}", self.d, p.dim())));
        }
        Ok(())
    }
}

fn dominated_by(mu: &[usize], lambda: &YoungDiagram) -> bool {
    let mut a = 0;
    let mut b = 0;
    for (i, &m) in mu.iter().enumerate() {
        a += m;
        b += lambda.row(i + 1);
        if a > b {
            return false;
        }
    }
    true
}

/// `ln Σ_{distinct permutations m of μ} Π_i p_i^{m_i}`.
fn ln_monomial_symmetric(mu: &[usize], p: &[f64]) -> f64 {
    let mut perm: Vec<usize> = mu.to_vec();
    perm.sort_unstable();
    let mut terms = Vec::new();
    loop {
        let t: f64 = perm.iter().zip(p).map(|(&m, &pi)| xlny(m as f64, pi)).sum();
        if !t.is_nan() {
            terms.push(t);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    log_sum_exp(&terms)
}

/// `Pr(λ|n,p)` for one diagram.
pub fn eyd_probability(lambda: &YoungDiagram, n: usize, p: &Spectrum) -> Result<f64> {
    if lambda.boxes() != n {
        return Err(Error::SizeMismatch { expected: n, got: lambda.boxes() });
    }
    EydModel::new(n, p.dim())?.probability(lambda, p)
}

/// Full outcome distribution over diagrams with at most `p.dim()` rows.
pub fn eyd_distribution(n: usize, p: &Spectrum) -> Result<EydDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    EydModel::new(n, p.dim())?.distribution(p)
}

/// Qubit closed form: probability of total spin `S = two_spin / 2` on `n`
/// copies of a qubit with spectrum `(p, 1 − p)`:
/// `[C(n, n/2+S) − C(n, n/2+S+1)] Σ_{m=n/2−S}^{n/2+S} p^m (1−p)^{n−m}`.
pub fn eyd_qubit(two_spin: usize, n: usize, p: f64) -> Result<f64> {
    if two_spin > n || !(n - two_spin).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("2S = {two_spin} is not a valid total spin for n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidSpectrum(format!("p = {p} outside [0, 1]")));
    }
    let upper = (n + two_spin) / 2;
    let lower = n - upper;
    let dim = BigCount(binomial(n, upper) - binomial(n, upper + 1));
    let terms: Vec<f64> = (lower..=upper).map(|m| xlny(m as f64, p) + xlny((n - m) as f64, 1.0 - p)).filter(|t| !t.is_nan()).collect();
    Ok((dim.ln() + log_sum_exp(&terms)).exp())
}

/// `count` i.i.d. draws from `dist` by inverse CDF over its fixed ordering.
pub fn sample_eyd(dist: &EydDistribution, count: usize, seed: u64) -> Vec<YoungDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cdf = Vec::with_capacity(dist.entries.len());
    let mut acc = 0.0;
    for e in &dist.entries {
        acc += e.prob;
        cdf.push(acc);
    }
    let total = acc;
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(dist.entries.len() - 1);
            dist.entries[idx].lambda.clone()
        })
        .collect()
}

/// Energy of the diagram's eigenspace under `U Σ_{j<k}(1 − s_jk)`:
/// `(U/2) n(n−1) − (U/2) Σ_i λ_i(λ_i − 2i + 1)`. Pass `interaction = 1` for
/// the value in units of `U`.
pub fn trap_energy(lambda: &YoungDiagram, interaction: f64) -> f64 {
    let n = lambda.boxes() as i64;
    let diag: i64 = lambda
        .rows()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let l = l as i64;
            l * (l - 2 * (i as i64 + 1) + 1)
        })
        .sum();
    0.5 * interaction * (n * (n - 1) - diag) as f64
}
