//! `Tr(ρ^{⊗m} exp(iαM))` for `M = Σ_{j<m} (1 − s_{j,m})` by direct
//! diagonalization of `M` on `(C^d)^{⊗m}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::perm::{index_tuple, tuple_index};
use super::DenseState;
use crate::error::{Error, Result};
use crate::numeric::unit_phase;
use crate::spectrum::Spectrum;

/// Largest `d^{n−w}` accepted by the swap-sum oracle.
pub const SWAP_SUM_MAX_DIM: usize = 10_000;

/// Dense matrix of `M = Σ_{j=1}^{m−1} (1 − s_{j,m})` on `(C^d)^{⊗m}`.
pub fn swap_sum_matrix(m: usize, d: usize) -> Result<DMatrix<f64>> {
    let dim = checked_dim(m, d)?;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let t = index_tuple(col, d, m);
        for (row, weight) in swap_sum_column(&t, d) {
            out[(row, col)] += weight;
        }
    }
    Ok(out)
}

// Nonzero entries of M|t⟩: (m−1)|t⟩ − Σ_j |s_{j,last} t⟩.
fn swap_sum_column(t: &[usize], d: usize) -> Vec<(usize, f64)> {
    let m = t.len();
    if m == 0 {
        return Vec::new();
    }
    let last = m - 1;
    let mut out = vec![(tuple_index(t, d), last as f64)];
    for j in 0..last {
        let mut swapped = t.to_vec();
        swapped.swap(j, last);
        out.push((tuple_index(&swapped, d), -1.0));
    }
    out
}

fn checked_dim(m: usize, d: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > SWAP_SUM_MAX_DIM as u128 {
        return Err(Error::SizeLimit { dim: dim.min(usize::MAX as u128) as usize, limit: SWAP_SUM_MAX_DIM });
    }
    Ok(dim as usize)
}

/// Eigenvalues of `M` split by nuclear content. `M` only permutes tensor
/// factors, so it preserves how many sites carry each level; for diagonal
/// `ρ` the trace then reduces to `Σ_c p^c Σ_eig e^{iαε}`.
#[derive(Clone, Debug)]
pub struct SwapSumSpectrum {
    m: usize,
    d: usize,
    sectors: Vec<(Vec<usize>, Vec<f64>)>,
}

impl SwapSumSpectrum {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        let dim = checked_dim(m, d)?;
        let mut by_content: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for index in 0..dim {
            let t = index_tuple(index, d, m);
            let mut content = vec![0; d];
            for &x in &t {
                content[x] += 1;
            }
            by_content.entry(content).or_default().push(index);
        }
        let mut sectors = Vec::with_capacity(by_content.len());
        for (content, states) in by_content {
            let position: std::collections::HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let k = states.len();
            let mut block = DMatrix::<f64>::zeros(k, k);
            for (col, &state) in states.iter().enumerate() {
                for (row, weight) in swap_sum_column(&index_tuple(state, d, m), d) {
                    block[(position[&row], col)] += weight;
                }
            }
            let eig: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
            sectors.push((content, eig));
        }
        Ok(Self { m, d, sectors })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `Tr(ρ^{⊗m} exp(iαM))` for `ρ = diag(p)`.
    pub fn trace(&self, p: &Spectrum, alpha: f64) -> Result<Complex64> {
        if p.dim() != self.d {
            return Err(Error::SizeMismatch { expected: self.d, got: p.dim() });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (content, eigenvalues) in &self.sectors {
            let weight: f64 = content.iter().enumerate().map(|(r, &c)| p[r].powi(c as i32)).product();
            if weight == 0.0 {
                continue;
            }
            let phases: Complex64 = eigenvalues.iter().map(|&e| unit_phase(alpha * e)).sum();
            total += weight * phases;
        }
        Ok(total)
    }
}

/// `Tr(ρ^{⊗n} B_w)` with `ρ = diag(p)`: the `w` excited atoms and every
/// factor outside `B_w` trace out to one, leaving `m = n − w` sites.
pub fn swap_sum_trace_bw(n: usize, w: usize, p: &Spectrum, alpha: f64) -> Result<Complex64> {
    if w >= n {
        return Err(Error::InvalidParameter(format!("w = {w} outside 0..{n}")));
    }
    SwapSumSpectrum::new(n - w, p.dim())?.trace(p, alpha)
}

/// As [`swap_sum_trace_bw`] for an arbitrary single-site state, using the
/// full `d^m × d^m` eigendecomposition of `M` and the dense `ρ^{⊗m}`.
pub fn swap_sum_trace_bw_dense(n: usize, w: usize, rho: &DenseState, alpha: f64) -> Result<Complex64> {
    if w >= n {
        return Err(Error::InvalidParameter(format!("w = {w} outside 0..{n}")));
    }
    let m = n - w;
    let d = rho.dim();
    let dim = checked_dim(m, d)?;
    if dim > 2048 {
        return Err(Error::SizeLimit { dim, limit: 2048 });
    }
    let eig = SymmetricEigen::new(swap_sum_matrix(m, d)?);
    let q = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| unit_phase(alpha * e)));
    let exp_m = &q * phases * q.transpose();
    let rho_m = rho.tensor_power(m);
    Ok((rho_m * exp_m).trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let p = spec(&[0.8, 0.2]);
        assert!((swap_sum_trace_bw(4, 1, &p, 0.0).unwrap() - 1.0).norm() < 1e-13);
        assert!((swap_sum_trace_bw(4, 3, &p, 0.9).unwrap() - 1.0).norm() < 1e-15);
        assert!(swap_sum_trace_bw(4, 4, &p, 0.9).is_err());
        assert!(matches!(swap_sum_trace_bw(12, 0, &spec(&[0.5, 0.3, 0.2]), 0.1), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn two_sites_by_hand() {
        // M = 1 − s: 0 on the symmetric subspace, 2 on the antisymmetric one.
        let p = spec(&[0.7, 0.3]);
        let alpha = 0.4;
        let anti = (1.0 - p.power_trace(2)) / 2.0;
        let want = (1.0 - anti) + anti * unit_phase(2.0 * alpha);
        assert!((swap_sum_trace_bw(2, 0, &p, alpha).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn sector_and_dense_agree() {
        let p = spec(&[0.5, 0.3, 0.2]);
        for (n, w) in [(3, 0), (4, 0), (5, 1), (6, 1)] {
            for alpha in [0.3, 2.2] {
                let a = swap_sum_trace_bw(n, w, &p, alpha).unwrap();
                let b = swap_sum_trace_bw_dense(n, w, &DenseState::from_spectrum(&p), alpha).unwrap();
                let c = swap_sum_trace_bw_dense(n, w, &DenseState::rotated(&p, 17), alpha).unwrap();
                assert!((a - b).norm() < 1e-12 && (a - c).norm() < 1e-12, "n={n} w={w}");
                assert!(a.norm() <= 1.0 + 1e-12);
            }
        }
    }
}
