//! Small-system ground truth by dense linear algebra, independent of the
//! representation-theoretic formulas.

mod hilbert;
mod lindblad;
mod perm;
mod swap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

pub use hilbert::{
    coupling_matrix, full_hilbert_signal, full_hilbert_signal_state, random_coupling_ensemble, random_couplings, CouplingEnsemble,
    FULL_HILBERT_MAX_DIM,
};
pub use lindblad::{lindblad_loss_evolve, lindblad_loss_evolve_state, LindbladOptions, LossPoint, LINDBLAD_MAX_ATOMS};
pub use perm::{
    character_projector, permutation_matrix, permutation_trace, permutation_trace_matrix, sn_character, PermOp, MATRIX_TRACE_MAX_D,
    MATRIX_TRACE_MAX_M, PROJECTOR_MAX_DIM,
};
pub use swap::{swap_sum_matrix, swap_sum_trace_bw, swap_sum_trace_bw_dense, SwapSumSpectrum, SWAP_SUM_MAX_DIM};

/// A density matrix on one site's nuclear space (or on a tensor power of it).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    matrix: DMatrix<Complex64>,
}

impl DenseState {
    /// Validates Hermiticity (1e-10), trace ≤ 1 + 1e-10 and positivity (−1e-8).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("density matrix must be square and nonempty".into()));
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
        }
        let trace = matrix.trace().re;
        if trace > 1.0 + 1e-10 {
            return Err(Error::InvalidParameter(format!("trace {trace} exceeds 1")));
        }
        let min = SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            return Err(Error::InvalidParameter(format!("density matrix has eigenvalue {min}")));
        }
        Ok(Self { matrix })
    }

    /// `diag(p)`.
    pub fn from_spectrum(p: &Spectrum) -> Self {
        let d = p.dim();
        let matrix = DMatrix::from_fn(d, d, |i, j| Complex64::new(if i == j { p[i] } else { 0.0 }, 0.0));
        Self { matrix }
    }

    /// `V diag(p) V†` for a unitary `V` drawn from `seed`.
    pub fn rotated(p: &Spectrum, seed: u64) -> Self {
        let d = p.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
        let v = g.qr().q();
        let matrix = &v * Self::from_spectrum(p).matrix * v.adjoint();
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `ρ^{⊗m}` as a dense `d^m × d^m` matrix, first factor most significant.
    pub fn tensor_power(&self, m: usize) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for _ in 0..m {
            out = out.kronecker(&self.matrix);
        }
        out
    }

    /// Eigenvalues (clamped at zero) and orthonormal eigenvectors as columns.
    pub(crate) fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        (eig.eigenvalues.iter().map(|x| x.max(0.0)).collect(), eig.eigenvectors)
    }
}
