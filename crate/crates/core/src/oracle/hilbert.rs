//! Ramsey sequence simulated on the full `(2d)^n` Hilbert space.
//!
//! `H_D = Σ_{j<k} U_jk σ_gg^j σ_gg^k (1 − s_jk) − δ Σ_k σ_ee^k` never changes
//! which atoms are excited, so it is block diagonal over electronic
//! configurations. Each block is a real-symmetric matrix on the nuclear
//! space `(C^d)^{⊗n}` and is diagonalized once. The pulses are products of
//! single-atom rotations and act site by site.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::perm::{index_tuple, tuple_index};
use super::DenseState;
use crate::error::{Error, Result};
use crate::numeric::unit_phase;
use crate::ramsey::{RamseyParams, SignalCurve, SignalMethod};
use crate::spectrum::Spectrum;

/// Largest `(2d)^n` accepted by [`full_hilbert_signal`].
pub const FULL_HILBERT_MAX_DIM: usize = 5000;

/// Per-pair couplings: `given` if present (validated), otherwise `U` everywhere.
pub fn coupling_matrix(n: usize, interaction: f64, given: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let Some(u) = given else {
        return Ok(DMatrix::from_element(n, n, interaction));
    };
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::SizeMismatch { expected: n, got: u.nrows().max(u.ncols()) });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("coupling matrix has non-finite entries".into()));
    }
    for j in 0..n {
        for k in j + 1..n {
            if (u[(j, k)] - u[(k, j)]).abs() > 1e-12 * (1.0 + u[(j, k)].abs()) {
                return Err(Error::InvalidParameter(format!("coupling matrix not symmetric at ({j}, {k})")));
            }
        }
    }
    Ok(u.clone())
}

// Nuclear-space block of H_D for electronic configuration `config` (bit k set: atom k excited).
fn dark_block(config: usize, u: &DMatrix<f64>, delta: f64, n: usize, d: usize) -> DMatrix<f64> {
    let dim = d.pow(n as u32);
    let ground: Vec<usize> = (0..n).filter(|k| config >> k & 1 == 0).collect();
    let excited = (n - ground.len()) as f64;
    let mut h = DMatrix::from_diagonal_element(dim, dim, -delta * excited);
    for col in 0..dim {
        let t = index_tuple(col, d, n);
        for (a, &j) in ground.iter().enumerate() {
            for &k in &ground[a + 1..] {
                let mut swapped = t.clone();
                swapped.swap(j, k);
                h[(col, col)] += u[(j, k)];
                h[(tuple_index(&swapped, d), col)] -= u[(j, k)];
            }
        }
    }
    h
}

/// `⟨n_e⟩/n` after `W† V W` acting on `|G⟩⟨G| ⊗ diag(p)^{⊗n}`.
pub fn full_hilbert_signal(params: &RamseyParams, p: &Spectrum, couplings: Option<&DMatrix<f64>>) -> Result<SignalCurve> {
    full_hilbert_signal_state(params, &DenseState::from_spectrum(p), couplings)
}

/// As [`full_hilbert_signal`] for an arbitrary single-atom nuclear state.
pub fn full_hilbert_signal_state(params: &RamseyParams, rho: &DenseState, couplings: Option<&DMatrix<f64>>) -> Result<SignalCurve> {
    params.validate()?;
    let n = params.n;
    let d = rho.dim();
    let full = (2 * d).checked_pow(n as u32).unwrap_or(usize::MAX);
    if full > FULL_HILBERT_MAX_DIM {
        return Err(Error::SizeLimit { dim: full, limit: FULL_HILBERT_MAX_DIM });
    }
    let u = coupling_matrix(n, params.interaction, couplings)?;
    let nuclear = d.pow(n as u32);
    let configs = 1usize << n;
    let blocks: Vec<SymmetricEigen<f64, nalgebra::Dyn>> = (0..configs).map(|e| SymmetricEigen::new(dark_block(e, &u, params.delta, n, d))).collect();
    let q_complex: Vec<DMatrix<Complex64>> = blocks.iter().map(|b| b.eigenvectors.map(|x| Complex64::new(x, 0.0))).collect();

    let c = (params.beta / 2.0).cos();
    let s = (params.beta / 2.0).sin();
    let amplitude: Vec<Complex64> = (0..configs)
        .map(|e| (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * if e >> k & 1 == 0 { Complex64::new(c, 0.0) } else { Complex64::new(0.0, -s) }))
        .collect();

    let (weights, vectors) = rho.eigen();
    let mut ne = vec![0.0; params.taus.len()];
    let mut r = vec![0usize; n];
    loop {
        let weight: f64 = r.iter().map(|&i| weights[i]).product();
        if weight > 0.0 {
            let phi = product_vector(&vectors, &r);
            let projected: Vec<DVector<Complex64>> = q_complex.iter().map(|q| q.tr_mul(&phi)).collect();
            for (slot, &tau) in ne.iter_mut().zip(&params.taus) {
                let mut psi: Vec<DVector<Complex64>> = (0..configs)
                    .map(|e| {
                        if amplitude[e] == Complex64::new(0.0, 0.0) {
                            return DVector::zeros(nuclear);
                        }
                        let rotated = DVector::from_iterator(
                            nuclear,
                            projected[e].iter().zip(blocks[e].eigenvalues.iter()).map(|(y, eps)| y * unit_phase(-eps * tau)),
                        );
                        &q_complex[e] * rotated * amplitude[e]
                    })
                    .collect();
                close_pulse(&mut psi, n, c, s);
                let excited: f64 = psi.iter().enumerate().map(|(e, v)| e.count_ones() as f64 * v.norm_squared()).sum();
                *slot += weight * excited;
            }
        }
        if !super::perm::next_index(&mut r, d) {
            break;
        }
    }
    let values = ne.into_iter().map(|x| x / n as f64).collect();
    Ok(SignalCurve { params: params.clone(), values, method: SignalMethod::Oracle, retained_mass: None })
}

fn product_vector(vectors: &DMatrix<Complex64>, r: &[usize]) -> DVector<Complex64> {
    let mut out = DVector::from_element(1, Complex64::new(1.0, 0.0));
    for &i in r {
        out = out.kronecker(&vectors.column(i).into_owned());
    }
    out
}

// W† = Π_k (c + i s σ_x^k).
fn close_pulse(psi: &mut [DVector<Complex64>], n: usize, c: f64, s: f64) {
    let is = Complex64::new(0.0, s);
    for k in 0..n {
        for e in 0..psi.len() {
            if e >> k & 1 == 1 {
                continue;
            }
            let f = e | 1 << k;
            let g = psi[e].clone();
            let x = psi[f].clone();
            psi[e] = &g * Complex64::new(c, 0.0) + &x * is;
            psi[f] = &g * is + &x * Complex64::new(c, 0.0);
        }
    }
}

/// Symmetric couplings with off-diagonal entries uniform on `[U − dU/2, U + dU/2]`.
pub fn random_couplings<R: Rng + ?Sized>(n: usize, interaction: f64, spread: f64, rng: &mut R) -> DMatrix<f64> {
    let mut u = DMatrix::from_element(n, n, interaction);
    for j in 0..n {
        for k in j + 1..n {
            let x: f64 = rng.random();
            let v = interaction + spread * (x - 0.5);
            u[(j, k)] = v;
            u[(k, j)] = v;
        }
    }
    u
}

/// Signal curves over random coupling realizations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingEnsemble {
    pub params: RamseyParams,
    pub p: Spectrum,
    pub du_over_u: f64,
    pub seed: u64,
    pub curves: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// [`full_hilbert_signal`] averaged over `realizations` draws of
/// [`random_couplings`] with `dU = du_over_u · |U|`.
pub fn random_coupling_ensemble(params: &RamseyParams, p: &Spectrum, du_over_u: f64, realizations: usize, seed: u64) -> Result<CouplingEnsemble> {
    if !(du_over_u >= 0.0 && du_over_u.is_finite()) || realizations == 0 {
        return Err(Error::InvalidParameter("need du_over_u ≥ 0 and at least one realization".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = du_over_u * params.interaction.abs();
    let mut curves = Vec::with_capacity(realizations);
    for _ in 0..realizations {
        let u = random_couplings(params.n, params.interaction, spread, &mut rng);
        curves.push(full_hilbert_signal(params, p, Some(&u))?.values);
    }
    let count = curves.len() as f64;
    let len = params.taus.len();
    let mean: Vec<f64> = (0..len).map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / count).collect();
    let std = (0..len)
        .map(|i| {
            let var = curves.iter().map(|c| (c[i] - mean[i]).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
            var.sqrt()
        })
        .collect();
    Ok(CouplingEnsemble { params: params.clone(), p: p.clone(), du_over_u, seed, curves, mean, std })
}
