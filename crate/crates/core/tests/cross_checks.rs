//! Closed forms against dense linear algebra on small spaces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use ramsey_spectrum::eyd::{eyd_probability, trap_energy};
use ramsey_spectrum::oracle::{character_projector, permutation_matrix, DenseState, PermOp};
use ramsey_spectrum::young::{dimension_sn, enumerate_diagrams};
use ramsey_spectrum::Spectrum;

fn spectra(d: usize) -> Vec<Spectrum> {
    match d {
        1 => vec![Spectrum::pure(1)],
        2 => vec![Spectrum::new(vec![0.8, 0.2]).unwrap(), Spectrum::new(vec![0.5, 0.5]).unwrap()],
        _ => vec![Spectrum::new(vec![0.6, 0.3, 0.1]).unwrap(), Spectrum::uniform(3)],
    }
}

#[test]
fn eyd_probability_matches_projector_trace() {
    for d in 1..=3 {
        for n in 1..=4 {
            for p in spectra(d) {
                for (seed, rho) in [(0, DenseState::from_spectrum(&p)), (1, DenseState::rotated(&p, 40 + n as u64))] {
                    let rho_n = rho.tensor_power(n);
                    for lambda in enumerate_diagrams(n, d) {
                        let proj = character_projector(&lambda, d).unwrap().map(|x| Complex64::new(x, 0.0));
                        let oracle = (proj * &rho_n).trace().re;
                        let formula = eyd_probability(&lambda, n, &p).unwrap();
                        assert!((oracle - formula).abs() < 1e-12, "n={n} d={d} {lambda:?} seed={seed}: {oracle} vs {formula}");
                    }
                }
            }
        }
    }
}

#[test]
fn trap_energy_matches_swap_hamiltonian() {
    // E(λ) is the eigenvalue of Σ_{j<k}(1 − s_jk) on the λ isotypic block.
    for n in 2..=5 {
        let d: usize = n.min(3);
        let dim = d.pow(n as u32);
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..n {
            for k in j + 1..n {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(j, k);
                h += DMatrix::identity(dim, dim) - permutation_matrix(&PermOp::new(perm).unwrap(), d);
            }
        }
        for lambda in enumerate_diagrams(n, d) {
            let proj = character_projector(&lambda, d).unwrap();
            let rank = proj.trace().round();
            let e = (&proj * &h * &proj).trace() / rank;
            let residual = (&h * &proj - &proj * e).norm();
            assert!(residual < 1e-9, "{lambda:?} is not an eigenspace");
            assert!((e - trap_energy(&lambda, 1.0)).abs() < 1e-9, "{lambda:?}: {e}");
            assert!(dimension_sn(&lambda, d).unwrap().to_f64() <= rank + 0.5);
        }
    }
}
