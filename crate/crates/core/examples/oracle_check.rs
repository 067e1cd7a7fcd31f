//! The exact signal against a brute-force evolution of the full many-atom
//! state, for a random rotated state and for a non-uniform coupling matrix.

use std::f64::consts::PI;

use ramsey_spectrum::oracle::{coupling_matrix, full_hilbert_signal, full_hilbert_signal_state, random_couplings, DenseState};
use ramsey_spectrum::ramsey::{exact_signal, tau_grid, RamseyParams};
use ramsey_spectrum::Spectrum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ramsey_spectrum::Result<()> {
    let p = Spectrum::new(vec![0.6, 0.3, 0.1])?;
    for n in 2..=4 {
        let params = RamseyParams::new(n, PI / 3.0, 0.4, 1.0, tau_grid(0.0, 0.1, 80))?;
        let exact = exact_signal(&params, &p)?;
        let oracle = full_hilbert_signal(&params, &p, None)?;
        let rotated = full_hilbert_signal_state(&params, &DenseState::rotated(&p, n as u64), None)?;
        println!("n = {n}: max |exact - oracle| = {:.2e}, rotated state {:.2e}", exact.max_abs_deviation(&oracle), exact.max_abs_deviation(&rotated));
    }

    // Uneven couplings break the symmetric-group structure, and the exact
    // formula no longer applies.
    let params = RamseyParams::new(4, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.1, 80))?;
    let exact = exact_signal(&params, &p)?;
    let uniform = coupling_matrix(4, 1.0, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let uneven = random_couplings(4, 1.0, 0.2, &mut rng);
    let a = full_hilbert_signal(&params, &p, Some(&uniform))?;
    let b = full_hilbert_signal(&params, &p, Some(&uneven))?;
    println!("uniform couplings: {:.2e}, 20% spread: {:.2e}", exact.max_abs_deviation(&a), exact.max_abs_deviation(&b));
    Ok(())
}
