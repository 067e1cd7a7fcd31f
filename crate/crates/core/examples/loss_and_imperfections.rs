//! Two-body loss and coupling disorder.
//!
//! Small systems go through the Lindblad and full-Hilbert oracles; the
//! large-n loss study uses the homogeneous mean-field loss equations and
//! reads the loss-induced bias off by inverting the lossless closed form.

use std::f64::consts::PI;

use ramsey_spectrum::meanfield::{meanfield_loss_signal, SolverOptions};
use ramsey_spectrum::oracle::{full_hilbert_signal, lindblad_loss_evolve, random_coupling_ensemble};
use ramsey_spectrum::ramsey::{asymptotic_value, tau_grid, RamseyParams};
use ramsey_spectrum::Spectrum;

fn invert_lossless(params: &RamseyParams, tau: f64, target: f64) -> f64 {
    // Scan the larger eigenvalue over [1/2, 1] for the closest lossless value.
    (0..=20000)
        .map(|i| 0.5 + 0.5 * i as f64 / 20000.0)
        .min_by(|a, b| {
            let fa = (asymptotic_value(params, &[*a, 1.0 - a], tau) - target).abs();
            let fb = (asymptotic_value(params, &[*b, 1.0 - b], tau) - target).abs();
            fa.total_cmp(&fb)
        })
        .unwrap()
}

fn main() -> ramsey_spectrum::Result<()> {
    let params = RamseyParams::new(4, PI / 4.0, 0.0, 1.0, tau_grid(0.0, 0.25, 13))?;
    println!("n = 4, beta = pi/4, Gamma/U = 0.5: normalized signal with and without loss");
    println!("{:>6} {:>10} {:>10} {:>10}", "U tau", "lossless", "lossy", "in trap");
    for p in [[0.8, 0.2], [0.75, 0.25], [2.0 / 3.0, 1.0 / 3.0]] {
        let spectrum = Spectrum::new(p.to_vec())?;
        let clean = full_hilbert_signal(&params, &spectrum, None)?;
        let lossy = lindblad_loss_evolve(&params, &spectrum, 0.5)?;
        println!("p = {:.4}", p[0]);
        for ((pt, c), tau) in lossy.iter().zip(&clean.values).zip(&params.taus).step_by(3) {
            println!("{tau:>6.2} {c:>10.6} {:>10.6} {:>10.6}", pt.normalized(), pt.n_in);
        }
    }

    let ens = random_coupling_ensemble(&params, &Spectrum::new(vec![0.75, 0.25])?, 0.12, 200, 1)?;
    let worst_std = ens.std.iter().cloned().fold(0.0, f64::max);
    println!("\ndU/U = 0.12 over 200 coupling draws: largest curve std {worst_std:.3e}");

    println!("\nn = 100, beta = pi/20, Gamma/U = 0.5, t = 0.05/U: bias of the lossless inversion");
    let n = 100;
    let t = 0.05;
    let mf = RamseyParams::new(n, PI / 20.0, 0.0, 1.0, vec![t])?;
    for q in [0.5, 0.48, 0.45, 0.4, 0.3, 0.2] {
        let s = Spectrum::new(vec![1.0 - q, q])?;
        let lossy = meanfield_loss_signal(&mf, &s, 0.5, &SolverOptions::default())?[0].normalized();
        let inferred = 1.0 - invert_lossless(&mf, t, lossy);
        println!("smaller eigenvalue {q:.2}: inferred {inferred:.4}, shift {:+.4}", inferred - q);
    }
    Ok(())
}
