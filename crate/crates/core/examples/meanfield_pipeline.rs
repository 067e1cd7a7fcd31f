//! Single-atom mean-field pipeline step by step: pulse, dark evolution with
//! general couplings, measurement.

use std::f64::consts::PI;

use ramsey_spectrum::meanfield::{apply_pulse, dark_evolution, measure_ne, Couplings, SingleAtomState, SolverOptions};
use ramsey_spectrum::Spectrum;

fn main() -> ramsey_spectrum::Result<()> {
    let p = Spectrum::new(vec![0.5, 0.3, 0.2])?;
    let beta = PI / 3.0;
    let n = 50;
    let opts = SolverOptions::default();
    let ready = apply_pulse(&SingleAtomState::ground(&p), beta);
    println!("after the pulse: rho_ee = {:.4?}", (0..3).map(|m| ready.ee(m)).collect::<Vec<_>>());

    let cases = [
        ("g-g contact", Couplings::contact(1.0)),
        ("all direct", Couplings { u_gg: 1.0, u_ee: 0.6, v: 0.8, v_ex: 0.0 }),
        ("with exchange", Couplings { u_gg: 1.0, u_ee: 0.6, v: 0.8, v_ex: 0.2 }),
    ];
    println!("{:>14} {:>6} {:>10} {:>10} {:>22}", "couplings", "U tau", "<n_e>/n", "trace", "rho_gg");
    for (name, c) in cases {
        for tau in [0.02, 0.05, 0.1] {
            let dark = dark_evolution(&ready, &c, 0.0, n, tau, &opts)?;
            let gg: Vec<f64> = (0..3).map(|m| dark.gg(m)).collect();
            println!("{name:>14} {tau:>6.2} {:>10.6} {:>10.6} {:>22}", measure_ne(&dark, beta, true), dark.trace(), format!("{gg:.4?}"));
        }
    }
    Ok(())
}
