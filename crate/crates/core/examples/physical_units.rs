//! Couplings from scattering lengths and trap geometry, and the time scales
//! they set for a Ramsey sequence.

use std::f64::consts::TAU;

use ramsey_spectrum::meanfield::{derive_couplings, PhysicalParams};

fn main() -> ramsey_spectrum::Result<()> {
    let base = PhysicalParams::default();
    let c = derive_couplings(&base)?;
    println!("default trap: U_gg = {:.3} rad/s = 2pi x {:.2} Hz", c.u_gg, c.u_gg / TAU);
    for n in [10, 100, 1000] {
        println!("  n = {n:>4}: collapse time 1/(nU) = {:.3e} s", 1.0 / (n as f64 * c.u_gg));
    }

    let tube = PhysicalParams { length: 2.0 * base.length, ..base };
    println!("doubled tube length: U_gg = {:.3} rad/s", derive_couplings(&tube)?.u_gg);

    let mixed = PhysicalParams { a_ee: 6.0e-9, a_eg_plus: 8.0e-9, a_eg_minus: 4.0e-9, ..base };
    let m = derive_couplings(&mixed)?;
    println!("U_ee = {:.3}, V = {:.3}, V_ex = {:.3} rad/s", m.u_ee, m.v, m.v_ex);
    Ok(())
}
