//! Ramsey signal by every route for one configuration: exact sum, truncated
//! sum, large-n closed form and the mean-field equations.

use std::f64::consts::PI;

use ramsey_spectrum::meanfield::{meanfield_signal, SolverOptions};
use ramsey_spectrum::ramsey::{asymptotic_signal, exact_signal, tau_grid, truncated_signal, RamseyParams};
use ramsey_spectrum::Spectrum;

fn main() -> ramsey_spectrum::Result<()> {
    let n = 60;
    let params = RamseyParams::new(n, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.001, 201))?;
    let p = Spectrum::new(vec![0.7, 0.2, 0.1])?;
    let exact = exact_signal(&params, &p)?;
    let truncated = truncated_signal(&params, &p, 5.0)?;
    let asymptotic = asymptotic_signal(&params, &p)?;
    let meanfield = meanfield_signal(&params, &p, &SolverOptions::default())?;

    println!("n = {n}, p = {:?}", p.as_slice());
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "nU tau", "exact", "truncated", "large-n", "mean-field");
    for i in (0..params.taus.len()).step_by(20) {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            n as f64 * params.taus[i],
            exact.values[i],
            truncated.values[i],
            asymptotic.values[i],
            meanfield.values[i]
        );
    }
    if let Some(kept) = truncated.retained_mass {
        println!("truncation kept {:.3e} of the diagram mass and {:.3e} of the binomial mass", kept.eyd, kept.binomial);
    }
    println!("max |exact - truncated|  = {:.2e}", exact.max_abs_deviation(&truncated));
    println!("max |exact - large-n|    = {:.2e}", exact.max_abs_deviation(&asymptotic));
    println!("max |large-n - meanfield| = {:.2e}", asymptotic.max_abs_deviation(&meanfield));
    Ok(())
}
