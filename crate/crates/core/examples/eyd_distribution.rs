//! Diagram distribution for a qutrit spectrum, its concentration and the
//! spectrum estimate read off a sampled diagram.

use ramsey_spectrum::estimate::estimate_from_eyd_sample;
use ramsey_spectrum::eyd::{eyd_distribution, sample_eyd, trap_energy};
use ramsey_spectrum::Spectrum;

fn main() -> ramsey_spectrum::Result<()> {
    let p = Spectrum::new(vec![0.6, 0.3, 0.1])?;
    for n in [6, 30, 120] {
        let dist = eyd_distribution(n, &p)?;
        let mode = dist.mode();
        let mean_energy: f64 = dist.entries.iter().map(|e| e.prob * trap_energy(&e.lambda, 1.0)).sum();
        println!(
            "n = {n:>3}: {} diagrams, total {:.12}, mode {} (prob {:.4}), mean E/U {mean_energy:.3}",
            dist.entries.len(),
            dist.total(),
            mode.lambda,
            mode.prob
        );
    }

    let n = 120;
    let dist = eyd_distribution(n, &p)?;
    println!("samples at n = {n}:");
    for lambda in sample_eyd(&dist, 5, 11) {
        let est = estimate_from_eyd_sample(&lambda, n, 3)?;
        println!("  {lambda:>14} -> p_hat = {:.3?}", est.as_slice());
    }
    Ok(())
}
