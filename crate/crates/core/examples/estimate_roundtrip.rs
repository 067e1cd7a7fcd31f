//! Simulate shot-noise-limited measurements, fit the spectrum back and
//! compare the reported uncertainty with the actual error. At n = 40 the
//! large-n model is visibly biased; the exact model is not.

use ramsey_spectrum::estimate::{fit_spectrum, simulate_measurements, FitModel, FitOptions, NoiseModel};
use ramsey_spectrum::ramsey::{tau_grid, RamseyParams};
use ramsey_spectrum::Spectrum;

fn main() -> ramsey_spectrum::Result<()> {
    let n = 40;
    let truth = Spectrum::new(vec![0.6, 0.3, 0.1])?;
    let params = RamseyParams::new(n, std::f64::consts::FRAC_PI_2, 0.0, 1.0, tau_grid(0.005, 0.005, 40))?;
    for shots in [50, 200, 1000] {
        let records = simulate_measurements(&params, &truth, shots, 7, NoiseModel::Binomial)?;
        for model in [FitModel::Exact, FitModel::Asymptotic] {
            let fit = fit_spectrum(&records, &params, 3, &FitOptions { model, seed: 7, ..Default::default() })?;
            let err = fit.p_hat.as_slice().iter().zip(truth.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let sigma: Vec<f64> = (0..3).map(|i| fit.covariance[i][i].max(0.0).sqrt()).collect();
            println!(
                "shots {shots:>5} {:>10}: p_hat {:.4?}  sigma {:.4?}  max error {err:.4}  converged {}",
                format!("{model:?}"),
                fit.p_hat.as_slice(),
                sigma,
                fit.converged
            );
        }
    }
    Ok(())
}
