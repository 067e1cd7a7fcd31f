//! Oracle-equivalence and invariant checks, each reporting its worst error
//! against a fixed bound. Used by the `validate` subcommand and the
//! acceptance tests.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::{fit_observations, simulate_measurements, FitModel, FitOptions, NoiseModel, Observations};
use crate::eyd::{eyd_distribution, trap_energy};
use crate::meanfield::{derive_couplings, meanfield_loss_signal, meanfield_signal, PhysicalParams, SolverOptions};
use crate::oracle::{
    full_hilbert_signal, lindblad_loss_evolve, permutation_trace, permutation_trace_matrix, random_coupling_ensemble, DenseState, PermOp,
    SwapSumSpectrum,
};
use crate::ramsey::{asymptotic_signal, exact_signal, tau_grid, trace_bw, truncated_signal, RamseyParams};
use crate::spectrum::Spectrum;
use crate::young::enumerate_diagrams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// Direction of a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
}

impl Measurement {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, kind: Bound::AtMost }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, kind: Bound::AtLeast }
    }

    pub fn passed(&self) -> bool {
        match self.kind {
            Bound::AtMost => self.value <= self.bound,
            Bound::AtLeast => self.value >= self.bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: u32,
    pub check: String,
    pub status: CheckStatus,
    /// Value of the first measurement, the check's headline error.
    pub max_error: f64,
    pub runtime: f64,
    pub measurements: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// `PASS|FAIL <id> <name> max_error=… runtime=…s`.
    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {:>2} {} max_error={:.3e} runtime={:.2}s", self.id, self.check, self.max_error, self.runtime);
        for m in self.measurements.iter().filter(|m| !m.passed()) {
            let op = if m.kind == Bound::AtMost { "<=" } else { ">=" };
            line.push_str(&format!(" [{}: {:.4e} not {op} {:.4e}]", m.name, m.value, m.bound));
        }
        if let Some(e) = &self.error {
            line.push_str(&format!(" [error: {e}]"));
        }
        line
    }
}

fn run(id: u32, check: &str, f: impl FnOnce() -> Result<Vec<Measurement>>) -> CheckReport {
    let start = Instant::now();
    let outcome = f();
    let runtime = start.elapsed().as_secs_f64();
    match outcome {
        Ok(measurements) => {
            let ok = measurements.iter().all(Measurement::passed);
            CheckReport {
                id,
                check: check.into(),
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                max_error: measurements.first().map_or(f64::NAN, |m| m.value),
                runtime,
                measurements,
                error: None,
            }
        }
        Err(e) => CheckReport {
            id,
            check: check.into(),
            status: CheckStatus::Fail,
            max_error: f64::NAN,
            runtime,
            measurements: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

fn random_spectrum<R: Rng>(d: usize, rng: &mut R) -> Spectrum {
    let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    Spectrum::normalized(raw).expect("positive weights")
}

/// Exact signal against the full-Hilbert-space simulation.
pub fn check_oracle_equivalence(quick: bool) -> CheckReport {
    run(1, "exact_signal vs full-Hilbert oracle", || {
        let sizes: &[(usize, usize)] =
            if quick { &[(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)] } else { &[(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3), (4, 3)] };
        let sets = if quick { 3 } else { 10 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for &(n, d) in sizes {
            for _ in 0..sets {
                let p = random_spectrum(d, &mut rng);
                let beta = rng.random::<f64>() * TAU;
                let delta = rng.random::<f64>() * 4.0 - 2.0;
                let u = 0.2 + rng.random::<f64>() * 2.0;
                let params = RamseyParams::new(n, beta, delta, u, tau_grid(0.0, 0.25, 16))?;
                let a = exact_signal(&params, &p)?;
                let b = full_hilbert_signal(&params, &p, None)?;
                worst = worst.max(a.max_abs_deviation(&b));
            }
        }
        Ok(vec![Measurement::at_most("max |exact − oracle|", worst, 1e-9)])
    })
}

/// `Tr(ρ^{⊗n} B_w)` from the diagram decomposition against the swap-sum exponential.
pub fn check_trace_bw(quick: bool) -> CheckReport {
    run(2, "trace_bw vs swap-sum exponential", || {
        let max_n = if quick { 5 } else { 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for d in 2..=3 {
            let spectra: Vec<(Spectrum, f64)> = (0..5).map(|_| (random_spectrum(d, &mut rng), rng.random::<f64>() * TAU)).collect();
            for m in 1..=max_n {
                let oracle = SwapSumSpectrum::new(m, d)?;
                for n in m..=max_n {
                    let w = n - m;
                    for (p, alpha) in &spectra {
                        let a = trace_bw(n, p, w, *alpha)?;
                        let b = oracle.trace(p, *alpha)?;
                        worst = worst.max((a - b).norm());
                    }
                }
            }
        }
        Ok(vec![Measurement::at_most("max |trace_bw − oracle|", worst, 1e-12)])
    })
}

/// Cycle-product permutation traces against explicit index contraction with
/// a randomly rotated density matrix of the same spectrum.
pub fn check_permutation_traces(quick: bool) -> CheckReport {
    run(3, "permutation trace: cycles vs contraction", || {
        let (count, max_m) = if quick { (20, 5) } else { (100, 7) };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for i in 0..count {
            let m = rng.random_range(1..=max_m);
            let d = rng.random_range(1..=3);
            let p = random_spectrum(d, &mut rng);
            let sigma = PermOp::random(m, &mut rng);
            let rho = DenseState::rotated(&p, 1000 + i as u64);
            let a = permutation_trace(&sigma, &p);
            let b = permutation_trace_matrix(&sigma, rho.matrix())?;
            worst = worst.max((b - a).norm());
        }
        Ok(vec![Measurement::at_most("max |cycle − matrix|", worst, 1e-12)])
    })
}

/// Pulse, integrated mean-field dark evolution and closing pulse against the closed form.
pub fn check_meanfield(quick: bool) -> CheckReport {
    run(4, "mean-field ODE pipeline vs closed form", || {
        let p = Spectrum::new(vec![0.7, 0.2, 0.1])?;
        let sizes: &[usize] = if quick { &[10] } else { &[10, 30] };
        let opts = SolverOptions { force_integrator: true, ..Default::default() };
        let mut worst = 0.0f64;
        for &n in sizes {
            let (beta, u) = (PI / 2.0, 1.0);
            let slowest = u * (n - 1) as f64 * (1.0 - p[0]) * (beta / 2.0).cos().powi(2);
            let span = 2.0 * TAU / slowest;
            let params = RamseyParams::new(n, beta, 0.0, u, tau_grid(0.0, span / 100.0, 101))?;
            let ode = meanfield_signal(&params, &p, &opts)?;
            let closed = asymptotic_signal(&params, &p)?;
            worst = worst.max(ode.max_abs_deviation(&closed));
        }
        Ok(vec![Measurement::at_most("max |ODE − closed form|", worst, 1e-8)])
    })
}

/// `D(n) = max_τ |exact − asymptotic|` on a grid of fixed `nUτ`.
pub fn asymptotic_deviation(n: usize) -> Result<f64> {
    let p = Spectrum::new(vec![0.8, 0.2])?;
    let taus: Vec<f64> = (0..=200).map(|i| 5.0 * i as f64 / 200.0 / n as f64).collect();
    let params = RamseyParams::new(n, PI / 2.0, 0.0, 1.0, taus)?;
    Ok(exact_signal(&params, &p)?.max_abs_deviation(&asymptotic_signal(&params, &p)?))
}

pub fn check_asymptotic_convergence() -> CheckReport {
    run(5, "asymptotic convergence D(40)/D(10)", || {
        let d10 = asymptotic_deviation(10)?;
        let d40 = asymptotic_deviation(40)?;
        Ok(vec![Measurement::at_most("D(40)/D(10)", d40 / d10, 0.8)])
    })
}

pub fn check_energy_degeneracy() -> CheckReport {
    run(6, "n=6, d=3 diagrams and energies", || {
        let diagrams = enumerate_diagrams(6, 3);
        let mut energies: Vec<f64> = diagrams.iter().map(|l| trap_energy(l, 1.0)).collect();
        let e411 = trap_energy(&crate::young::YoungDiagram::new(vec![4, 1, 1])?, 1.0);
        let e33 = trap_energy(&crate::young::YoungDiagram::new(vec![3, 3])?, 1.0);
        energies.sort_by(f64::total_cmp);
        let want = [0.0, 6.0, 10.0, 12.0, 12.0, 15.0, 18.0];
        let err =
            if energies.len() == want.len() { energies.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) } else { f64::INFINITY };
        let mut distinct = energies.clone();
        distinct.dedup();
        Ok(vec![
            Measurement::at_most("max |E/U − table|", err, 0.0),
            Measurement::at_most("|#diagrams − 7|", (diagrams.len() as f64 - 7.0).abs(), 0.0),
            Measurement::at_most("|#distinct energies − 6|", (distinct.len() as f64 - 6.0).abs(), 0.0),
            Measurement::at_most("|E(4,1,1) − E(3,3)|", (e411 - e33).abs(), 0.0),
        ])
    })
}

pub fn check_eyd(quick: bool) -> CheckReport {
    run(7, "EYD normalization and concentration", || {
        let max_n = if quick { 10 } else { 30 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for d in 1..=3 {
            for n in 1..=max_n {
                for _ in 0..3 {
                    let p = random_spectrum(d, &mut rng);
                    worst = worst.max((eyd_distribution(n, &p)?.total() - 1.0).abs());
                }
            }
        }
        let dist = eyd_distribution(300, &Spectrum::new(vec![0.8, 0.2])?)?;
        let mode = &dist.mode().lambda;
        let estimate = mode.row(1) as f64 / 300.0;
        Ok(vec![
            Measurement::at_most("max |Σ Pr − 1|", worst, 1e-10),
            Measurement::at_most("|mode estimate − 0.8| (n=300)", (estimate - 0.8).abs(), 0.03),
        ])
    })
}

pub fn check_shot_variance() -> CheckReport {
    run(8, "binomial shot variance vs n(s − s²)", || {
        let n = 30;
        let p = Spectrum::new(vec![0.7, 0.2, 0.1])?;
        let params = RamseyParams::new(n, PI / 2.0, 0.0, 1.0, vec![0.02, 0.05, 0.1, 0.2, 0.3])?;
        let curve = exact_signal(&params, &p)?;
        let records = simulate_measurements(&params, &p, 10_000, 8, NoiseModel::Binomial)?;
        let mut worst = 0.0f64;
        for (r, &s) in records.iter().zip(&curve.values) {
            let want = n as f64 * (s - s * s);
            worst = worst.max((r.variance() / want - 1.0).abs());
        }
        Ok(vec![Measurement::at_most("max relative variance error", worst, 0.05)])
    })
}

/// Simulated records fitted back with the exact model.
pub fn check_round_trip() -> CheckReport {
    run(9, "round-trip estimation n=30, d=3", || {
        let truth = Spectrum::new(vec![0.7, 0.2, 0.1])?;
        let n = 30;
        let slowest = (n - 1) as f64 * (1.0 - truth[0]) * 0.5;
        let span = 2.0 * TAU / slowest;
        let params = RamseyParams::new(n, PI / 2.0, 0.0, 1.0, tau_grid(span / 40.0, span / 40.0, 40))?;
        let opts = FitOptions { model: FitModel::Exact, seed: 9, ..Default::default() };

        let records = simulate_measurements(&params, &truth, 100, 9, NoiseModel::Binomial)?;
        let noisy = crate::estimate::fit_spectrum(&records, &params, 3, &opts)?;
        let noisy_err = (0..3).map(|i| (noisy.p_hat[i] - truth[i]).abs()).fold(0.0, f64::max);

        let clean = fit_observations(&Observations::from_curve(&exact_signal(&params, &truth)?, 100), &params, 3, &opts)?;
        let clean_err = (0..3).map(|i| (clean.p_hat[i] - truth[i]).abs()).fold(0.0, f64::max);
        Ok(vec![Measurement::at_most("max |p̂ − p| noisy", noisy_err, 0.05), Measurement::at_most("max |p̂ − p| noiseless", clean_err, 1e-6)])
    })
}

/// Truncated against exact evaluation: accuracy, retained mass and speed.
pub fn check_truncation() -> CheckReport {
    run(10, "truncated vs exact signal n=30, d=3", || {
        let p = Spectrum::new(vec![0.7, 0.2, 0.1])?;
        let params = RamseyParams::new(30, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 2e-3, 200))?;
        let mut exact_time = f64::INFINITY;
        let mut trunc_time = f64::INFINITY;
        let mut exact = None;
        let mut trunc = None;
        for _ in 0..3 {
            let t = Instant::now();
            exact = Some(exact_signal(&params, &p)?);
            exact_time = exact_time.min(t.elapsed().as_secs_f64());
            let t = Instant::now();
            trunc = Some(truncated_signal(&params, &p, 5.0)?);
            trunc_time = trunc_time.min(t.elapsed().as_secs_f64());
        }
        let (exact, trunc) = (exact.expect("ran"), trunc.expect("ran"));
        let mass = trunc.retained_mass.map_or(0.0, |m| m.eyd);
        Ok(vec![
            Measurement::at_most("max |truncated − exact|", trunc.max_abs_deviation(&exact), 1e-3),
            Measurement::at_least("retained EYD mass", mass, 0.999),
            Measurement::at_most("truncated/exact wall-clock", trunc_time / exact_time, 1.0 - 1e-9),
        ])
    })
}

/// Loss and coupling-disorder limits of the oracles and the mean-field loss model.
pub fn check_loss_limits() -> CheckReport {
    run(11, "loss and imperfection limits", || {
        let p = Spectrum::new(vec![2.0 / 3.0, 1.0 / 3.0])?;
        let params = RamseyParams::new(4, PI / 4.0, 0.0, 1.0, tau_grid(0.0, 0.1, 31))?;
        let lossless = full_hilbert_signal(&params, &p, None)?;
        let lindblad0 = lindblad_loss_evolve(&params, &p, 0.0)?;
        let zero_err = lindblad0.iter().zip(&lossless.values).map(|(a, b)| (a.normalized() - b).abs()).fold(0.0, f64::max);
        let lossy = lindblad_loss_evolve(&params, &p, 0.5)?;
        let shift = lossy.iter().zip(&lossless.values).map(|(a, b)| (a.normalized() - b).abs()).fold(0.0, f64::max);

        let ensemble = random_coupling_ensemble(&params, &p, 0.0, 3, 11)?;
        let disorder_err = ensemble.curves.iter().flat_map(|c| c.iter().zip(&lossless.values).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);

        let mf_params = RamseyParams::new(100, PI / 20.0, 0.0, 1.0, tau_grid(0.0, 5e-4, 101))?;
        let mf = meanfield_loss_signal(&mf_params, &Spectrum::new(vec![0.8, 0.2])?, 0.5, &SolverOptions::default())?;
        let increase = mf.windows(2).map(|w| w[1].total - w[0].total).fold(f64::NEG_INFINITY, f64::max);
        Ok(vec![
            Measurement::at_most("max |Lindblad(Γ=0) − unitary|", zero_err, 1e-9),
            Measurement::at_most("max |dU=0 ensemble − uniform|", disorder_err, 0.0),
            Measurement::at_least("max |Lindblad(Γ=0.5U) − unitary|", shift, 1e-8),
            Measurement::at_most("largest mean-field trace increase", increase.max(0.0), 0.0),
        ])
    })
}

/// Derived g–g coupling for `a_gg = 5.1 nm`, `ω⊥ = 2π·10 kHz`, `L = 10 μm`
/// against the quoted `2π·10 Hz`.
pub fn check_physical_constants() -> CheckReport {
    run(12, "physical coupling U ≈ 2π·10 Hz", || {
        let c = derive_couplings(&PhysicalParams::default())?;
        let target = TAU * 10.0;
        Ok(vec![Measurement::at_most("|U/(2π·10 Hz) − 1|", (c.u_gg / target - 1.0).abs(), 0.05)])
    })
}

/// Every check in order. `quick` shrinks sizes and skips the slow ones (5, 9, 10, 11).
pub fn run_all(quick: bool) -> Vec<CheckReport> {
    let mut out = vec![check_oracle_equivalence(quick), check_trace_bw(quick), check_permutation_traces(quick), check_meanfield(quick)];
    if !quick {
        out.push(check_asymptotic_convergence());
    }
    out.push(check_energy_degeneracy());
    out.push(check_eyd(quick));
    out.push(check_shot_variance());
    if !quick {
        out.push(check_round_trip());
        out.push(check_truncation());
        out.push(check_loss_limits());
    }
    out.push(check_physical_constants());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_that_should_pass() {
        for report in [check_energy_degeneracy(), check_permutation_traces(true), check_meanfield(true)] {
            assert!(report.passed(), "{}", report.summary_line());
        }
    }

    #[test]
    fn bounds_and_lines() {
        assert!(Measurement::at_most("x", 1.0, 1.0).passed());
        assert!(!Measurement::at_least("x", 0.5, 1.0).passed());
        let r = run(99, "broken", || Err(crate::error::Error::Solver("boom".into())));
        assert!(!r.passed());
        assert!(r.summary_line().starts_with("FAIL 99 broken"));
    }
}
