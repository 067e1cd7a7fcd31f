//! Mean-field single-atom dynamics for the Ramsey sequence, with optional
//! two-body e–e loss.
//!
//! The state is one atom's `2d × 2d` density matrix, indexed by
//! `(electronic μ ∈ {g, e}, nuclear m)` as `μ·d + m`. Starting from a state
//! diagonal in the nuclear index, only `ρ_gg^{mm}`, `ρ_ee^{mm}` and
//! `ρ_ge^{mm}` evolve, so the dark-time integration runs on `3d` numbers.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::LossPoint;
use crate::ramsey::{RamseyParams, SignalCurve, SignalMethod};
use crate::spectrum::Spectrum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// One atom's electronic ⊗ nuclear density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleAtomState {
    d: usize,
    rho: DMatrix<Complex64>,
}

impl SingleAtomState {
    /// Checks Hermiticity (1e-10), trace in `(0, 1 + 1e-10]` and positivity (−1e-8).
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 || !rho.nrows().is_multiple_of(2) {
            return Err(Error::InvalidParameter("state must be a square 2d × 2d matrix".into()));
        }
        let state = Self { d: rho.nrows() / 2, rho };
        state.check(1e-10, 1e-8)?;
        Ok(state)
    }

    /// All atoms in `g` with nuclear populations `p`.
    pub fn ground(p: &Spectrum) -> Self {
        let d = p.dim();
        let mut rho = DMatrix::zeros(2 * d, 2 * d);
        for m in 0..d {
            rho[(m, m)] = Complex64::new(p[m], 0.0);
        }
        Self { d, rho }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// `ρ^{mm'}_{μν}` with `μ, ν ∈ {0 = g, 1 = e}`.
    pub fn entry(&self, mu: usize, nu: usize, m: usize, m2: usize) -> Complex64 {
        self.rho[(mu * self.d + m, nu * self.d + m2)]
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn gg(&self, m: usize) -> f64 {
        self.entry(0, 0, m, m).re
    }

    pub fn ee(&self, m: usize) -> f64 {
        self.entry(1, 1, m, m).re
    }

    pub fn ge(&self, m: usize) -> Complex64 {
        self.entry(0, 1, m, m)
    }

    /// Largest `|ρ^{mm'}_{μν}|` with `m ≠ m'`.
    pub fn nuclear_coherence(&self) -> f64 {
        let d = self.d;
        let mut max = 0.0f64;
        for i in 0..2 * d {
            for j in 0..2 * d {
                if i % d != j % d {
                    max = max.max(self.rho[(i, j)].norm());
                }
            }
        }
        max
    }

    pub fn check(&self, hermitian_tol: f64, psd_tol: f64) -> Result<()> {
        if (&self.rho - self.rho.adjoint()).iter().any(|z| z.norm() > hermitian_tol) {
            return Err(Error::InvalidParameter("state is not Hermitian".into()));
        }
        let trace = self.trace();
        if !(trace > 0.0 && trace <= 1.0 + hermitian_tol) {
            return Err(Error::InvalidParameter(format!("state trace {trace} outside (0, 1]")));
        }
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min = SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -psd_tol {
            return Err(Error::InvalidParameter(format!("state has eigenvalue {min}")));
        }
        Ok(())
    }

    fn from_diagonal(d: usize, y: &[Complex64]) -> Self {
        let mut rho = DMatrix::zeros(2 * d, 2 * d);
        for m in 0..d {
            rho[(m, m)] = Complex64::new(y[m].re, 0.0);
            rho[(d + m, d + m)] = Complex64::new(y[d + m].re, 0.0);
            rho[(m, d + m)] = y[2 * d + m];
            rho[(d + m, m)] = y[2 * d + m].conj();
        }
        Self { d, rho }
    }

    // [gg_0.., ee_0.., ge_0..]
    fn diagonal_vector(&self) -> Vec<Complex64> {
        let d = self.d;
        let mut y = Vec::with_capacity(3 * d);
        y.extend((0..d).map(|m| Complex64::new(self.gg(m), 0.0)));
        y.extend((0..d).map(|m| Complex64::new(self.ee(m), 0.0)));
        y.extend((0..d).map(|m| self.ge(m)));
        y
    }
}

/// Scattering lengths in metres, trap frequency in rad/s, well length in
/// metres and loss rate in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub a_gg: f64,
    pub a_ee: f64,
    pub a_eg_plus: f64,
    pub a_eg_minus: f64,
    pub omega_perp: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub gamma: f64,
}

impl Default for PhysicalParams {
    /// `a_gg = 5.1 nm`, `ω⊥ = 2π·10 kHz`, `L = 10 μm`; other lengths and the loss rate zero.
    fn default() -> Self {
        Self { a_gg: 5.1e-9, a_ee: 0.0, a_eg_plus: 0.0, a_eg_minus: 0.0, omega_perp: TAU * 1e4, length: 1e-5, gamma: 0.0 }
    }
}

/// Interaction constants in rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub u_gg: f64,
    pub u_ee: f64,
    pub v: f64,
    pub v_ex: f64,
}

impl Couplings {
    /// Only the g–g interaction `U`.
    pub fn contact(u_gg: f64) -> Self {
        Self { u_gg, ..Self::default() }
    }

    fn only_gg(&self) -> bool {
        self.u_ee == 0.0 && self.v == 0.0 && self.v_ex == 0.0
    }

    fn max_abs(&self) -> f64 {
        [self.u_gg, self.u_ee, self.v, self.v_ex].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// `4π a ω⊥ / L` for each scattering length (`ħ = 1`).
pub fn derive_couplings(phys: &PhysicalParams) -> Result<Couplings> {
    if !(phys.length > 0.0 && phys.length.is_finite()) {
        return Err(Error::InvalidParameter(format!("well length {} must be positive", phys.length)));
    }
    if !(phys.omega_perp > 0.0 && phys.omega_perp.is_finite()) {
        return Err(Error::InvalidParameter(format!("trap frequency {} must be positive", phys.omega_perp)));
    }
    let scale = 4.0 * PI * phys.omega_perp / phys.length;
    let out = Couplings {
        u_gg: scale * phys.a_gg,
        u_ee: scale * phys.a_ee,
        v: scale * (phys.a_eg_plus + phys.a_eg_minus) / 2.0,
        v_ex: scale * (phys.a_eg_plus - phys.a_eg_minus) / 2.0,
    };
    if [out.u_gg, out.u_ee, out.v, out.v_ex].iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("derived couplings are not finite".into()));
    }
    Ok(out)
}

/// Conjugation by `exp[−i(β/2)(σ_eg + σ_ge)] ⊗ 1`; pass `−β` for the closing pulse.
pub fn apply_pulse(state: &SingleAtomState, beta: f64) -> SingleAtomState {
    let d = state.d;
    let c = Complex64::new((beta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(beta / 2.0).sin());
    let mut r = DMatrix::zeros(2 * d, 2 * d);
    for m in 0..d {
        r[(m, m)] = c;
        r[(d + m, d + m)] = c;
        r[(m, d + m)] = s;
        r[(d + m, m)] = s;
    }
    let rho = &r * &state.rho * r.adjoint();
    SingleAtomState { d, rho }
}

/// Numerical options for the dark-time integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Fixed step; default `min(1/(50 n r), τ/100)` with `r` the largest rate.
    pub step: Option<f64>,
    /// Required agreement between step `h` and `h/2`.
    pub tolerance: f64,
    /// Number of times the step may be halved to meet `tolerance`.
    pub max_refinements: u32,
    /// Integrate even when the closed-form phase rotation applies.
    pub force_integrator: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { step: None, tolerance: 1e-8, max_refinements: 10, force_integrator: false }
    }
}

fn check_nuclear_diagonal(state: &SingleAtomState) -> Result<()> {
    let c = state.nuclear_coherence();
    if c > 1e-12 {
        return Err(Error::InvalidParameter(format!("state has nuclear coherence {c:.3e}")));
    }
    Ok(())
}

fn check_common(n: usize, tau: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("dark time {tau} must be non-negative")));
    }
    Ok(())
}

/// Dark-time evolution under the mean-field equations with all four couplings.
pub fn dark_evolution(
    state: &SingleAtomState,
    couplings: &Couplings,
    delta: f64,
    n: usize,
    tau: f64,
    opts: &SolverOptions,
) -> Result<SingleAtomState> {
    check_common(n, tau)?;
    check_nuclear_diagonal(state)?;
    if tau == 0.0 {
        return Ok(state.clone());
    }
    if couplings.only_gg() && !opts.force_integrator {
        return Ok(phase_rotation(state, couplings.u_gg, delta, n, tau));
    }
    let rhs = MeanField { d: state.d, n1: (n - 1) as f64, couplings: *couplings, delta, gamma: 0.0, n2: 0.0 };
    let rate = couplings.max_abs().max(delta.abs() / n as f64);
    let y = integrate(&rhs, state.diagonal_vector(), n, rate, tau, opts)?;
    Ok(SingleAtomState::from_diagonal(state.d, &y))
}

/// Dark-time evolution with two-body e–e loss at rate `gamma`, for a state
/// identical on every site. Only the g–g coupling enters the coherent part.
pub fn loss_meanfield_evolution(
    state: &SingleAtomState,
    couplings: &Couplings,
    delta: f64,
    gamma: f64,
    n: usize,
    tau: f64,
    opts: &SolverOptions,
) -> Result<SingleAtomState> {
    check_common(n, tau)?;
    check_nuclear_diagonal(state)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("loss rate {gamma} must be non-negative")));
    }
    if !couplings.only_gg() {
        return Err(Error::InvalidParameter("the loss model takes only the g–g coupling".into()));
    }
    if tau == 0.0 {
        return Ok(state.clone());
    }
    if gamma == 0.0 && !opts.force_integrator {
        return Ok(phase_rotation(state, couplings.u_gg, delta, n, tau));
    }
    let rhs = MeanField { d: state.d, n1: (n - 1) as f64, couplings: *couplings, delta, gamma, n2: n.saturating_sub(2) as f64 };
    let rate = couplings.max_abs().max(gamma).max(delta.abs() / n as f64);
    let y = integrate(&rhs, state.diagonal_vector(), n, rate, tau, opts)?;
    let out = SingleAtomState::from_diagonal(state.d, &y);
    if out.trace() > state.trace() + 1e-9 {
        return Err(Error::Solver(format!("trace grew from {} to {}", state.trace(), out.trace())));
    }
    Ok(out)
}

// ρ_ge^{mm}(τ) = ρ_ge^{mm}(0) exp{−i[δ + U(n−1) Σ_{r≠m} ρ_gg^{rr}]τ}.
fn phase_rotation(state: &SingleAtomState, u: f64, delta: f64, n: usize, tau: f64) -> SingleAtomState {
    let d = state.d;
    let mut y = state.diagonal_vector();
    let total_g: f64 = (0..d).map(|m| y[m].re).sum();
    let detuning = (delta * tau).rem_euclid(TAU);
    for m in 0..d {
        let others = total_g - y[m].re;
        let shift = (u * (n - 1) as f64 * others * tau).rem_euclid(TAU);
        y[2 * d + m] *= Complex64::from_polar(1.0, -(detuning + shift));
    }
    SingleAtomState::from_diagonal(d, &y)
}

struct MeanField {
    d: usize,
    n1: f64,
    couplings: Couplings,
    delta: f64,
    gamma: f64,
    /// `n − 2`, used only by the loss terms.
    n2: f64,
}

impl MeanField {
    fn rhs(&self, y: &[Complex64]) -> Vec<Complex64> {
        let d = self.d;
        let (gg, rest) = y.split_at(d);
        let (ee, ge) = rest.split_at(d);
        let Couplings { u_gg, u_ee, v, v_ex } = self.couplings;
        let n1 = self.n1;
        let total_g: f64 = gg.iter().map(|x| x.re).sum();
        let total_e: f64 = ee.iter().map(|x| x.re).sum();
        let total_ge: Complex64 = ge.iter().sum();
        let mut out = vec![ZERO; 3 * d];
        for m in 0..d {
            let g_m = total_g - gg[m].re;
            let e_m = total_e - ee[m].re;
            let eg_m = ge[m].conj();
            let pop = I * v_ex * n1 * (ge[m] * total_ge.conj() - eg_m * total_ge);
            out[m] = pop;
            out[d + m] = -pop;
            out[2 * d + m] = -I * self.delta * ge[m] - I * u_gg * n1 * g_m * ge[m] + I * u_ee * n1 * e_m * ge[m]
                - I * v * n1 * ge[m] * (e_m - g_m)
                - I * v_ex * n1 * (ee[m] - gg[m]) * (total_ge - ge[m]);
        }
        if self.gamma > 0.0 {
            let pair_e = total_e * total_e - ee.iter().map(|x| x.re * x.re).sum::<f64>();
            let uniform = -self.gamma / 4.0 * n1 * self.n2 * pair_e;
            for m in 0..d {
                let e_m = total_e - ee[m].re;
                out[m] += uniform * gg[m];
                out[d + m] += uniform * ee[m] - self.gamma / 2.0 * n1 * e_m * ee[m];
                out[2 * d + m] += uniform * ge[m] - self.gamma / 4.0 * n1 * e_m * ge[m];
            }
        }
        out
    }
}

fn rk4(rhs: &MeanField, mut y: Vec<Complex64>, tau: f64, steps: usize) -> Vec<Complex64> {
    let h = tau / steps as f64;
    let axpy = |a: &[Complex64], s: f64, b: &[Complex64]| -> Vec<Complex64> { a.iter().zip(b).map(|(x, k)| x + k * s).collect() };
    for _ in 0..steps {
        let k1 = rhs.rhs(&y);
        let k2 = rhs.rhs(&axpy(&y, h / 2.0, &k1));
        let k3 = rhs.rhs(&axpy(&y, h / 2.0, &k2));
        let k4 = rhs.rhs(&axpy(&y, h, &k3));
        for i in 0..y.len() {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
    y
}

// Fixed-step RK4 with a step-halving check; returns the Richardson extrapolation
// of the last two resolutions once they agree to `opts.tolerance`.
fn integrate(rhs: &MeanField, y0: Vec<Complex64>, n: usize, rate: f64, tau: f64, opts: &SolverOptions) -> Result<Vec<Complex64>> {
    let h = match opts.step {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::InvalidParameter(format!("step {h} must be positive"))),
        None if rate > 0.0 => (1.0 / (50.0 * n as f64 * rate)).min(tau / 100.0),
        None => tau / 100.0,
    };
    let mut steps = (tau / h).ceil().max(1.0) as usize;
    let mut coarse = rk4(rhs, y0.clone(), tau, steps);
    for _ in 0..=opts.max_refinements {
        steps *= 2;
        let fine = rk4(rhs, y0.clone(), tau, steps);
        let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff < opts.tolerance {
            return Ok(fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect());
        }
        coarse = fine;
    }
    Err(Error::Solver(format!("no convergence to {} within {} halvings", opts.tolerance, opts.max_refinements)))
}

/// `⟨n̂_e⟩/n` after the closing pulse, read from the state at the end of the
/// dark time: `½[T + Σ_m(ρ_ee − ρ_gg) cos β − i Σ_m(ρ_eg − ρ_ge) sin β]`
/// with `T = Tr ρ` (one without loss). `lossless` uses `Σ_m(ρ_ee − ρ_gg) = −cos β`.
pub fn measure_ne(state: &SingleAtomState, beta: f64, lossless: bool) -> f64 {
    let d = state.d;
    let coherence: f64 = (0..d).map(|m| (-I * (state.ge(m).conj() - state.ge(m))).re).sum();
    let population = if lossless { -beta.cos() * beta.cos() } else { (0..d).map(|m| state.ee(m) - state.gg(m)).sum::<f64>() * beta.cos() };
    let trace = if lossless { 1.0 } else { state.trace() };
    0.5 * (trace + population + coherence * beta.sin())
}

/// Pulse, mean-field dark evolution with `U = params.U` only, closing pulse,
/// then `Σ_m ρ_ee^{mm}`.
pub fn meanfield_signal(params: &RamseyParams, p: &Spectrum, opts: &SolverOptions) -> Result<SignalCurve> {
    meanfield_signal_with(params, p, &Couplings::contact(params.interaction), opts)
}

/// As [`meanfield_signal`] with arbitrary couplings.
pub fn meanfield_signal_with(params: &RamseyParams, p: &Spectrum, couplings: &Couplings, opts: &SolverOptions) -> Result<SignalCurve> {
    params.validate()?;
    let start = apply_pulse(&SingleAtomState::ground(p), params.beta);
    let mut values = Vec::with_capacity(params.taus.len());
    for &tau in &params.taus {
        let dark = dark_evolution(&start, couplings, params.delta, params.n, tau, opts)?;
        let closed = apply_pulse(&dark, -params.beta);
        values.push((0..p.dim()).map(|m| closed.ee(m)).sum::<f64>().clamp(0.0, 1.0));
    }
    Ok(SignalCurve { params: params.clone(), values, method: SignalMethod::MeanfieldOde, retained_mass: None })
}

/// Mean-field loss pipeline. Each point reports per-atom totals scaled by `n`.
pub fn meanfield_loss_signal(params: &RamseyParams, p: &Spectrum, gamma: f64, opts: &SolverOptions) -> Result<Vec<LossPoint>> {
    params.validate()?;
    let start = apply_pulse(&SingleAtomState::ground(p), params.beta);
    let couplings = Couplings::contact(params.interaction);
    let n = params.n as f64;
    let mut out = Vec::with_capacity(params.taus.len());
    let mut state = start;
    let mut t = 0.0;
    for &tau in &params.taus {
        state = loss_meanfield_evolution(&state, &couplings, params.delta, gamma, params.n, tau - t, opts)?;
        t = tau;
        let trace = state.trace();
        out.push(LossPoint { tau, ne: n * measure_ne(&state, params.beta, false), n_in: n * trace, total: trace });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsey::{asymptotic_signal, tau_grid};

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    #[test]
    fn couplings_from_lengths() {
        let c = derive_couplings(&PhysicalParams::default()).unwrap();
        assert!((c.u_gg - 4.0 * PI * 5.1e-9 * TAU * 1e4 / 1e-5).abs() < 1e-9);
        assert_eq!(c.v_ex, 0.0);
        let doubled = derive_couplings(&PhysicalParams { length: 2e-5, ..Default::default() }).unwrap();
        assert!((doubled.u_gg - c.u_gg / 2.0).abs() < 1e-12);
        let zero = PhysicalParams { a_gg: 0.0, ..Default::default() };
        assert_eq!(derive_couplings(&zero).unwrap(), Couplings::default());
        let same = PhysicalParams { a_eg_plus: 3e-9, a_eg_minus: 3e-9, ..Default::default() };
        assert_eq!(derive_couplings(&same).unwrap().v_ex, 0.0);
        assert!(derive_couplings(&PhysicalParams { omega_perp: 0.0, ..Default::default() }).is_err());
        assert!(derive_couplings(&PhysicalParams { length: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn pulses() {
        let p = spec(&[0.6, 0.4]);
        let g = SingleAtomState::ground(&p);
        assert_eq!(apply_pulse(&g, 0.0), g);
        let flipped = apply_pulse(&SingleAtomState::ground(&Spectrum::pure(2)), PI);
        assert!((flipped.ee(0) - 1.0).abs() < 1e-15 && flipped.gg(0).abs() < 1e-15);
        let half = apply_pulse(&g, PI / 2.0);
        for m in 0..2 {
            assert!((half.ge(m) - Complex64::new(0.0, p[m] / 2.0)).norm() < 1e-15);
        }
        let back = apply_pulse(&half, -PI / 2.0);
        assert!((back.matrix() - g.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn zero_time_gives_zero_signal() {
        let p = spec(&[0.5, 0.3, 0.2]);
        let s = apply_pulse(&SingleAtomState::ground(&p), 1.1);
        let same = dark_evolution(&s, &Couplings::contact(1.0), 0.3, 10, 0.0, &SolverOptions::default()).unwrap();
        assert_eq!(same, s);
        assert!(measure_ne(&s, 1.1, true).abs() < 1e-15);
        assert!(measure_ne(&s, 1.1, false).abs() < 1e-15);
    }

    #[test]
    fn pipeline_matches_closed_form() {
        let p = spec(&[0.7, 0.2, 0.1]);
        let n = 30;
        let params = RamseyParams::new(n, 1.3, 0.2, 1.0, tau_grid(0.0, 0.01, 60)).unwrap();
        let closed = asymptotic_signal(&params, &p).unwrap();
        let fast = meanfield_signal(&params, &p, &SolverOptions::default()).unwrap();
        let forced = meanfield_signal(&params, &p, &SolverOptions { force_integrator: true, ..Default::default() }).unwrap();
        assert!(fast.max_abs_deviation(&closed) < 1e-12);
        assert!(forced.max_abs_deviation(&closed) < 1e-9);
        let pi = RamseyParams { beta: PI, ..params };
        assert!(meanfield_signal(&pi, &p, &SolverOptions::default()).unwrap().values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn measurement_formula_matches_explicit_pulse() {
        let p = spec(&[0.5, 0.3, 0.2]);
        let c = Couplings { u_gg: 1.0, u_ee: 0.4, v: 0.3, v_ex: 0.2 };
        let beta = 0.9;
        let s = apply_pulse(&SingleAtomState::ground(&p), beta);
        let dark = dark_evolution(&s, &c, 0.1, 8, 0.7, &SolverOptions::default()).unwrap();
        let closed = apply_pulse(&dark, -beta);
        let direct: f64 = (0..3).map(|m| closed.ee(m)).sum();
        assert!((measure_ne(&dark, beta, false) - direct).abs() < 1e-12);
    }

    #[test]
    fn general_couplings_conserve_what_they_should() {
        let p = spec(&[0.5, 0.3, 0.2]);
        let s = apply_pulse(&SingleAtomState::ground(&p), 1.0);
        let opts = SolverOptions::default();
        let no_ex = Couplings { u_gg: 1.0, u_ee: 0.5, v: 0.7, v_ex: 0.0 };
        let out = dark_evolution(&s, &no_ex, 0.2, 10, 2.0, &opts).unwrap();
        for m in 0..3 {
            assert!((out.gg(m) - s.gg(m)).abs() < 1e-12 && (out.ee(m) - s.ee(m)).abs() < 1e-12);
        }
        let with_ex = Couplings { v_ex: 0.3, ..no_ex };
        let out = dark_evolution(&s, &with_ex, 0.2, 10, 2.0, &opts).unwrap();
        let g: f64 = (0..3).map(|m| out.gg(m)).sum();
        let g0: f64 = (0..3).map(|m| s.gg(m)).sum();
        assert!((g - g0).abs() < 1e-9);
        assert!((out.trace() - 1.0).abs() < 1e-10);
        out.check(1e-10, 1e-8).unwrap();
        assert!((0..3).any(|m| (out.gg(m) - s.gg(m)).abs() > 1e-6));
    }

    #[test]
    fn loss_reduces_to_lossless_and_drains_trace() {
        let p = spec(&[0.8, 0.2]);
        let s = apply_pulse(&SingleAtomState::ground(&p), PI / 4.0);
        let c = Couplings::contact(1.0);
        let forced = SolverOptions { force_integrator: true, ..Default::default() };
        let a = loss_meanfield_evolution(&s, &c, 0.0, 0.0, 20, 0.3, &forced).unwrap();
        let b = dark_evolution(&s, &c, 0.0, 20, 0.3, &SolverOptions::default()).unwrap();
        assert!((a.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-10));

        let params = RamseyParams::new(20, PI / 4.0, 0.0, 1.0, tau_grid(0.0, 0.01, 40)).unwrap();
        let pts = meanfield_loss_signal(&params, &p, 0.5, &SolverOptions::default()).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].total <= w[0].total + 1e-12);
        }
        assert!(pts.last().unwrap().total < 1.0 - 1e-3);

        let ground = SingleAtomState::ground(&p);
        let kept = loss_meanfield_evolution(&ground, &c, 0.0, 3.0, 20, 1.0, &SolverOptions::default()).unwrap();
        assert!((kept.matrix() - ground.matrix()).iter().all(|z| z.norm() < 1e-14));
        assert!(loss_meanfield_evolution(&s, &Couplings { v: 0.1, ..c }, 0.0, 0.5, 20, 0.3, &forced).is_err());
    }

    #[test]
    fn rejects_nuclear_coherence() {
        let p = spec(&[0.5, 0.5]);
        let mut m = SingleAtomState::ground(&p).matrix().clone();
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        let s = SingleAtomState::new(m).unwrap();
        assert!(dark_evolution(&s, &Couplings::contact(1.0), 0.0, 4, 1.0, &SolverOptions::default()).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn spectrum() -> impl Strategy<Value = Spectrum> {
        prop::collection::vec(0.01f64..1.0, 1..4).prop_map(|w| Spectrum::normalized(w).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dark_evolution_keeps_a_valid_state(
            p in spectrum(),
            beta in 0.0..PI,
            u in -1.0f64..1.0, u_ee in -1.0f64..1.0, v in -1.0f64..1.0, v_ex in -0.5f64..0.5,
            delta in -2.0f64..2.0,
            n in 2usize..12,
            tau in 0.0f64..1.5,
        ) {
            let s = apply_pulse(&SingleAtomState::ground(&p), beta);
            let c = Couplings { u_gg: u, u_ee, v, v_ex };
            let out = dark_evolution(&s, &c, delta, n, tau, &SolverOptions::default()).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-9);
            prop_assert!(out.check(1e-9, 1e-7).is_ok());
            // Every coupling conserves each nuclear level's total population.
            for m in 0..p.dim() {
                prop_assert!((out.gg(m) + out.ee(m) - s.gg(m) - s.ee(m)).abs() < 1e-9);
            }
            let ne = measure_ne(&out, beta, true);
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&ne));
        }

        #[test]
        fn contact_fast_path_matches_integrator(p in spectrum(), beta in 0.0..PI, n in 2usize..30, tau in 0.0f64..0.5) {
            let s = apply_pulse(&SingleAtomState::ground(&p), beta);
            let c = Couplings::contact(1.0);
            let fast = dark_evolution(&s, &c, 0.3, n, tau, &SolverOptions::default()).unwrap();
            let slow = dark_evolution(&s, &c, 0.3, n, tau, &SolverOptions { force_integrator: true, ..Default::default() }).unwrap();
            prop_assert!((fast.matrix() - slow.matrix()).iter().all(|z| z.norm() < 1e-7));
        }

        #[test]
        fn loss_never_adds_atoms(p in spectrum(), beta in 0.0..PI, gamma in 0.0f64..2.0, n in 3usize..40, tau in 0.0f64..1.0) {
            let s = apply_pulse(&SingleAtomState::ground(&p), beta);
            let out = loss_meanfield_evolution(&s, &Couplings::contact(1.0), 0.0, gamma, n, tau, &SolverOptions::default()).unwrap();
            prop_assert!(out.trace() <= 1.0 + 1e-9);
            for m in 0..p.dim() {
                prop_assert!(out.ee(m) <= s.ee(m) + 1e-9);
            }
        }
    }
}
