//! Ramsey signal `⟨n_e(τ)⟩/n` for `n` atoms whose nuclear spins hold `ρ^{⊗n}`.
//!
//! The exact signal is
//!
//! ```text
//! ⟨n_e⟩/n = (sin²β / 2) [1 − Σ_w Pr(w|n,β) Re{e^{iδτ} Tr(ρ^{⊗n} B_w)}]
//! Tr(ρ^{⊗n} B_w) = Σ_λ Pr(λ|n,p) Tr_λ(B_w)
//! Tr_λ(B_w) = e^{iα(m−1)} Σ_ξ Pr(ξ|w,λ) Σ_r (‖ξ^{−r}‖/‖ξ‖) e^{−iα(ξ_r − r)}
//! ```
//!
//! with `α = Uτ`, `m = n − w` and `ξ ⊢ m`. Every term of `Tr_λ(B_w)` is a
//! nonnegative real weight times `e^{iαk}` for an integer `k`, so the
//! τ-independent weights are computed once per `(λ, w)` and only the phases
//! are evaluated on the dark-time grid.
//!
//! `Pr(ξ|w,λ) = m(λ,ξ)‖ξ‖/‖λ‖` is obtained by pushing probability down the
//! Young lattice with step weights `‖μ^{−r}‖/‖μ‖`; the product along any path
//! telescopes to `‖ξ‖/‖λ‖` and summing paths gives the multiplicity.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eyd::EydModel;
use crate::numeric::{ln_binomial, unit_phase, xlny};
use crate::spectrum::Spectrum;
use crate::young::{enumerate_diagrams, removable_boxes, YoungDiagram};

/// Configuration of one Ramsey experiment. Frequencies in rad/s, times in s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyParams {
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "U")]
    pub interaction: f64,
    pub taus: Vec<f64>,
}

impl RamseyParams {
    pub fn new(n: usize, beta: f64, delta: f64, interaction: f64, taus: Vec<f64>) -> Result<Self> {
        let params = Self { n, beta, delta, interaction, taus };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(0.0..=TAU).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta = {} outside [0, 2π]", self.beta)));
        }
        if !self.delta.is_finite() || !self.interaction.is_finite() {
            return Err(Error::InvalidParameter("delta and U must be finite".into()));
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParameter("dark times must be finite and non-negative".into()));
        }
        if self.taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("dark times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Overall prefactor `sin²β / 2`.
    pub fn amplitude(&self) -> f64 {
        0.5 * self.beta.sin().powi(2)
    }
}

/// Dark-time grid `start, start + step, …` with `count` points.
pub fn tau_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

/// How a [`SignalCurve`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalMethod {
    Exact,
    Truncated,
    Asymptotic,
    MeanfieldOde,
    Oracle,
}

impl SignalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalMethod::Exact => "exact",
            SignalMethod::Truncated => "truncated",
            SignalMethod::Asymptotic => "asymptotic",
            SignalMethod::MeanfieldOde => "meanfield-ode",
            SignalMethod::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for SignalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SignalMethod::Exact),
            "truncated" => Ok(SignalMethod::Truncated),
            "asymptotic" => Ok(SignalMethod::Asymptotic),
            "meanfield" | "meanfield-ode" => Ok(SignalMethod::MeanfieldOde),
            "oracle" => Ok(SignalMethod::Oracle),
            other => Err(Error::Parse(format!("unknown signal method `{other}`"))),
        }
    }
}

/// Probability mass kept by [`truncated_signal`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetainedMass {
    /// `Σ Pr(λ|n,p)` over retained diagrams.
    pub eyd: f64,
    /// `Σ Pr(w|n,β)` over retained excitation numbers.
    pub binomial: f64,
}

/// `⟨n_e⟩/n` sampled on the dark-time grid of `params`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalCurve {
    pub params: RamseyParams,
    pub values: Vec<f64>,
    pub method: SignalMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained_mass: Option<RetainedMass>,
}

impl SignalCurve {
    pub fn max_abs_deviation(&self, other: &SignalCurve) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `Pr(w|n,β) = C(n−1,w) cos^{2(n−w−1)}(β/2) sin^{2w}(β/2)`.
pub fn binom_weight(w: usize, n: usize, beta: f64) -> Result<f64> {
    if n == 0 || w >= n {
        return Err(Error::InvalidParameter(format!("w = {w} outside 0..{n}")));
    }
    let c2 = (beta / 2.0).cos().powi(2);
    let s2 = (beta / 2.0).sin().powi(2);
    let ln = ln_binomial(n - 1, w) + xlny((n - w - 1) as f64, c2) + xlny(w as f64, s2);
    Ok(ln.exp())
}

/// `‖ξ^{−r}‖ / ‖ξ‖` for a valid removal from row `r` (1-based), as the
/// rational product `(l_r/m) Π_{j≠r} (l_r − 1 − l_j)/(l_r − l_j)`.
pub fn dimension_ratio(xi: &YoungDiagram, r: usize) -> f64 {
    let k = xi.num_rows();
    let m = xi.boxes();
    if r == 0 || r > k || m == 0 {
        return 0.0;
    }
    let l: Vec<f64> = (1..=k).map(|i| (xi.row(i) + k - i) as f64).collect();
    let lr = l[r - 1];
    let mut ratio = lr / m as f64;
    for (j, &lj) in l.iter().enumerate() {
        if j + 1 != r {
            ratio *= (lr - 1.0 - lj) / (lr - lj);
        }
    }
    ratio
}

/// Coordinate-wise window on diagrams: keep `ξ` if `|ξ_i − center_i| ≤ radius_i`.
#[derive(Clone, Debug)]
struct DiagramWindow {
    center: Vec<f64>,
    radius: Vec<f64>,
}

impl DiagramWindow {
    fn contains(&self, xi: &YoungDiagram) -> bool {
        if xi.num_rows() > self.center.len() {
            return false;
        }
        self.center.iter().zip(&self.radius).enumerate().all(|(i, (c, r))| (xi.row(i + 1) as f64 - c).abs() <= *r)
    }
}

/// τ-independent part of `Tr_λ(B_w)` for one `λ` across a range of `w`:
/// `Tr_λ(B_w) = Σ_k coeffs[w][k] e^{iαk}`.
#[derive(Clone, Debug)]
pub struct BranchingKernel {
    lambda: YoungDiagram,
    w_lo: usize,
    coeffs: Vec<Vec<f64>>,
}

impl BranchingKernel {
    /// Full kernel for every `w` in `0..n`.
    pub fn new(lambda: &YoungDiagram) -> Self {
        let n = lambda.boxes();
        Self::build(lambda, 0, n.saturating_sub(1), None)
    }

    // ξ-window half-width k_sigma: keep ξ ⊢ n−w within k_sigma hypergeometric
    // standard deviations of (n−w)/n · λ.
    fn build(lambda: &YoungDiagram, w_lo: usize, w_hi: usize, xi_sigma: Option<f64>) -> Self {
        let n = lambda.boxes();
        let rows = lambda.num_rows().max(1);
        let mut coeffs = Vec::with_capacity(w_hi + 1 - w_lo);
        let mut level: BTreeMap<YoungDiagram, f64> = BTreeMap::from([(lambda.clone(), 1.0)]);
        for w in 0..=w_hi {
            let m = n - w;
            if w > 0 {
                let mut next: BTreeMap<YoungDiagram, f64> = BTreeMap::new();
                for (xi, prob) in &level {
                    for (r, minus) in removable_boxes(xi) {
                        *next.entry(minus).or_insert(0.0) += prob * dimension_ratio(xi, r);
                    }
                }
                if let Some(k_sigma) = xi_sigma {
                    let window = xi_window(lambda, w, k_sigma, rows);
                    next.retain(|xi, _| window.contains(xi));
                }
                level = next;
            }
            if w >= w_lo {
                let mut c = vec![0.0; m + rows];
                for (xi, prob) in &level {
                    for (r, _) in removable_boxes(xi) {
                        // e^{iα(m−1)} e^{−iα(ξ_r − r)}
                        let k = m - 1 + r - xi.row(r);
                        c[k] += prob * dimension_ratio(xi, r);
                    }
                }
                coeffs.push(c);
            }
        }
        Self { lambda: lambda.clone(), w_lo, coeffs }
    }

    pub fn lambda(&self) -> &YoungDiagram {
        &self.lambda
    }

    /// `Tr_λ(B_w)` at `α = Uτ`, if `w` is within the kernel's range.
    pub fn trace(&self, w: usize, alpha: f64) -> Option<Complex64> {
        let c = self.coeffs.get(w.checked_sub(self.w_lo)?)?;
        Some(c.iter().enumerate().map(|(k, &ck)| ck * unit_phase(alpha * k as f64)).sum())
    }

    fn coefficients(&self, w: usize) -> Option<&[f64]> {
        self.coeffs.get(w.checked_sub(self.w_lo)?).map(Vec::as_slice)
    }
}

fn xi_window(lambda: &YoungDiagram, w: usize, k_sigma: f64, rows: usize) -> DiagramWindow {
    let n = lambda.boxes() as f64;
    let m = n - w as f64;
    let mut center = Vec::with_capacity(rows);
    let mut radius = Vec::with_capacity(rows);
    for i in 1..=rows {
        let q = lambda.row(i) as f64 / n;
        let var = if n > 1.0 { w as f64 * q * (1.0 - q) * m / (n - 1.0) } else { 0.0 };
        center.push(m * q);
        radius.push(k_sigma * var.sqrt() + 1.0);
    }
    DiagramWindow { center, radius }
}

/// `Pr(ξ|w,λ)` for every `ξ ⊢ n−w` reachable from `λ`, sorted by diagram.
pub fn restriction_distribution(lambda: &YoungDiagram, w: usize) -> Result<Vec<(YoungDiagram, f64)>> {
    let n = lambda.boxes();
    if w > n {
        return Err(Error::InvalidParameter(format!("cannot remove {w} boxes from {lambda}")));
    }
    let mut level: BTreeMap<YoungDiagram, f64> = BTreeMap::from([(lambda.clone(), 1.0)]);
    for _ in 0..w {
        let mut next = BTreeMap::new();
        for (xi, prob) in &level {
            for (r, minus) in removable_boxes(xi) {
                *next.entry(minus).or_insert(0.0) += prob * dimension_ratio(xi, r);
            }
        }
        level = next;
    }
    let mut out: Vec<_> = level.into_iter().collect();
    out.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(out)
}

/// Normalized trace of `B_w = exp[iα Σ_{j=1}^{n−w−1} (1 − s_{jn})]` over the
/// `λ` irrep of `S_n`.
pub fn trace_lambda_bw(lambda: &YoungDiagram, w: usize, alpha: f64, n: usize) -> Result<Complex64> {
    if lambda.boxes() != n {
        return Err(Error::SizeMismatch { expected: n, got: lambda.boxes() });
    }
    if w >= n {
        return Err(Error::InvalidParameter(format!("w = {w} outside 0..{n}")));
    }
    let kernel = BranchingKernel::build(lambda, w, w, None);
    Ok(kernel.trace(w, alpha).expect("w in range"))
}

/// `Tr(ρ^{⊗n} B_w) = Σ_λ Pr(λ|n,p) Tr_λ(B_w)`.
pub fn trace_bw(n: usize, p: &Spectrum, w: usize, alpha: f64) -> Result<Complex64> {
    if w >= n {
        return Err(Error::InvalidParameter(format!("w = {w} outside 0..{n}")));
    }
    let model = EydModel::new(n, p.dim())?;
    let probs = model.probabilities(p)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (lambda, prob) in model.diagrams().iter().zip(probs) {
        if prob == 0.0 {
            continue;
        }
        let kernel = BranchingKernel::build(lambda, w, w, None);
        total += prob * kernel.trace(w, alpha).expect("w in range");
    }
    Ok(total)
}

/// Exact-signal evaluator for fixed `(n, d, β)`. Holds one branching kernel
/// per diagram, so it can be evaluated for many spectra and dark times.
#[derive(Clone, Debug)]
pub struct ExactModel {
    n: usize,
    beta: f64,
    eyd: EydModel,
    kernels: Vec<BranchingKernel>,
    w_weights: Vec<f64>,
}

impl ExactModel {
    pub fn new(n: usize, d: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let eyd = EydModel::new(n, d)?;
        let kernels = eyd.diagrams().iter().map(BranchingKernel::new).collect();
        let w_weights = (0..n).map(|w| binom_weight(w, n, beta)).collect::<Result<_>>()?;
        Ok(Self { n, beta, eyd, kernels, w_weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.eyd.d()
    }

    pub fn eyd(&self) -> &EydModel {
        &self.eyd
    }

    /// `Σ_w Pr(w|n,β) Re{e^{iδτ} Tr_λ(B_w)}` for each diagram (rows) and each
    /// dark time (columns). The signal is `amplitude · (1 − Σ_λ Pr(λ) F[λ][τ])`.
    pub fn diagram_responses(&self, delta: f64, interaction: f64, taus: &[f64]) -> Vec<Vec<f64>> {
        self.kernels
            .iter()
            .map(|kernel| {
                taus.iter()
                    .map(|&tau| {
                        let detuning_phase = (delta * tau).rem_euclid(TAU);
                        self.w_weights
                            .iter()
                            .enumerate()
                            .map(|(w, pw)| pw * real_part(kernel.coefficients(w).unwrap_or(&[]), detuning_phase, interaction * tau))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Signal values for spectrum `p` given precomputed [`Self::diagram_responses`].
    pub fn combine(&self, p: &Spectrum, responses: &[Vec<f64>], num_taus: usize) -> Result<Vec<f64>> {
        let probs = self.eyd.probabilities(p)?;
        let amplitude = 0.5 * self.beta.sin().powi(2);
        Ok((0..num_taus)
            .map(|i| {
                let mix: f64 = probs.iter().zip(responses).map(|(pr, f)| pr * f[i]).sum();
                (amplitude * (1.0 - mix)).clamp(0.0, 1.0)
            })
            .collect())
    }

    pub fn signal(&self, p: &Spectrum, delta: f64, interaction: f64, taus: &[f64]) -> Result<Vec<f64>> {
        let responses = self.diagram_responses(delta, interaction, taus);
        self.combine(p, &responses, taus.len())
    }
}

// Re{e^{iδτ} Σ_k c_k e^{iαk}} with the detuning and interaction phases kept separate.
fn real_part(coeffs: &[f64], detuning_phase: f64, alpha: f64) -> f64 {
    coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, c)| c * (detuning_phase + (alpha * k as f64).rem_euclid(TAU)).cos()).sum()
}

fn check_params(params: &RamseyParams, p: &Spectrum) -> Result<()> {
    params.validate()?;
    if p.dim() == 0 {
        return Err(Error::InvalidSpectrum("empty spectrum".into()));
    }
    Ok(())
}

/// Exact finite-n signal.
pub fn exact_signal(params: &RamseyParams, p: &Spectrum) -> Result<SignalCurve> {
    check_params(params, p)?;
    let model = ExactModel::new(params.n, p.dim(), params.beta)?;
    let values = model.signal(p, params.delta, params.interaction, &params.taus)?;
    Ok(SignalCurve { params: params.clone(), values, method: SignalMethod::Exact, retained_mass: None })
}

/// Default width (in standard deviations) of the windows used by [`truncated_signal`].
pub const DEFAULT_K_SIGMA: f64 = 5.0;

/// Exact signal with negligible terms dropped: diagrams `λ` outside
/// `k_sigma` standard deviations of the EYD mode, excitation numbers `w`
/// outside `k_sigma` binomial standard deviations of `(n−1) sin²(β/2)`, and
/// restricted diagrams `ξ` far from `(n−w)/n · λ`. `k_sigma = ∞` keeps
/// everything.
pub fn truncated_signal(params: &RamseyParams, p: &Spectrum, k_sigma: f64) -> Result<SignalCurve> {
    check_params(params, p)?;
    if !(k_sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("k_sigma = {k_sigma} must be positive")));
    }
    let n = params.n;
    let d = p.dim();
    let eyd = EydModel::new(n, d)?;
    let probs = eyd.probabilities(p)?;
    let finite = k_sigma.is_finite();

    let (mode_idx, _) = probs.iter().enumerate().fold((0, -1.0), |acc, (i, &pr)| if pr > acc.1 { (i, pr) } else { acc });
    let mode = &eyd.diagrams()[mode_idx];
    let lambda_window = DiagramWindow {
        center: (1..=d).map(|i| mode.row(i) as f64).collect(),
        radius: (0..d).map(|i| if finite { k_sigma * (p[i] * (1.0 - p[i]) * n as f64).sqrt() + 1.0 } else { f64::INFINITY }).collect(),
    };

    let s2 = (params.beta / 2.0).sin().powi(2);
    let c2 = 1.0 - s2;
    let (w_lo, w_hi) = if finite {
        let mean = (n - 1) as f64 * s2;
        let half = k_sigma * (n as f64 * s2 * c2).sqrt() + 1.0;
        let lo = (mean - half).ceil().max(0.0) as usize;
        let hi = ((mean + half).floor() as usize).min(n - 1);
        (lo.min(hi), hi)
    } else {
        (0, n - 1)
    };
    let w_weights: Vec<f64> = (w_lo..=w_hi).map(|w| binom_weight(w, n, params.beta)).collect::<Result<_>>()?;
    let binomial_mass: f64 = w_weights.iter().sum();

    // Aggregate Σ_λ Pr(λ) c_{λ,w,k} over retained diagrams.
    let mut combined: Vec<Vec<f64>> = (w_lo..=w_hi).map(|w| vec![0.0; n - w + d]).collect();
    let mut eyd_mass = 0.0;
    for (lambda, &prob) in eyd.diagrams().iter().zip(&probs) {
        if prob == 0.0 || !lambda_window.contains(lambda) {
            continue;
        }
        eyd_mass += prob;
        let kernel = BranchingKernel::build(lambda, w_lo, w_hi, finite.then_some(k_sigma));
        for w in w_lo..=w_hi {
            let c = kernel.coefficients(w).expect("w in range");
            let target = &mut combined[w - w_lo];
            for (k, ck) in c.iter().enumerate() {
                target[k] += prob * ck;
            }
        }
    }

    let amplitude = params.amplitude();
    let values = params
        .taus
        .iter()
        .map(|&tau| {
            let detuning_phase = (params.delta * tau).rem_euclid(TAU);
            let alpha = params.interaction * tau;
            let mix: f64 = w_weights.iter().zip(&combined).map(|(pw, c)| pw * real_part(c, detuning_phase, alpha)).sum();
            (amplitude * (1.0 - mix)).clamp(0.0, 1.0)
        })
        .collect();
    Ok(SignalCurve {
        params: params.clone(),
        values,
        method: SignalMethod::Truncated,
        retained_mass: Some(RetainedMass { eyd: eyd_mass, binomial: binomial_mass }),
    })
}

/// Large-n closed form `(sin²β/2)[1 − Σ_r p_r cos(ω_r τ)]` with
/// `ω_r = U(n−1)(1−p_r)cos²(β/2) + δ`.
pub fn asymptotic_signal(params: &RamseyParams, p: &Spectrum) -> Result<SignalCurve> {
    check_params(params, p)?;
    let values = params.taus.iter().map(|&tau| asymptotic_value(params, p.as_slice(), tau)).collect();
    Ok(SignalCurve { params: params.clone(), values, method: SignalMethod::Asymptotic, retained_mass: None })
}

/// Single point of [`asymptotic_signal`]; `p` need not be sorted.
pub fn asymptotic_value(params: &RamseyParams, p: &[f64], tau: f64) -> f64 {
    let c2 = (params.beta / 2.0).cos().powi(2);
    let shift = params.interaction * (params.n as f64 - 1.0) * c2 * tau;
    let detuning_phase = (params.delta * tau).rem_euclid(TAU);
    let mix: f64 = p.iter().map(|&pr| pr * (detuning_phase + (shift * (1.0 - pr)).rem_euclid(TAU)).cos()).sum();
    params.amplitude() * (1.0 - mix)
}

/// Shot-to-shot variance of `n_e/n` in the mean-field picture: `(s − s²)/n`.
pub fn meanfield_variance(signal_value: f64, n: usize) -> f64 {
    (signal_value - signal_value * signal_value) / n as f64
}

/// Every diagram of `n` boxes with at most `d` rows paired with its
/// [`BranchingKernel`]; exposed for diagnostics.
pub fn kernels(n: usize, d: usize) -> Vec<BranchingKernel> {
    enumerate_diagrams(n, d).iter().map(BranchingKernel::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{branching_multiplicity, dimension, remove_box};

    fn yd(rows: &[usize]) -> YoungDiagram {
        YoungDiagram::new(rows.to_vec()).unwrap()
    }

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    fn params(n: usize, beta: f64, delta: f64, u: f64, taus: Vec<f64>) -> RamseyParams {
        RamseyParams::new(n, beta, delta, u, taus).unwrap()
    }

    #[test]
    fn binomial_weights() {
        assert_eq!(binom_weight(0, 5, 0.0).unwrap(), 1.0);
        assert_eq!(binom_weight(2, 5, 0.0).unwrap(), 0.0);
        assert!((binom_weight(4, 5, std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(binom_weight(3, 5, std::f64::consts::PI).unwrap() < 1e-30);
        let total: f64 = (0..17).map(|w| binom_weight(w, 17, 0.7).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(binom_weight(5, 5, 0.3).is_err());
    }

    #[test]
    fn dimension_ratio_matches_exact_dimensions() {
        for n in 1..=9 {
            for xi in enumerate_diagrams(n, 4) {
                let mut total = 0.0;
                for r in 1..=4 {
                    let ratio = dimension_ratio(&xi, r);
                    match remove_box(&xi, r) {
                        Some(minus) => {
                            let want = dimension(&minus).to_f64() / dimension(&xi).to_f64();
                            assert!((ratio - want).abs() < 1e-14, "{xi} r={r}");
                        }
                        None => assert_eq!(ratio, 0.0, "{xi} r={r}"),
                    }
                    total += ratio;
                }
                assert!((total - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn restriction_matches_multiplicity_formula() {
        for n in 1..=9 {
            for lambda in enumerate_diagrams(n, 3) {
                for w in 0..=n {
                    let dist = restriction_distribution(&lambda, w).unwrap();
                    let total: f64 = dist.iter().map(|(_, p)| p).sum();
                    assert!((total - 1.0).abs() < 1e-13);
                    for (xi, prob) in dist {
                        let m = branching_multiplicity(&lambda, &xi).unwrap().to_f64();
                        let want = m * dimension(&xi).to_f64() / dimension(&lambda).to_f64();
                        assert!((prob - want).abs() < 1e-13, "{lambda} -> {xi}");
                    }
                }
            }
        }
    }

    #[test]
    fn trace_lambda_edge_cases() {
        for lambda in enumerate_diagrams(5, 3) {
            for w in 0..5 {
                let z = trace_lambda_bw(&lambda, w, 0.0, 5).unwrap();
                assert!((z - 1.0).norm() < 1e-14, "{lambda} w={w}");
            }
            let z = trace_lambda_bw(&lambda, 4, 0.83, 5).unwrap();
            assert!((z - 1.0).norm() < 1e-14);
        }
        // n = 2, w = 0: B_0 = e^{iα(1 − s_12)}.
        let alpha = 0.77;
        let sym = trace_lambda_bw(&yd(&[2]), 0, alpha, 2).unwrap();
        let anti = trace_lambda_bw(&yd(&[1, 1]), 0, alpha, 2).unwrap();
        assert!((sym - 1.0).norm() < 1e-15);
        assert!((anti - Complex64::from_polar(1.0, 2.0 * alpha)).norm() < 1e-15);
        assert!(trace_lambda_bw(&yd(&[2]), 2, alpha, 2).is_err());
        assert!(trace_lambda_bw(&yd(&[2]), 0, alpha, 3).is_err());
    }

    #[test]
    fn trace_lambda_has_unit_bound() {
        for lambda in enumerate_diagrams(7, 3) {
            for w in 0..7 {
                for alpha in [0.1, 1.3, 4.0] {
                    assert!(trace_lambda_bw(&lambda, w, alpha, 7).unwrap().norm() <= 1.0 + 1e-14);
                }
            }
        }
    }

    #[test]
    fn trace_bw_simple_cases() {
        let pure = trace_bw(2, &Spectrum::pure(2), 0, 1.1).unwrap();
        assert!((pure - 1.0).norm() < 1e-15);
        let zero = trace_bw(4, &spec(&[0.6, 0.3, 0.1]), 1, 0.0).unwrap();
        assert!((zero - 1.0).norm() < 1e-14);
    }

    #[test]
    fn signal_limits() {
        let taus = tau_grid(0.0, 0.05, 40);
        let p = spec(&[0.6, 0.3, 0.1]);
        let curve = exact_signal(&params(6, 1.1, 0.4, 2.0, taus.clone()), &p).unwrap();
        assert!(curve.values[0].abs() < 1e-15);
        assert!(curve.values.iter().all(|v| (0.0..=1.0).contains(v)));

        let pi = exact_signal(&params(6, std::f64::consts::PI, 0.4, 2.0, taus.clone()), &p).unwrap();
        assert!(pi.values.iter().all(|v| v.abs() < 1e-15));

        let beta = 0.9;
        let delta = 1.7;
        let pure = exact_signal(&params(6, beta, delta, 3.0, taus.clone()), &Spectrum::pure(3)).unwrap();
        for (v, tau) in pure.values.iter().zip(&taus) {
            let want = 0.5 * beta.sin().powi(2) * (1.0 - (delta * tau).cos());
            assert!((v - want).abs() < 1e-14);
        }
        let asym = asymptotic_signal(&params(6, beta, delta, 3.0, taus.clone()), &Spectrum::pure(3)).unwrap();
        assert!(asym.max_abs_deviation(&pure) < 1e-14);
        assert!(asymptotic_signal(&params(6, beta, delta, 3.0, taus), &p).unwrap().values[0].abs() < 1e-15);
    }

    #[test]
    fn beta_reflection() {
        let taus = tau_grid(0.0, 0.1, 25);
        let p = spec(&[0.5, 0.3, 0.2]);
        let a = exact_signal(&params(7, 0.8, -0.3, 1.4, taus.clone()), &p).unwrap();
        let b = exact_signal(&params(7, TAU - 0.8, -0.3, 1.4, taus), &p).unwrap();
        assert!(a.max_abs_deviation(&b) < 1e-12);
    }

    #[test]
    fn untruncated_matches_exact() {
        let taus = tau_grid(0.0, 0.07, 30);
        let p = spec(&[0.55, 0.3, 0.15]);
        let prm = params(9, 1.2, 0.25, 1.0, taus);
        let exact = exact_signal(&prm, &p).unwrap();
        let full = truncated_signal(&prm, &p, f64::INFINITY).unwrap();
        assert!(exact.max_abs_deviation(&full) < 1e-13);
        let mass = full.retained_mass.unwrap();
        assert!((mass.eyd - 1.0).abs() < 1e-12 && (mass.binomial - 1.0).abs() < 1e-12);
        assert!(truncated_signal(&prm, &p, 0.0).is_err());
        assert!(truncated_signal(&prm, &p, -1.0).is_err());
    }

    #[test]
    fn variance_formula() {
        assert_eq!(meanfield_variance(0.0, 30), 0.0);
        assert_eq!(meanfield_variance(1.0, 30), 0.0);
        assert!((meanfield_variance(0.5, 30) - 0.25 / 30.0).abs() < 1e-18);
    }

    #[test]
    fn params_validation() {
        assert!(RamseyParams::new(0, 1.0, 0.0, 1.0, vec![0.0]).is_err());
        assert!(RamseyParams::new(3, 7.0, 0.0, 1.0, vec![0.0]).is_err());
        assert!(RamseyParams::new(3, 1.0, 0.0, 1.0, vec![0.1, 0.1]).is_err());
        assert!(RamseyParams::new(3, 1.0, 0.0, 1.0, vec![-0.1]).is_err());
        assert!("meanfield".parse::<SignalMethod>().is_ok());
        assert!("bogus".parse::<SignalMethod>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn exact_signal_is_bounded(
                n in 1usize..14,
                raw in proptest::collection::vec(0.01f64..1.0, 1..4),
                beta in 0.0f64..TAU,
                delta in -3.0f64..3.0,
                u in -3.0f64..3.0,
            ) {
                let p = Spectrum::normalized(raw).unwrap();
                let prm = RamseyParams::new(n, beta, delta, u, tau_grid(0.0, 0.13, 20)).unwrap();
                let curve = exact_signal(&prm, &p).unwrap();
                prop_assert!(curve.values.iter().all(|v| (0.0..=1.0).contains(v)));
                let mirrored = RamseyParams { beta: (TAU - beta).max(0.0), ..prm };
                let other = exact_signal(&mirrored, &p).unwrap();
                prop_assert!(curve.max_abs_deviation(&other) < 1e-12);
            }
        }
    }
}
