//! Simulated shot records and spectrum estimation by weighted least squares.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ramsey::{asymptotic_value, exact_signal, ExactModel, RamseyParams, SignalCurve};
use crate::spectrum::Spectrum;
use crate::young::YoungDiagram;

/// Shot outcomes at one dark time: the number of `e` atoms seen in each repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub tau: f64,
    pub counts: Vec<u32>,
}

impl MeasurementRecord {
    pub fn shots(&self) -> usize {
        self.counts.len()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.shots().max(1) as f64
    }

    /// Unbiased sample variance of the counts.
    pub fn variance(&self) -> f64 {
        let m = self.shots();
        if m < 2 {
            return 0.0;
        }
        let mean = self.mean();
        self.counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (m - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// `Binomial(n, s)` per shot.
    #[default]
    Binomial,
    /// `Normal(ns, n(s − s²))`, clipped to `[0, n]` and rounded.
    Gaussian,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(NoiseModel::Binomial),
            "gaussian" => Ok(NoiseModel::Gaussian),
            other => Err(Error::Parse(format!("unknown noise model `{other}`"))),
        }
    }
}

/// Shots drawn around the exact signal.
pub fn simulate_measurements(
    params: &RamseyParams,
    p: &Spectrum,
    shots_per_tau: usize,
    seed: u64,
    noise: NoiseModel,
) -> Result<Vec<MeasurementRecord>> {
    simulate_from_curve(&exact_signal(params, p)?, shots_per_tau, seed, noise)
}

/// Shots drawn around an arbitrary noiseless curve.
pub fn simulate_from_curve(curve: &SignalCurve, shots_per_tau: usize, seed: u64, noise: NoiseModel) -> Result<Vec<MeasurementRecord>> {
    if shots_per_tau == 0 {
        return Err(Error::InvalidParameter("need at least one shot per dark time".into()));
    }
    let n = curve.params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    curve
        .params
        .taus
        .iter()
        .zip(&curve.values)
        .map(|(&tau, &s)| {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidParameter(format!("signal {s} outside [0, 1]")));
            }
            let counts = match noise {
                NoiseModel::Binomial => {
                    let dist = Binomial::new(n as u64, s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    (0..shots_per_tau).map(|_| dist.sample(&mut rng) as u32).collect()
                }
                NoiseModel::Gaussian => {
                    let nf = n as f64;
                    let dist = Normal::new(nf * s, (nf * (s - s * s)).sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    (0..shots_per_tau).map(|_| dist.sample(&mut rng).clamp(0.0, nf).round() as u32).collect()
                }
            };
            Ok(MeasurementRecord { tau, counts })
        })
        .collect()
}

/// Writes `tau,shot_index,n_e` rows.
pub fn write_records_csv<W: Write>(records: &[MeasurementRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "shot_index", "n_e"]).map_err(csv_err)?;
    for r in records {
        for (i, c) in r.counts.iter().enumerate() {
            w.write_record([format!("{:.16e}", r.tau), i.to_string(), c.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `tau,shot_index,n_e` rows, grouping consecutive rows with equal `tau`.
/// Lines starting with `#` are skipped.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<MeasurementRecord>> {
    #[derive(Deserialize)]
    struct Row {
        tau: f64,
        #[allow(dead_code)]
        shot_index: usize,
        n_e: u32,
    }
    let mut out: Vec<MeasurementRecord> = Vec::new();
    for row in csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input).deserialize::<Row>() {
        let row = row.map_err(csv_err)?;
        match out.last_mut() {
            Some(last) if last.tau == row.tau => last.counts.push(row.n_e),
            _ => out.push(MeasurementRecord { tau: row.tau, counts: vec![row.n_e] }),
        }
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Model fitted to the data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    #[default]
    Exact,
    Asymptotic,
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(FitModel::Exact),
            "asymptotic" => Ok(FitModel::Asymptotic),
            other => Err(Error::Parse(format!("unknown fit model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub model: FitModel,
    /// Random starts in addition to the barycenter and `init`.
    pub starts: usize,
    pub seed: u64,
    pub init: Option<Spectrum>,
    pub max_iterations: usize,
    pub reweight_rounds: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { model: FitModel::Exact, starts: 16, seed: 0, init: None, max_iterations: 200, reweight_rounds: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub p_hat: Spectrum,
    /// `√(Σ_i w_i (ȳ_i − s_i)²)` at the optimum.
    pub residual_norm: f64,
    /// Covariance of `p_hat` (sorted order) from the Gauss–Newton approximation.
    pub covariance: Vec<Vec<f64>>,
    pub converged: bool,
    pub model: FitModel,
    pub seed: u64,
    pub params: RamseyParams,
    /// Fitted `s(τ_i)` alongside the data means, for residual plots.
    pub fitted: Vec<f64>,
    pub observed: Vec<f64>,
}

enum Evaluator {
    Asymptotic(RamseyParams),
    Exact { model: ExactModel, responses: Vec<Vec<f64>> },
}

impl Evaluator {
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self {
            Evaluator::Asymptotic(params) => Ok(params.taus.iter().map(|&t| asymptotic_value(params, p, t)).collect()),
            Evaluator::Exact { model, responses } => {
                model.combine(&Spectrum::normalized(p.to_vec())?, responses, responses.first().map_or(0, Vec::len))
            }
        }
    }
}

// θ ∈ ℝ^{d−1} ↦ p on the simplex: p_i = σ(θ_i) Π_{j<i}(1 − σ(θ_j)), p_d the remainder.
fn stick_breaking(theta: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(theta.len() + 1);
    let mut rest = 1.0;
    for &t in theta {
        let v = 1.0 / (1.0 + (-t).exp());
        p.push(rest * v);
        rest *= 1.0 - v;
    }
    p.push(rest);
    p
}

fn inverse_stick_breaking(p: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    let mut theta = Vec::with_capacity(p.len().saturating_sub(1));
    for &pi in &p[..p.len() - 1] {
        let v = if rest > 0.0 { (pi / rest).clamp(1e-12, 1.0 - 1e-12) } else { 0.5 };
        theta.push((v / (1.0 - v)).ln());
        rest -= pi;
    }
    theta
}

// ∂p/∂θ by central differences.
fn stick_jacobian(theta: &[f64]) -> DMatrix<f64> {
    let k = theta.len();
    let mut g = DMatrix::zeros(k + 1, k);
    for j in 0..k {
        let h = 1e-6 * (1.0 + theta[j].abs());
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[j] += h;
        down[j] -= h;
        let (pu, pd) = (stick_breaking(&up), stick_breaking(&down));
        for i in 0..=k {
            g[(i, j)] = (pu[i] - pd[i]) / (2.0 * h);
        }
    }
    g
}

struct Problem<'a> {
    eval: &'a Evaluator,
    y: Vec<f64>,
    shots: Vec<f64>,
    floor: f64,
    n: f64,
}

impl Problem<'_> {
    fn weights(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.shots).map(|(&s, &m)| m / ((s - s * s) / self.n).max(self.floor)).collect()
    }

    fn residuals(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let s = self.eval.eval(&stick_breaking(theta))?;
        Ok(s.iter().zip(&self.y).map(|(s, y)| s - y).collect())
    }

    fn objective(&self, theta: &[f64], w: &[f64]) -> Result<f64> {
        Ok(self.residuals(theta)?.iter().zip(w).map(|(r, w)| w * r * r).sum())
    }

    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let k = theta.len();
        let mut j = DMatrix::zeros(self.y.len(), k);
        for c in 0..k {
            let h = 1e-6 * (1.0 + theta[c].abs());
            let mut up = theta.to_vec();
            let mut down = theta.to_vec();
            up[c] += h;
            down[c] -= h;
            let (ru, rd) = (self.residuals(&up)?, self.residuals(&down)?);
            for i in 0..self.y.len() {
                j[(i, c)] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        Ok(j)
    }

    // Levenberg–Marquardt at fixed weights. Returns (θ, objective, converged).
    fn minimize(&self, mut theta: Vec<f64>, w: &[f64], max_iterations: usize) -> Result<(Vec<f64>, f64, bool)> {
        let k = theta.len();
        let mut f = self.objective(&theta, w)?;
        let mut mu = 1e-3;
        for _ in 0..max_iterations {
            if f == 0.0 {
                return Ok((theta, f, true));
            }
            let r = DVector::from_vec(self.residuals(&theta)?);
            let jac = self.jacobian(&theta)?;
            let wm = DVector::from_column_slice(w);
            let jtw = DMatrix::from_fn(k, self.y.len(), |a, i| jac[(i, a)] * wm[i]);
            let jtj = &jtw * &jac;
            let g = &jtw * &r;
            let mut improved = false;
            while mu < 1e16 {
                let mut a = jtj.clone();
                for i in 0..k {
                    a[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
                }
                let Some(step) = a.lu().solve(&(-&g)) else {
                    mu *= 4.0;
                    continue;
                };
                let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
                let ft = self.objective(&trial, w)?;
                if ft <= f {
                    let small_step = step.norm() <= 1e-12 * (1.0 + DVector::from_column_slice(&theta).norm());
                    let small_gain = f - ft <= 1e-15 * f;
                    theta = trial;
                    f = ft;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    if small_step || small_gain {
                        return Ok((theta, f, true));
                    }
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                // No descent direction left at any damping: a stationary point.
                return Ok((theta, f, true));
            }
        }
        Ok((theta, f, false))
    }
}

/// Shot-averaged `n_e/n` per dark time, the input to [`fit_observations`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    pub taus: Vec<f64>,
    pub means: Vec<f64>,
    pub shots: Vec<usize>,
}

impl Observations {
    /// Sorts by dark time; rejects repeated times, empty records and counts above `n`.
    pub fn from_records(records: &[MeasurementRecord], n: usize) -> Result<Self> {
        if let Some(r) = records.iter().find(|r| r.shots() == 0 || r.counts.iter().any(|&c| c as usize > n)) {
            return Err(Error::InvalidParameter(format!("record at tau = {} is empty or has counts above n", r.tau)));
        }
        let mut sorted: Vec<&MeasurementRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        Ok(Self {
            taus: sorted.iter().map(|r| r.tau).collect(),
            means: sorted.iter().map(|r| r.mean() / n as f64).collect(),
            shots: sorted.iter().map(|r| r.shots()).collect(),
        })
    }

    /// Noiseless observations equal to `curve`, each standing for `shots` repetitions.
    pub fn from_curve(curve: &SignalCurve, shots: usize) -> Self {
        Self { taus: curve.params.taus.clone(), means: curve.values.clone(), shots: vec![shots; curve.values.len()] }
    }
}

/// Fits `p` (dimension `d`) to shot records; see [`fit_observations`].
pub fn fit_spectrum(records: &[MeasurementRecord], params: &RamseyParams, d: usize, opts: &FitOptions) -> Result<EstimationResult> {
    fit_observations(&Observations::from_records(records, params.n)?, params, d, opts)
}

/// Iteratively reweighted Levenberg–Marquardt over a stick-breaking
/// parametrization of the simplex, from the barycenter, `opts.init`, and
/// `opts.starts` Dirichlet-uniform draws; the lowest objective wins.
/// Weights are `shots / max((s − s²)/n, 1/(12 n²))` at the current iterate.
/// `params.taus` is ignored in favour of `obs.taus`.
pub fn fit_observations(obs: &Observations, params: &RamseyParams, d: usize, opts: &FitOptions) -> Result<EstimationResult> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    if obs.means.len() != obs.taus.len() || obs.shots.len() != obs.taus.len() {
        return Err(Error::InvalidParameter("observation columns differ in length".into()));
    }
    if obs.taus.len() < d {
        return Err(Error::InvalidParameter(format!("need at least d = {d} distinct dark times, got {}", obs.taus.len())));
    }
    if obs.shots.contains(&0) || obs.means.iter().any(|y| !(0.0..=1.0).contains(y)) {
        return Err(Error::InvalidParameter("observations need shots ≥ 1 and means in [0, 1]".into()));
    }
    let fit_params = RamseyParams { taus: obs.taus.clone(), ..params.clone() };
    fit_params.validate()?;
    let n = params.n as f64;
    let y = obs.means.clone();

    let eval = match opts.model {
        FitModel::Asymptotic => Evaluator::Asymptotic(fit_params.clone()),
        FitModel::Exact => {
            let model = ExactModel::new(params.n, d, params.beta)?;
            let responses = model.diagram_responses(params.delta, params.interaction, &fit_params.taus);
            Evaluator::Exact { model, responses }
        }
    };
    let problem = Problem { eval: &eval, y: y.clone(), shots: obs.shots.iter().map(|&m| m as f64).collect(), floor: 1.0 / (12.0 * n * n), n };

    if d == 1 {
        let s = eval.eval(&[1.0])?;
        let w = problem.weights(&s);
        let f: f64 = s.iter().zip(&y).zip(&w).map(|((s, y), w)| w * (s - y).powi(2)).sum();
        return Ok(EstimationResult {
            p_hat: Spectrum::pure(1),
            residual_norm: f.sqrt(),
            covariance: vec![vec![0.0]],
            converged: true,
            model: opts.model,
            seed: opts.seed,
            params: fit_params,
            fitted: s,
            observed: y,
        });
    }

    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / d as f64; d]];
    if let Some(init) = &opts.init {
        if init.dim() != d {
            return Err(Error::SizeMismatch { expected: d, got: init.dim() });
        }
        starts.push(init.as_slice().to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        let e: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = e.iter().sum();
        starts.push(e.iter().map(|x| x / total).collect());
    }

    let mut best: Option<(Vec<f64>, f64, bool, Vec<f64>)> = None;
    for start in starts {
        let mut theta = inverse_stick_breaking(&start);
        let mut converged = false;
        let mut w = problem.weights(&eval.eval(&start)?);
        for _ in 0..opts.reweight_rounds.max(1) {
            let (t, _, ok) = problem.minimize(theta.clone(), &w, opts.max_iterations)?;
            let moved = t.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            theta = t;
            converged = ok;
            let new_w = problem.weights(&eval.eval(&stick_breaking(&theta))?);
            let changed = new_w.iter().zip(&w).any(|(a, b)| (a - b).abs() > 1e-9 * b.abs());
            w = new_w;
            if moved < 1e-10 || !changed {
                break;
            }
        }
        let f_final = problem.objective(&theta, &w)?;
        let better = match &best {
            None => true,
            Some((_, bf, _, _)) => f_final < *bf,
        };
        if better {
            best = Some((theta, f_final, converged, w));
        }
    }
    let (theta, f, converged, w) = best.expect("at least one start");

    let p_raw = stick_breaking(&theta);
    let fitted = eval.eval(&p_raw)?;
    let jac = problem.jacobian(&theta)?;
    let k = d - 1;
    let jtwj = DMatrix::from_fn(k, k, |a, b| (0..y.len()).map(|i| jac[(i, a)] * w[i] * jac[(i, b)]).sum());
    let cov_theta = jtwj.pseudo_inverse(1e-14).map_err(|e| Error::Solver(e.to_string()))?;
    let g = stick_jacobian(&theta);
    let cov_p = &g * cov_theta * g.transpose();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| p_raw[b].total_cmp(&p_raw[a]));
    let covariance = order.iter().map(|&a| order.iter().map(|&b| cov_p[(a, b)]).collect()).collect();

    Ok(EstimationResult {
        p_hat: Spectrum::normalized(p_raw)?,
        residual_norm: f.sqrt(),
        covariance,
        converged,
        model: opts.model,
        seed: opts.seed,
        params: fit_params,
        fitted,
        observed: y,
    })
}

/// `(λ_1/n, …, λ_d/n)`; for `d = 2` this is `1/2 ± S/n`.
pub fn estimate_from_eyd_sample(lambda: &YoungDiagram, n: usize, d: usize) -> Result<Spectrum> {
    if lambda.boxes() != n || n == 0 {
        return Err(Error::SizeMismatch { expected: n, got: lambda.boxes() });
    }
    if lambda.num_rows() > d {
        return Err(Error::InvalidParameter(format!("diagram has more than d = {d} rows")));
    }
    Spectrum::normalized(lambda.padded(d).iter().map(|&r| r as f64 / n as f64).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eyd::{eyd_distribution, sample_eyd};
    use crate::ramsey::{asymptotic_signal, tau_grid};
    use std::f64::consts::PI;

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    #[test]
    fn stick_breaking_round_trip() {
        let p = [0.5, 0.3, 0.2];
        let back = stick_breaking(&inverse_stick_breaking(&p));
        for (a, b) in back.iter().zip(&p) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((stick_breaking(&[0.3, -2.0, 4.0]).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simulated_counts() {
        let params = RamseyParams::new(30, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.05, 5)).unwrap();
        let p = spec(&[0.7, 0.2, 0.1]);
        let recs = simulate_measurements(&params, &p, 200, 3, NoiseModel::Binomial).unwrap();
        assert!(recs[0].counts.iter().all(|&c| c == 0));
        assert_eq!(recs, simulate_measurements(&params, &p, 200, 3, NoiseModel::Binomial).unwrap());
        let g = simulate_measurements(&params, &p, 200, 3, NoiseModel::Gaussian).unwrap();
        assert!(g.iter().flat_map(|r| &r.counts).all(|&c| c <= 30));
        let pi = RamseyParams { beta: PI, ..params };
        assert!(simulate_measurements(&pi, &p, 50, 1, NoiseModel::Binomial).unwrap().iter().all(|r| r.counts.iter().all(|&c| c == 0)));
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![MeasurementRecord { tau: 0.0, counts: vec![0, 1] }, MeasurementRecord { tau: 0.125, counts: vec![3, 4, 5] }];
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("tau,shot_index,n_e\n"));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn eyd_point_estimates() {
        assert_eq!(estimate_from_eyd_sample(&YoungDiagram::new(vec![6]).unwrap(), 6, 3).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(estimate_from_eyd_sample(&YoungDiagram::new(vec![3, 3]).unwrap(), 6, 2).unwrap().as_slice(), &[0.5, 0.5]);
        assert!(estimate_from_eyd_sample(&YoungDiagram::new(vec![3, 2]).unwrap(), 6, 2).is_err());
        let dist = eyd_distribution(300, &spec(&[0.8, 0.2])).unwrap();
        let mean: f64 = sample_eyd(&dist, 2000, 9).iter().map(|l| estimate_from_eyd_sample(l, 300, 2).unwrap()[0]).sum::<f64>() / 2000.0;
        assert!((mean - 0.8).abs() < 2.0 / 300f64.sqrt());
    }

    #[test]
    fn rejects_too_few_dark_times() {
        let params = RamseyParams::new(10, 1.0, 0.0, 1.0, vec![0.0, 0.1]).unwrap();
        let curve = asymptotic_signal(&params, &spec(&[0.5, 0.3, 0.2])).unwrap();
        let err = fit_observations(&Observations::from_curve(&curve, 3), &params, 3, &FitOptions::default());
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn exact_round_trip_small() {
        // Noisy data at n = 8 with the exact model lands near the truth and is
        // insensitive to the start point.
        let params = RamseyParams::new(8, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.1, 30)).unwrap();
        let truth = spec(&[0.75, 0.25]);
        let recs = simulate_measurements(&params, &truth, 2000, 5, NoiseModel::Binomial).unwrap();
        let a = fit_spectrum(&recs, &params, 2, &FitOptions { starts: 4, ..Default::default() }).unwrap();
        let b = fit_spectrum(&recs, &params, 2, &FitOptions { starts: 4, init: Some(spec(&[0.5, 0.5])), seed: 11, ..Default::default() }).unwrap();
        assert!(a.converged);
        assert!((a.p_hat[0] - 0.75).abs() < 0.03, "{:?}", a.p_hat);
        assert!((a.p_hat[0] - b.p_hat[0]).abs() < 1e-6);
        assert!(a.covariance[0][0] > 0.0 && (a.covariance[0][1] + a.covariance[0][0]).abs() < 1e-9);
    }

    #[test]
    fn noiseless_recovery() {
        let params = RamseyParams::new(8, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.1, 30)).unwrap();
        let truth = spec(&[0.75, 0.25]);
        let obs = Observations::from_curve(&exact_signal(&params, &truth).unwrap(), 100);
        let fit = fit_observations(&obs, &params, 2, &FitOptions::default()).unwrap();
        assert!((fit.p_hat[0] - 0.75).abs() < 1e-8, "{:?}", fit.p_hat);
        assert!(fit.residual_norm < 1e-8);

        let params = RamseyParams::new(30, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.01, 40)).unwrap();
        let truth = spec(&[0.7, 0.2, 0.1]);
        let obs = Observations::from_curve(&asymptotic_signal(&params, &truth).unwrap(), 100);
        let opts = FitOptions { model: FitModel::Asymptotic, ..Default::default() };
        let fit = fit_observations(&obs, &params, 3, &opts).unwrap();
        for i in 0..3 {
            assert!((fit.p_hat[i] - truth[i]).abs() < 1e-6, "{:?}", fit.p_hat);
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn stick_breaking_covers_the_simplex(w in prop::collection::vec(0.02f64..1.0, 1..6)) {
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let back = stick_breaking(&inverse_stick_breaking(&p));
            prop_assert_eq!(back.len(), p.len());
            for (a, b) in back.iter().zip(&p) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn records_survive_csv(recs in prop::collection::vec((0.0f64..1e3, prop::collection::vec(0u32..500, 1..8)), 1..6)) {
            let recs: Vec<MeasurementRecord> = recs.into_iter().map(|(tau, counts)| MeasurementRecord { tau, counts }).collect();
            let mut buf = Vec::new();
            write_records_csv(&recs, &mut buf).unwrap();
            prop_assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
        }
    }
}
