//! Two-body e–e loss on the extended space where each atom is `g`, `e` or
//! `out` (lost, inert), times its nuclear spin.
//!
//! The jump on pair `(i, j)` takes the e–e nuclear-singlet component to
//! `|out, out⟩` (nuclear singlet kept), so `c†c = σ_ee^i σ_ee^j (1 − s_ij)/2`.
//!
//! Only two kinds of electronic blocks `ρ_{E,E'}` are needed for the
//! readout: diagonal ones (`E = E'`) and those where `E` and `E'` differ at
//! one site with `g` in `E` and `e` in `E'`. Both sets are closed under the
//! Hamiltonian and the jumps, so everything else is never stored.
//!
//! Blocks are kept in the eigenbases of the per-configuration Hamiltonians;
//! the coherent part is then a pure phase and is applied exactly, and the
//! dissipator is integrated with an integrating-factor RK4 scheme.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::perm::{index_tuple, tuple_index};
use super::DenseState;
use crate::error::{Error, Result};
use crate::numeric::unit_phase;
use crate::ramsey::RamseyParams;
use crate::spectrum::Spectrum;

pub const LINDBLAD_MAX_ATOMS: usize = 4;

const G: u8 = 0;
const E: u8 = 1;
const OUT: u8 = 2;

/// In-trap populations at one dark time, after the closing pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub tau: f64,
    /// `⟨n̂_e⟩`.
    pub ne: f64,
    /// `⟨n̂⟩`, atoms still in the trap.
    pub n_in: f64,
    /// Trace of the full density matrix (in-trap and lost sectors).
    pub total: f64,
}

impl LossPoint {
    /// `⟨n̂_e⟩/⟨n̂⟩`.
    pub fn normalized(&self) -> f64 {
        if self.n_in > 0.0 {
            self.ne / self.n_in
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladOptions {
    /// Upper bound on `h · Γ · (number of pairs)`.
    pub loss_step: f64,
    /// Upper bound on `h` times the largest Bohr frequency.
    pub phase_step: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { loss_step: 0.01, phase_step: 0.1 }
    }
}

struct Config {
    sites: Vec<u8>,
    eps: Vec<f64>,
    q: DMatrix<Complex64>,
    /// `Q^T K Q` with `K = Σ_{e-e pairs} (1 − s)/2`, absent when no pair is excited.
    k: Option<DMatrix<Complex64>>,
}

struct Jump {
    target: usize,
    /// `Q_F^T P_ij Q_E`.
    map: DMatrix<Complex64>,
}

struct Block {
    row: usize,
    col: usize,
    /// `(jump from row config, jump from col config, target block)`.
    jumps: Vec<(usize, usize, usize)>,
}

/// Normalized-signal ingredients under loss rate `gamma` for `ρ = diag(p)`.
pub fn lindblad_loss_evolve(params: &RamseyParams, p: &Spectrum, gamma: f64) -> Result<Vec<LossPoint>> {
    lindblad_loss_evolve_state(params, &DenseState::from_spectrum(p), gamma, LindbladOptions::default())
}

pub fn lindblad_loss_evolve_state(params: &RamseyParams, rho: &DenseState, gamma: f64, opts: LindbladOptions) -> Result<Vec<LossPoint>> {
    params.validate()?;
    let n = params.n;
    let d = rho.dim();
    if n > LINDBLAD_MAX_ATOMS || d != 2 {
        return Err(Error::SizeLimit { dim: (3 * d).pow(n as u32), limit: 6usize.pow(LINDBLAD_MAX_ATOMS as u32) });
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("loss rate {gamma} must be non-negative")));
    }
    let nuclear = d.pow(n as u32);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();

    // Per-configuration Hamiltonians in their eigenbases.
    let num_configs = 3usize.pow(n as u32);
    let mut configs = Vec::with_capacity(num_configs);
    for index in 0..num_configs {
        let sites: Vec<u8> = index_tuple(index, 3, n).into_iter().map(|x| x as u8).collect();
        let h = config_hamiltonian(&sites, params.interaction, params.delta, d);
        let eig = SymmetricEigen::new(h);
        let q = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let excited_pairs: Vec<_> = pairs.iter().filter(|(i, j)| sites[*i] == E && sites[*j] == E).collect();
        let k = if excited_pairs.is_empty() {
            None
        } else {
            let mut kmat = DMatrix::<f64>::zeros(nuclear, nuclear);
            for (i, j) in excited_pairs {
                kmat += singlet_projector(*i, *j, n, d);
            }
            let kc = kmat.map(|x| Complex64::new(x, 0.0));
            Some(q.adjoint() * kc * &q)
        };
        configs.push(Config { sites, eps: eig.eigenvalues.iter().copied().collect(), q, k });
    }

    // Jump maps out of every configuration with an excited pair.
    let mut jumps: Vec<Jump> = Vec::new();
    let mut jump_index: HashMap<(usize, usize), usize> = HashMap::new();
    for (index, cfg) in configs.iter().enumerate() {
        for (pair_id, &(i, j)) in pairs.iter().enumerate() {
            if cfg.sites[i] != E || cfg.sites[j] != E {
                continue;
            }
            let mut target = cfg.sites.clone();
            target[i] = OUT;
            target[j] = OUT;
            let target_index = config_index(&target);
            let proj = singlet_projector(i, j, n, d).map(|x| Complex64::new(x, 0.0));
            let map = configs[target_index].q.adjoint() * proj * &cfg.q;
            jump_index.insert((index, pair_id), jumps.len());
            jumps.push(Jump { target: target_index, map });
        }
    }

    // Retained blocks: diagonal, and (g at site k, e at site k) with the rest equal.
    let mut blocks: Vec<Block> = Vec::new();
    let mut block_index: HashMap<(usize, usize), usize> = HashMap::new();
    for index in 0..num_configs {
        block_index.insert((index, index), blocks.len());
        blocks.push(Block { row: index, col: index, jumps: Vec::new() });
    }
    for index in 0..num_configs {
        for k in 0..n {
            if configs[index].sites[k] != G {
                continue;
            }
            let mut flipped = configs[index].sites.clone();
            flipped[k] = E;
            let col = config_index(&flipped);
            block_index.insert((index, col), blocks.len());
            blocks.push(Block { row: index, col, jumps: Vec::new() });
        }
    }
    for b in 0..blocks.len() {
        let (row, col) = (blocks[b].row, blocks[b].col);
        let mut list = Vec::new();
        for pair_id in 0..pairs.len() {
            if let (Some(&jr), Some(&jc)) = (jump_index.get(&(row, pair_id)), jump_index.get(&(col, pair_id))) {
                let target = block_index[&(jumps[jr].target, jumps[jc].target)];
                list.push((jr, jc, target));
            }
        }
        blocks[b].jumps = list;
    }

    // Initial state: W|G⟩ on the electronic part times ρ^{⊗n}.
    let c = (params.beta / 2.0).cos();
    let s = (params.beta / 2.0).sin();
    let amp = |sites: &[u8]| -> Complex64 {
        sites.iter().fold(Complex64::new(1.0, 0.0), |acc, &x| match x {
            G => acc * c,
            E => acc * Complex64::new(0.0, -s),
            _ => Complex64::new(0.0, 0.0),
        })
    };
    let rho_n = rho.tensor_power(n);
    let mut state: Vec<DMatrix<Complex64>> = blocks
        .iter()
        .map(|b| {
            let a = amp(&configs[b.row].sites) * amp(&configs[b.col].sites).conj();
            if a == Complex64::new(0.0, 0.0) {
                DMatrix::zeros(nuclear, nuclear)
            } else {
                configs[b.row].q.adjoint() * &rho_n * &configs[b.col].q * a
            }
        })
        .collect();

    let overlaps: Vec<Option<DMatrix<Complex64>>> =
        blocks.iter().map(|b| (b.row != b.col).then(|| configs[b.col].q.adjoint() * &configs[b.row].q)).collect();

    let bohr_max = configs.iter().map(|c| c.eps.iter().fold(0.0f64, |m, e| m.max(e.abs()))).fold(0.0, f64::max) * 2.0;
    let mut h_max = f64::INFINITY;
    if gamma > 0.0 {
        h_max = opts.loss_step / (gamma * pairs.len().max(1) as f64);
        if bohr_max > 0.0 {
            h_max = h_max.min(opts.phase_step / bohr_max);
        }
    }

    let system = System { configs: &configs, jumps: &jumps, blocks: &blocks, gamma };
    let mut out = Vec::with_capacity(params.taus.len());
    let mut t = 0.0;
    for &tau in &params.taus {
        let span = tau - t;
        if span > 0.0 {
            if gamma == 0.0 {
                system.rotate(&mut state, span);
            } else {
                let steps = (span / h_max).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    system.lawson_step(&mut state, h);
                }
            }
            t = tau;
        }
        out.push(system.readout(&state, &overlaps, tau, c, s));
    }
    Ok(out)
}

struct System<'a> {
    configs: &'a [Config],
    jumps: &'a [Jump],
    blocks: &'a [Block],
    gamma: f64,
}

impl System<'_> {
    fn phase_factors(&self, h: f64) -> Vec<DMatrix<Complex64>> {
        self.blocks
            .iter()
            .map(|b| {
                let er = &self.configs[b.row].eps;
                let ec = &self.configs[b.col].eps;
                DMatrix::from_fn(er.len(), ec.len(), |a, c| unit_phase(-(er[a] - ec[c]) * h))
            })
            .collect()
    }

    fn rotate(&self, state: &mut [DMatrix<Complex64>], h: f64) {
        for (blk, ph) in state.iter_mut().zip(self.phase_factors(h)) {
            blk.component_mul_assign(&ph);
        }
    }

    fn dissipator(&self, state: &[DMatrix<Complex64>]) -> Vec<DMatrix<Complex64>> {
        let half = Complex64::new(-0.5 * self.gamma, 0.0);
        let full = Complex64::new(self.gamma, 0.0);
        let mut out: Vec<DMatrix<Complex64>> = state.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect();
        for (b, blk) in self.blocks.iter().enumerate() {
            let rho = &state[b];
            if let Some(k) = &self.configs[blk.row].k {
                out[b] += k * rho * half;
            }
            if let Some(k) = &self.configs[blk.col].k {
                out[b] += rho * k * half;
            }
            for &(jr, jc, target) in &blk.jumps {
                out[target] += &self.jumps[jr].map * rho * self.jumps[jc].map.adjoint() * full;
            }
        }
        out
    }

    // Integrating-factor RK4: exact phases, RK4 on the dissipator.
    fn lawson_step(&self, state: &mut [DMatrix<Complex64>], h: f64) {
        let ph = self.phase_factors(h / 2.0);
        let apply = |v: &[DMatrix<Complex64>]| -> Vec<DMatrix<Complex64>> { v.iter().zip(&ph).map(|(m, p)| m.component_mul(p)).collect() };
        let axpy = |a: &[DMatrix<Complex64>], s: f64, b: &[DMatrix<Complex64>]| -> Vec<DMatrix<Complex64>> {
            a.iter().zip(b).map(|(x, y)| x + y * Complex64::new(s, 0.0)).collect()
        };
        let k1 = self.dissipator(state);
        let k2 = self.dissipator(&apply(&axpy(state, h / 2.0, &k1)));
        let ey = apply(state);
        let k3 = self.dissipator(&axpy(&ey, h / 2.0, &k2));
        let eey = apply(&ey);
        let k4 = self.dissipator(&axpy(&eey, h, &apply(&k3)));
        let ek1 = apply(&apply(&k1));
        let ek23 = apply(&axpy(&k2, 1.0, &k3));
        for b in 0..state.len() {
            state[b] = &eey[b] + (&ek1[b] + &ek23[b] * Complex64::new(2.0, 0.0) + &k4[b]) * Complex64::new(h / 6.0, 0.0);
        }
    }

    fn readout(&self, state: &[DMatrix<Complex64>], overlaps: &[Option<DMatrix<Complex64>>], tau: f64, c: f64, s: f64) -> LossPoint {
        let mut total = 0.0;
        let mut n_in = 0.0;
        let mut ne = 0.0;
        for (b, blk) in self.blocks.iter().enumerate() {
            let sites = &self.configs[blk.row].sites;
            if blk.row == blk.col {
                let tr = state[b].trace().re;
                total += tr;
                for &x in sites {
                    match x {
                        G => {
                            n_in += tr;
                            ne += s * s * tr;
                        }
                        E => {
                            n_in += tr;
                            ne += c * c * tr;
                        }
                        _ => {}
                    }
                }
            } else {
                // Tr(Q_row ρ̃ Q_col^T) = ⟨g|ρ|e⟩ at the flipped site.
                let o = overlaps[b].as_ref().expect("off-diagonal block");
                let x: Complex64 = state[b].iter().zip(o.transpose().iter()).map(|(r, q)| r * q).sum();
                ne -= 2.0 * c * s * x.im;
            }
        }
        LossPoint { tau, ne, n_in, total }
    }
}

fn config_index(sites: &[u8]) -> usize {
    sites.iter().fold(0, |acc, &x| acc * 3 + x as usize)
}

fn config_hamiltonian(sites: &[u8], interaction: f64, delta: f64, d: usize) -> DMatrix<f64> {
    let n = sites.len();
    let dim = d.pow(n as u32);
    let excited = sites.iter().filter(|&&x| x == E).count() as f64;
    let ground: Vec<usize> = (0..n).filter(|&k| sites[k] == G).collect();
    let mut h = DMatrix::from_diagonal_element(dim, dim, -delta * excited);
    for col in 0..dim {
        let t = index_tuple(col, d, n);
        for (a, &j) in ground.iter().enumerate() {
            for &k in &ground[a + 1..] {
                let mut swapped = t.clone();
                swapped.swap(j, k);
                h[(col, col)] += interaction;
                h[(tuple_index(&swapped, d), col)] -= interaction;
            }
        }
    }
    h
}

// (1 − s_ij)/2 on the nuclear space.
fn singlet_projector(i: usize, j: usize, n: usize, d: usize) -> DMatrix<f64> {
    let dim = d.pow(n as u32);
    let mut p = DMatrix::from_diagonal_element(dim, dim, 0.5);
    for col in 0..dim {
        let mut t = index_tuple(col, d, n);
        t.swap(i, j);
        p[(tuple_index(&t, d), col)] -= 0.5;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::full_hilbert_signal;
    use crate::ramsey::tau_grid;
    use std::f64::consts::PI;

    fn spec(p: &[f64]) -> Spectrum {
        Spectrum::new(p.to_vec()).unwrap()
    }

    #[test]
    fn lossless_matches_pure_unitary_oracle() {
        let p = spec(&[2.0 / 3.0, 1.0 / 3.0]);
        let params = RamseyParams::new(3, PI / 4.0, 0.2, 1.0, tau_grid(0.0, 0.25, 12)).unwrap();
        let lossless = lindblad_loss_evolve(&params, &p, 0.0).unwrap();
        let unitary = full_hilbert_signal(&params, &p, None).unwrap();
        for (pt, v) in lossless.iter().zip(&unitary.values) {
            assert!((pt.normalized() - v).abs() < 1e-12);
            assert!((pt.n_in - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_conserves_probability_and_drains_atoms() {
        let p = spec(&[2.0 / 3.0, 1.0 / 3.0]);
        let params = RamseyParams::new(3, PI / 2.0, 0.0, 1.0, tau_grid(0.0, 0.2, 11)).unwrap();
        let pts = lindblad_loss_evolve(&params, &p, 0.5).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].n_in <= w[0].n_in + 1e-12);
        }
        assert!(pts.iter().all(|pt| (pt.total - 1.0).abs() < 1e-9));
        assert!(pts.last().unwrap().n_in < 3.0 - 1e-3);
    }

    #[test]
    fn no_excitation_no_dynamics() {
        let p = spec(&[0.6, 0.4]);
        let params = RamseyParams::new(3, 0.0, 0.0, 1.0, tau_grid(0.0, 0.3, 5)).unwrap();
        for pt in lindblad_loss_evolve(&params, &p, 2.0).unwrap() {
            assert!(pt.ne.abs() < 1e-14 && (pt.n_in - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsupported_sizes() {
        let params = RamseyParams::new(5, 1.0, 0.0, 1.0, vec![0.0]).unwrap();
        assert!(lindblad_loss_evolve(&params, &spec(&[0.5, 0.5]), 0.1).is_err());
        let params = RamseyParams::new(2, 1.0, 0.0, 1.0, vec![0.0]).unwrap();
        assert!(lindblad_loss_evolve(&params, &spec(&[0.5, 0.3, 0.2]), 0.1).is_err());
        assert!(lindblad_loss_evolve(&params, &spec(&[0.5, 0.5]), -1.0).is_err());
    }
}
