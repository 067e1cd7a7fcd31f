use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Eigenvalues of a density matrix, sorted descending and summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Validates and sorts `p` descending. Entries must lie in `[0, 1]` and
    /// sum to one within `1e-12`.
    pub fn new(p: impl Into<Vec<f64>>) -> Result<Self> {
        let mut p = p.into();
        if p.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidSpectrum(format!("entry {bad} outside [0, 1]")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSpectrum(format!("entries sum to {total}, not 1")));
        }
        p.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(p))
    }

    /// Clamps negatives to zero and rescales to unit sum before validating.
    pub fn normalized(p: impl Into<Vec<f64>>) -> Result<Self> {
        let mut p: Vec<f64> = p.into().into_iter().map(|x| x.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidSpectrum("cannot normalize a zero vector".into()));
        }
        p.iter_mut().for_each(|x| *x /= total);
        // Sum can still be off by an ulp or two; fold the remainder into the largest entry.
        let (imax, _) = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let rest: f64 = p.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, x)| x).sum();
        p[imax] = 1.0 - rest;
        Self::new(p)
    }

    /// The pure state `(1, 0, …, 0)` in dimension `d`.
    pub fn pure(d: usize) -> Self {
        let mut p = vec![0.0; d.max(1)];
        p[0] = 1.0;
        Self(p)
    }

    /// The maximally mixed state in dimension `d`.
    pub fn uniform(d: usize) -> Self {
        Self::normalized(vec![1.0; d.max(1)]).expect("uniform is valid")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `Tr ρ^k = Σ_r p_r^k`.
    pub fn power_trace(&self, k: usize) -> f64 {
        self.0.iter().map(|p| p.powi(k as i32)).sum()
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_validates() {
        let s = Spectrum::new(vec![0.2, 0.7, 0.1]).unwrap();
        assert_eq!(s.as_slice(), &[0.7, 0.2, 0.1]);
        assert!(Spectrum::new(vec![0.5, 0.6]).is_err());
        assert!(Spectrum::new(vec![1.5, -0.5]).is_err());
        assert!(Spectrum::new(Vec::<f64>::new()).is_err());
        assert!(Spectrum::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn normalization() {
        let s = Spectrum::normalized(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.25, 0.25]);
        assert_eq!(Spectrum::uniform(3).dim(), 3);
        assert_eq!(Spectrum::pure(2).as_slice(), &[1.0, 0.0]);
        assert!((Spectrum::uniform(4).power_trace(2) - 0.25).abs() < 1e-15);
    }
}
