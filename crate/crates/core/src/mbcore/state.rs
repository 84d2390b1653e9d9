//! State vectors over a Fock basis.

use num_complex::Complex64 as C64;
use std::sync::Arc;

use super::basis::FockBasis;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: Arc<FockBasis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Contract(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amps })
    }

    pub fn basis_state(basis: Arc<FockBasis>, bits: u32) -> Result<Self> {
        if !basis.contains(bits) {
            return Err(Error::Contract(format!("bitstring {bits:#b} not in basis")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[basis.rank(bits)] = C64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Result<Self> {
        Self::basis_state(basis, 0)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numerical(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::Contract(
                "inner product across different bases".into(),
            ));
        }
        Ok(dot(&self.amps, &other.amps))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of each basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Embed into the full basis over the same sites.
    pub fn to_full(&self) -> Result<StateVector> {
        if self.basis.is_full() {
            return Ok(self.clone());
        }
        let full = Arc::new(FockBasis::new(self.n_sites(), None)?);
        let mut amps = vec![C64::new(0.0, 0.0); full.dim()];
        for (k, a) in self.amps.iter().enumerate() {
            amps[self.basis.unrank(k) as usize] = *a;
        }
        Ok(StateVector { basis: full, amps })
    }
}

/// `Σ conj(a_k) b_k`, reduced in fixed chunk order.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    par::chunked_sum(a.len(), C64::new(0.0, 0.0), |r| {
        let mut acc = C64::new(0.0, 0.0);
        for k in r {
            acc += a[k].conj() * b[k];
        }
        acc
    })
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    par::chunked_sum(a.len(), 0.0, |r| {
        a[r].iter().map(|x| x.norm_sqr()).sum::<f64>()
    })
}
