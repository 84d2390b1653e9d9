//! Matrix-free Hamiltonian action on a Fock basis.
//!
//! Rows are evaluated independently (gather form), so the output does not
//! depend on how the basis range is partitioned across threads.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::sync::Arc;

use super::basis::FockBasis;
use super::spec::{HamiltonianSpec, Statistics};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::geometry::CouplingMatrix;
use crate::par;

/// Largest dimension for dense materialization.
pub const DENSE_CEILING: usize = 4096;
/// Largest dimension for sparse (triplet) materialization.
pub const SPARSE_CEILING: usize = 1 << 14;

#[derive(Debug, Clone, Copy)]
struct Hop {
    mask: u32,
    /// Sites strictly between the two ends, for the Jordan-Wigner parity.
    between: u32,
    amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    basis: Arc<FockBasis>,
    hops: Arc<Vec<Hop>>,
    /// Density-density, field and constant terms per basis index.
    diag: Arc<Vec<f64>>,
    drive: f64,
    drive_phase: f64,
    detuning: f64,
    statistics: Statistics,
    /// Diagonal unitary `U`; the operator acts as `U H U†`.
    conjugation: Option<Arc<Vec<C64>>>,
}

fn hops_from(j: &CouplingMatrix) -> Vec<Hop> {
    j.pairs()
        .into_iter()
        .map(|(a, b, v)| {
            let between = if b > a + 1 {
                ((1u32 << b) - 1) & !((1u32 << (a + 1)) - 1)
            } else {
                0
            };
            Hop {
                mask: (1 << a) | (1 << b),
                between,
                amplitude: -v,
            }
        })
        .collect()
}

/// Boson Hamiltonian of `spec` on `basis`.
pub fn build_boson_hamiltonian(
    spec: &HamiltonianSpec,
    basis: Arc<FockBasis>,
) -> Result<ManyBodyOperator> {
    spec.validate()?;
    if spec.n_sites() != basis.n_sites() {
        return Err(Error::Contract(format!(
            "spec has {} sites, basis has {}",
            spec.n_sites(),
            basis.n_sites()
        )));
    }
    if basis.sector().is_some() && spec.drive != 0.0 {
        return Err(Error::Contract(
            "a drive does not conserve particle number and needs the full basis".into(),
        ));
    }
    let n = spec.n_sites();
    let pairs = spec.density_density.pairs();
    let fields = spec.fields.clone();
    let constant = spec.constant;
    let mut diag = vec![0.0; basis.dim()];
    let b = basis.clone();
    par::for_each_chunk(&mut diag, |off, chunk| {
        for (k, d) in chunk.iter_mut().enumerate() {
            let s = b.unrank(off + k);
            let mut e = constant;
            for (i, &mu) in fields.iter().enumerate().take(n) {
                if s >> i & 1 == 1 {
                    e += mu;
                }
            }
            for &(i, j, v) in &pairs {
                if s >> i & 1 == 1 && s >> j & 1 == 1 {
                    e += v;
                }
            }
            *d = e;
        }
    });
    Ok(ManyBodyOperator {
        basis,
        hops: Arc::new(hops_from(&spec.hopping)),
        diag: Arc::new(diag),
        drive: spec.drive,
        drive_phase: spec.drive_phase,
        detuning: spec.detuning,
        statistics: Statistics::Boson,
        conjugation: None,
    })
}

/// Free fermions `−Σ J_ij c_i†c_j + h.c.` on the same bitstring basis.
pub fn build_fermion_hamiltonian(
    j: &CouplingMatrix,
    basis: Arc<FockBasis>,
) -> Result<ManyBodyOperator> {
    let mut op = build_boson_hamiltonian(&HamiltonianSpec::new(j.clone()), basis)?;
    op.statistics = Statistics::Fermion;
    Ok(op)
}

impl ManyBodyOperator {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_hermitian(&self) -> bool {
        true
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    /// Same static terms with new drive and detuning; shares all tables.
    pub fn with_controls(&self, drive: f64, detuning: f64) -> Result<Self> {
        if self.basis.sector().is_some() && drive != 0.0 {
            return Err(Error::Contract("a drive needs the full basis".into()));
        }
        if !(drive >= 0.0) {
            return Err(Error::Contract(format!("drive must be ≥ 0, got {drive}")));
        }
        Ok(Self {
            drive,
            detuning,
            ..self.clone()
        })
    }

    pub fn with_drive_phase(&self, phase: f64) -> Self {
        Self {
            drive_phase: phase,
            ..self.clone()
        }
    }

    /// Conjugate by the diagonal unitary `U`: the result acts as `U H U†`.
    pub fn conjugated(&self, phases: Vec<C64>) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(Error::Contract(
                "conjugation phases do not match the basis".into(),
            ));
        }
        let combined = match &self.conjugation {
            None => phases,
            Some(old) => old.iter().zip(&phases).map(|(a, b)| a * b).collect(),
        };
        Ok(Self {
            conjugation: Some(Arc::new(combined)),
            ..self.clone()
        })
    }

    #[inline]
    fn row(&self, s: u32, r: usize, x: &[C64]) -> C64 {
        let pop = s.count_ones() as f64;
        let mut acc = x[r] * (self.diag[r] - self.detuning * pop);
        let fermion = self.statistics == Statistics::Fermion;
        for h in self.hops.iter() {
            let m = s & h.mask;
            if m != 0 && m != h.mask {
                let t = s ^ h.mask;
                let mut a = h.amplitude;
                if fermion && (s & h.between).count_ones() % 2 == 1 {
                    a = -a;
                }
                acc += x[self.basis.rank(t)] * a;
            }
        }
        if self.drive != 0.0 {
            let half = 0.5 * self.drive;
            let raise = C64::from_polar(half, self.drive_phase);
            let lower = raise.conj();
            for k in 0..self.basis.n_sites() {
                let t = s ^ (1 << k);
                let c = if s >> k & 1 == 1 { raise } else { lower };
                acc += c * x[t as usize];
            }
        }
        acc
    }

    /// `y = H x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        match &self.conjugation {
            None => par::for_each_chunk(y, |off, chunk| {
                for (k, out) in chunk.iter_mut().enumerate() {
                    let r = off + k;
                    *out = self.row(self.basis.unrank(r), r, x);
                }
            }),
            Some(u) => {
                let xt: Vec<C64> = x.iter().zip(u.iter()).map(|(a, p)| a * p.conj()).collect();
                par::for_each_chunk(y, |off, chunk| {
                    for (k, out) in chunk.iter_mut().enumerate() {
                        let r = off + k;
                        *out = u[r] * self.row(self.basis.unrank(r), r, &xt);
                    }
                });
            }
        }
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.basis() != &self.basis {
            return Err(Error::Contract(
                "state and operator live on different bases".into(),
            ));
        }
        StateVector::from_amplitudes(self.basis.clone(), self.apply_vec(psi.amplitudes()))
    }

    /// `⟨ψ|H|ψ⟩` (real part).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let hpsi = self.apply(psi)?;
        Ok(psi.inner(&hpsi)?.re)
    }

    /// Non-zero entries `(row, col, value)` for dimensions up to [`SPARSE_CEILING`].
    pub fn to_triplets(&self) -> Result<Vec<(usize, usize, C64)>> {
        let dim = self.dim();
        if dim > SPARSE_CEILING {
            return Err(Error::Resource(format!(
                "sparse materialization limited to {SPARSE_CEILING}, got {dim}"
            )));
        }
        let mut out = Vec::new();
        let mut e = vec![C64::new(0.0, 0.0); dim];
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e[c] = C64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            e[c] = C64::new(0.0, 0.0);
            for (r, v) in col.iter().enumerate() {
                if v.norm_sqr() != 0.0 {
                    out.push((r, c, *v));
                }
            }
        }
        Ok(out)
    }

    /// Dense matrix for dimensions up to [`DENSE_CEILING`].
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let dim = self.dim();
        if dim > DENSE_CEILING {
            return Err(Error::Resource(format!(
                "dense materialization limited to {DENSE_CEILING}, got {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (r, c, v) in self.to_triplets()? {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    /// Cheap upper bound on the spectral norm (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        let n = self.basis.n_sites();
        let hop: f64 = self.hops.iter().map(|h| h.amplitude.abs()).sum();
        let diag = self.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        diag + self.detuning.abs() * n as f64 + hop + 0.5 * self.drive * n as f64
    }
}
