//! Declarative many-body Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CouplingMatrix;

/// ```text
/// H = −Σ J_ij (b_i†b_j + h.c.) + (ν_R/2) Σ (e^{iφ} b_i† + e^{−iφ} b_i)
///     − ν_Δ Σ n_i + Σ_{i<j} V_ij n_i n_j + Σ μ_i n_i + c
/// ```
/// All coefficients in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub hopping: CouplingMatrix,
    pub drive: f64,
    /// Phase φ of the drive; 0 gives `(ν_R/2) Σ σˣ`.
    pub drive_phase: f64,
    pub detuning: f64,
    pub density_density: CouplingMatrix,
    pub fields: Vec<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl HamiltonianSpec {
    pub fn new(hopping: CouplingMatrix) -> Self {
        let n = hopping.n();
        Self {
            hopping,
            drive: 0.0,
            drive_phase: 0.0,
            detuning: 0.0,
            density_density: CouplingMatrix::zeros(n),
            fields: vec![0.0; n],
            constant: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.hopping.n()
    }

    pub fn with_drive(mut self, drive: f64, detuning: f64) -> Self {
        self.drive = drive;
        self.detuning = detuning;
        self
    }

    /// Add `c σᶻ_i σᶻ_j` with `σᶻ = 1 − 2n`, expanded into density-density,
    /// field and constant terms.
    pub fn add_zz(&mut self, i: usize, j: usize, c: f64) {
        let v = self.density_density.get(i, j);
        self.density_density.set(i, j, v + 4.0 * c);
        self.fields[i] -= 2.0 * c;
        self.fields[j] -= 2.0 * c;
        self.constant += c;
    }

    /// Add `c σᶻ_i`.
    pub fn add_z(&mut self, i: usize, c: f64) {
        self.fields[i] -= 2.0 * c;
        self.constant += c;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if self.density_density.n() != n || self.fields.len() != n {
            return Err(Error::Contract(
                "spec tables disagree on the number of sites".into(),
            ));
        }
        if !(self.drive >= 0.0) {
            return Err(Error::Contract(format!(
                "drive must be ≥ 0, got {}",
                self.drive
            )));
        }
        Ok(())
    }
}

/// Alternating XXZ chain
/// `−(J′/2) Σ (XX + YY + δZZ)` on bonds (1,2), (3,4), … and
/// `−(J/2) Σ (XX + YY + δZZ)` on bonds (2,3), (4,5), …
pub fn build_xxz_hamiltonian(
    j: f64,
    j_prime: f64,
    delta: f64,
    n_sites: usize,
) -> Result<HamiltonianSpec> {
    if !n_sites.is_multiple_of(2) || n_sites < 2 {
        return Err(Error::Contract(format!(
            "n_sites must be even and ≥ 2, got {n_sites}"
        )));
    }
    let mut spec = HamiltonianSpec::new(CouplingMatrix::ssh(n_sites, j, j_prime));
    if delta != 0.0 {
        for k in 0..n_sites - 1 {
            let c = if k % 2 == 0 { j_prime } else { j };
            spec.add_zz(k, k + 1, -0.5 * c * delta);
        }
    }
    Ok(spec)
}
