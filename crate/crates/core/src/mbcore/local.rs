//! Single-site unitaries applied to many-body states.

use num_complex::Complex64 as C64;

use super::state::StateVector;
use crate::error::{Error, Result};

pub type SiteUnitary = [[C64; 2]; 2];

/// `exp(−i(θ/2)(e^{iφ} b† + e^{−iφ} b))`: the action of a resonant drive
/// with phase φ and pulse area θ = 2π ν_Rabi τ on one isolated site.
pub fn drive_rotation(theta: f64, phase: f64) -> SiteUnitary {
    let c = C64::new((0.5 * theta).cos(), 0.0);
    let s = (0.5 * theta).sin();
    let minus_i = C64::new(0.0, -1.0);
    [
        [c, minus_i * s * C64::from_polar(1.0, -phase)],
        [minus_i * s * C64::from_polar(1.0, phase), c],
    ]
}

/// Apply `u` independently on each listed site. Full basis only.
pub fn apply_local_unitary(
    psi: &StateVector,
    sites: &[usize],
    u: &SiteUnitary,
) -> Result<StateVector> {
    if !psi.basis().is_full() {
        return Err(Error::Contract(
            "single-site rotations need the full basis".into(),
        ));
    }
    let n = psi.n_sites();
    let mut amps = psi.amplitudes().to_vec();
    for &k in sites {
        if k >= n {
            return Err(Error::Contract(format!("site index {k} out of range")));
        }
        let bit = 1usize << k;
        for s in 0..amps.len() {
            if s & bit == 0 {
                let a0 = amps[s];
                let a1 = amps[s | bit];
                amps[s] = u[0][0] * a0 + u[0][1] * a1;
                amps[s | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }
    StateVector::from_amplitudes(psi.basis().clone(), amps)
}
