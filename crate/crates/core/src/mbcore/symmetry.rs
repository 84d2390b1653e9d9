//! Particle-hole symmetry 𝒮_B and local σᶻ gauge rotations.

use num_complex::Complex64 as C64;

use super::operator::ManyBodyOperator;
use super::state::StateVector;
use crate::error::{Error, Result};

/// `Π_i (b_i + b_i†) ∘ K`: the amplitude of `s` becomes the conjugated
/// amplitude of its bitwise complement.
pub fn apply_symmetry_sb(psi: &StateVector) -> Result<StateVector> {
    let basis = psi.basis();
    if !basis.is_full() {
        return Err(Error::Contract(
            "𝒮_B changes particle number and needs the full basis".into(),
        ));
    }
    let mask = basis.site_mask() as usize;
    let a = psi.amplitudes();
    let out: Vec<C64> = (0..a.len()).map(|s| a[!s & mask].conj()).collect();
    StateVector::from_amplitudes(basis.clone(), out)
}

/// `U H U†` with `U = Π_{k∈sites} exp(−i(φ/2)σᶻ_k)`, `σᶻ = +1` on an empty site.
pub fn apply_local_z_rotation(
    op: &ManyBodyOperator,
    sites: &[usize],
    phi: f64,
) -> Result<ManyBodyOperator> {
    let basis = op.basis();
    if let Some(&bad) = sites.iter().find(|&&k| k >= basis.n_sites()) {
        return Err(Error::Contract(format!("site index {bad} out of range")));
    }
    let phases: Vec<C64> = (0..basis.dim())
        .map(|r| {
            let s = basis.unrank(r);
            let z: i32 = sites
                .iter()
                .map(|&k| if s >> k & 1 == 1 { -1 } else { 1 })
                .sum();
            C64::from_polar(1.0, -0.5 * phi * z as f64)
        })
        .collect();
    op.conjugated(phases)
}

/// `‖[H, 𝒮_B] ψ‖` for a given full-basis state.
pub fn sb_commutator_residual(op: &ManyBodyOperator, psi: &StateVector) -> Result<f64> {
    let a = op.apply(&apply_symmetry_sb(psi)?)?;
    let b = apply_symmetry_sb(&op.apply(psi)?)?;
    let diff: f64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok(diff.sqrt())
}
