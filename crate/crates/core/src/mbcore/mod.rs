//! Many-body foundation: bases, Hamiltonians, states and symmetries.

mod basis;
mod local;
mod operator;
mod spec;
mod state;
mod symmetry;

pub use basis::{binomial, FockBasis, MAX_SITES};
pub use local::{apply_local_unitary, drive_rotation, SiteUnitary};
pub use operator::{
    build_boson_hamiltonian, build_fermion_hamiltonian, ManyBodyOperator, DENSE_CEILING,
    SPARSE_CEILING,
};
pub use spec::{build_xxz_hamiltonian, HamiltonianSpec, Statistics};
pub use state::{dot, norm_sqr, StateVector};
pub use symmetry::{apply_local_z_rotation, apply_symmetry_sb, sb_commutator_residual};

use std::sync::Arc;

use crate::error::Result;

/// Shared-handle convenience around [`FockBasis::new`].
pub fn build_basis(n_sites: usize, sector: Option<usize>) -> Result<Arc<FockBasis>> {
    Ok(Arc::new(FockBasis::new(n_sites, sector)?))
}

#[cfg(test)]
mod tests;
