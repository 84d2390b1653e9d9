//! Numerical kernels: Krylov time evolution and Lanczos eigensolver.

mod krylov;
mod lanczos;
mod schedule;

pub use krylov::{evolve, evolve_sampled, EvolutionControls, Propagator, Scheduled};
pub use lanczos::{
    gauge_fix, lowest_eigenpairs, lowest_eigenpairs_with, Eigenpairs, LanczosOptions, CLUSTER_TOL,
    LANCZOS_SEED,
};
pub use schedule::{Breakpoint, CanonicalTimings, SweepSchedule};
