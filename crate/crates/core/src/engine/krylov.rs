//! Short-iterative Lanczos propagation of `exp(−2πi H t)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::schedule::SweepSchedule;
use crate::error::{Error, Result};
use crate::mbcore::{dot, norm_sqr, ManyBodyOperator, StateVector};
use crate::par;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionControls {
    pub krylov_dim: usize,
    /// Bound on the estimated error of each substep.
    pub step_tol: f64,
    /// Longest substep in μs; also bounds the midpoint-rule error of
    /// time-dependent Hamiltonians.
    pub max_substep: f64,
    /// Bisection floor in μs.
    pub min_substep: f64,
}

impl Default for EvolutionControls {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            step_tol: 1e-8,
            max_substep: 0.005,
            min_substep: 1e-10,
        }
    }
}

impl EvolutionControls {
    pub fn validate(&self) -> Result<()> {
        if self.krylov_dim < 2
            || !(self.step_tol > 0.0)
            || !(self.max_substep > 0.0)
            || !(self.min_substep > 0.0)
        {
            return Err(Error::Contract(format!(
                "invalid evolution controls {self:?}"
            )));
        }
        Ok(())
    }
}

/// A Hamiltonian that may depend on time.
pub trait Propagator: Sync {
    fn at(&self, t: f64) -> Result<ManyBodyOperator>;
    /// Whether `at` ignores `t`.
    fn is_static(&self) -> bool;
    /// Times where the time dependence has kinks; substeps never straddle them.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Propagator for ManyBodyOperator {
    fn at(&self, _t: f64) -> Result<ManyBodyOperator> {
        Ok(self.clone())
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// Static terms of `base` with drive and detuning following `schedule`.
pub struct Scheduled<'a> {
    pub base: &'a ManyBodyOperator,
    pub schedule: &'a SweepSchedule,
}

impl Propagator for Scheduled<'_> {
    fn at(&self, t: f64) -> Result<ManyBodyOperator> {
        let (rabi, detuning) = self.schedule.at(t);
        self.base.with_controls(rabi, detuning)
    }
    fn is_static(&self) -> bool {
        false
    }
    fn kinks(&self) -> Vec<f64> {
        self.schedule.times()
    }
}

/// Krylov basis of a normalized vector with its tridiagonal projection.
struct Krylov {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last basis vector.
    tail: f64,
    norm0: f64,
}

impl Krylov {
    fn start(v: &[C64]) -> Result<Self> {
        let norm0 = norm_sqr(v).sqrt();
        if !(norm0 > 0.0) || !norm0.is_finite() {
            return Err(Error::Numerical(
                "Krylov start vector has zero or non-finite norm".into(),
            ));
        }
        let q: Vec<C64> = v.iter().map(|x| x / norm0).collect();
        Ok(Self {
            basis: vec![q],
            alpha: Vec::new(),
            beta: Vec::new(),
            tail: 0.0,
            norm0,
        })
    }

    /// Extend by one Lanczos step with full reorthogonalization.
    fn extend(&mut self, op: &ManyBodyOperator) -> bool {
        let q = self.basis.last().unwrap();
        let mut w = op.apply_vec(q);
        let a = dot(q, &w).re;
        for _pass in 0..2 {
            for b in &self.basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
        }
        let nrm = norm_sqr(&w).sqrt();
        self.alpha.push(a);
        self.tail = nrm;
        if nrm <= 1e-14 * (1.0 + a.abs()) {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        self.beta.push(nrm);
        self.basis.push(w);
        true
    }

    fn m(&self) -> usize {
        self.alpha.len()
    }

    fn tridiagonal(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        let m = self.m();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        SymmetricEigen::new(t)
    }
}

/// `exp(−2πi dt T) e₁` from the eigendecomposition of `T`.
fn small_propagate(eig: &SymmetricEigen<f64, nalgebra::Dyn>, dt: f64) -> DVector<C64> {
    let m = eig.eigenvalues.len();
    let mut out = DVector::zeros(m);
    for k in 0..m {
        let w = eig.eigenvectors[(0, k)] * C64::from_polar(1.0, -TWO_PI * dt * eig.eigenvalues[k]);
        for r in 0..m {
            out[r] += eig.eigenvectors[(r, k)] * w;
        }
    }
    out
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    par::for_each_chunk(y, |off, chunk| {
        for (k, v) in chunk.iter_mut().enumerate() {
            *v += a * x[off + k];
        }
    });
}

/// One attempted substep. Returns the new vector and the step taken, or
/// `None` when `dt` was too long for the Krylov dimension.
fn try_step(
    op: &ManyBodyOperator,
    psi: &[C64],
    dt: f64,
    controls: &EvolutionControls,
    shrink: bool,
) -> Result<Option<(Vec<C64>, f64)>> {
    let mut kr = Krylov::start(psi)?;
    let mut dt = dt;
    loop {
        let grew = kr.extend(op);
        let eig = kr.tridiagonal();
        let c = small_propagate(&eig, dt);
        let err = kr.tail * c[kr.m() - 1].norm() * kr.norm0;
        let done = !grew || err <= controls.step_tol;
        if done || kr.m() >= controls.krylov_dim {
            if !done {
                if !shrink {
                    return Ok(None);
                }
                // Static Hamiltonian: keep the basis and shorten the step instead.
                let mut lo = 0.0;
                let mut hi = dt;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let e = kr.tail * small_propagate(&eig, mid)[kr.m() - 1].norm() * kr.norm0;
                    if e <= controls.step_tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if lo < controls.min_substep {
                    return Ok(None);
                }
                dt = lo;
            }
            let c = small_propagate(&eig, dt);
            let dim = psi.len();
            let mut out = vec![C64::new(0.0, 0.0); dim];
            let basis = &kr.basis;
            let norm0 = kr.norm0;
            let m = kr.m();
            par::for_each_chunk(&mut out, |off, chunk| {
                for (k, v) in chunk.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..m {
                        acc += basis[j][off + k] * c[j];
                    }
                    *v = acc * norm0;
                }
            });
            return Ok(Some((out, dt)));
        }
    }
}

/// Advance `psi` from `t0` to `t1`, never stepping across a kink.
fn advance(
    h: &dyn Propagator,
    psi: Vec<C64>,
    t0: f64,
    t1: f64,
    controls: &EvolutionControls,
    kinks: &[f64],
) -> Result<Vec<C64>> {
    let mut psi = psi;
    let mut t = t0;
    let is_static = h.is_static();
    let static_op = if is_static { Some(h.at(t0)?) } else { None };
    let mut dt_try = controls.max_substep;
    while t1 - t > 1e-13 * (1.0 + t1.abs()) {
        let next_kink = kinks
            .iter()
            .copied()
            .filter(|&k| k > t + 1e-13)
            .fold(t1, f64::min);
        let span = next_kink - t;
        let mut dt = dt_try.min(span);
        loop {
            let result = match &static_op {
                Some(op) => try_step(op, &psi, span, controls, true)?,
                None => {
                    let op = h.at(t + 0.5 * dt)?;
                    try_step(&op, &psi, dt, controls, false)?
                }
            };
            match result {
                Some((next, taken)) => {
                    psi = next;
                    t = if (t + taken - next_kink).abs() <= 1e-13 * (1.0 + next_kink.abs()) {
                        next_kink
                    } else {
                        t + taken
                    };
                    if !is_static {
                        dt_try = (dt * 2.0).min(controls.max_substep);
                    }
                    break;
                }
                None if is_static => {
                    return Err(Error::Numerical(format!(
                        "static substep at t = {t} μs fell below the floor {} μs (Krylov dim {}, tol {})",
                        controls.min_substep, controls.krylov_dim, controls.step_tol
                    )));
                }
                None => {
                    dt *= 0.5;
                    if dt < controls.min_substep {
                        return Err(Error::Numerical(format!(
                            "substep at t = {t} μs fell below the floor {} μs (Krylov dim {}, tol {})",
                            controls.min_substep, controls.krylov_dim, controls.step_tol
                        )));
                    }
                    dt_try = dt;
                }
            }
        }
    }
    Ok(psi)
}

/// `ψ(t1) = T exp(−2πi ∫ H dt) ψ(t0)`; time dependence by the midpoint rule.
pub fn evolve(
    h: &dyn Propagator,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    controls: &EvolutionControls,
) -> Result<StateVector> {
    let mut last = None;
    evolve_sampled(h, psi0, &[t0, t1], controls, |_, _, s| {
        last = Some(s.clone())
    })?;
    Ok(last.expect("final sample"))
}

/// Evolve through the sorted `times`, calling `observe(k, t_k, ψ(t_k))` at
/// each, including the first. Returns the state at the last time.
pub fn evolve_sampled<F>(
    h: &dyn Propagator,
    psi0: &StateVector,
    times: &[f64],
    controls: &EvolutionControls,
    mut observe: F,
) -> Result<StateVector>
where
    F: FnMut(usize, f64, &StateVector),
{
    controls.validate()?;
    if times.is_empty() {
        return Err(Error::Contract("no sample times".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Contract(
            "sample times must be non-decreasing".into(),
        ));
    }
    let basis = psi0.basis().clone();
    let kinks = h.kinks();
    let mut psi = psi0.amplitudes().to_vec();
    observe(0, times[0], psi0);
    for k in 1..times.len() {
        if times[k] > times[k - 1] {
            psi = advance(h, psi, times[k - 1], times[k], controls, &kinks)?;
        }
        let state = StateVector::from_amplitudes(basis.clone(), psi)?;
        observe(k, times[k], &state);
        psi = state.into_amplitudes();
    }
    StateVector::from_amplitudes(basis, psi)
}
