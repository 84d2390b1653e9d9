//! Lowest eigenpairs by Lanczos with full reorthogonalization and explicit
//! deflation: each pair is found in the orthogonal complement of those
//! already locked, so exact degeneracies are resolved one vector at a time.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mbcore::{dot, norm_sqr, ManyBodyOperator, StateVector};
use crate::par;

/// Seed of the deterministic start vectors.
pub const LANCZOS_SEED: u64 = 0x5eed_1a2c_2025;

/// Eigenvalues closer than this form a reported degenerate cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov vectors per restart cycle.
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Residual target relative to the operator norm bound.
    pub rel_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_krylov: 120,
            max_restarts: 60,
            rel_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
    /// `‖Hv − λv‖` per pair.
    pub residuals: Vec<f64>,
    /// Index ranges whose internal spread is below [`CLUSTER_TOL`].
    pub clusters: Vec<std::ops::Range<usize>>,
}

pub fn lowest_eigenpairs(op: &ManyBodyOperator, k: usize) -> Result<Eigenpairs> {
    lowest_eigenpairs_with(op, k, &LanczosOptions::default())
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    par::for_each_chunk(y, |off, chunk| {
        for (i, v) in chunk.iter_mut().enumerate() {
            *v += a * x[off + i];
        }
    });
}

fn orthogonalize(w: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in against {
            let c = dot(b, w);
            axpy(w, -c, b);
        }
    }
}

fn scale(v: &mut [C64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

pub fn lowest_eigenpairs_with(
    op: &ManyBodyOperator,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Eigenpairs> {
    let dim = op.dim();
    if k > dim {
        return Err(Error::Contract(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    let norm = op.norm_bound().max(1e-300);
    let tol = opts.rel_tol * norm;
    let mut locked: Vec<Vec<C64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for target in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED ^ target as u64);
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0))
            .collect();
        let (mut best_val, mut best_vec, mut best_res) = (0.0, Vec::new(), f64::INFINITY);
        let mut converged = false;
        for _restart in 0..opts.max_restarts {
            orthogonalize(&mut v, &locked);
            let nv = norm_sqr(&v).sqrt();
            if !(nv > 1e-300) {
                return Err(Error::Numerical(
                    "Lanczos start vector vanished after deflation".into(),
                ));
            }
            scale(&mut v, 1.0 / nv);
            let room = dim - locked.len();
            let m_max = opts.max_krylov.min(room);
            let mut basis: Vec<Vec<C64>> = vec![v.clone()];
            // Projected matrix ⟨q_i|H|q_j⟩, column by column, including the
            // reorthogonalization coefficients so near-breakdowns stay consistent.
            let mut proj: Vec<Vec<C64>> = Vec::new();
            let mut exhausted = false;
            loop {
                let q = basis.last().unwrap();
                let mut w = op.apply_vec(q);
                orthogonalize(&mut w, &locked);
                let coeffs = project_out(&mut w, &basis);
                proj.push(coeffs);
                // Near a breakdown the division by a small `b` below would
                // amplify roundoff along the locked vectors.
                orthogonalize(&mut w, &locked);
                let b = norm_sqr(&w).sqrt();
                let m = proj.len();
                let stop = b <= 1e-13 * norm || m >= m_max;
                if b <= 1e-13 * norm {
                    exhausted = true;
                }
                if stop || m.is_multiple_of(10) {
                    let (_theta, y) = lowest_ritz(&proj);
                    let est = b * y[m - 1].norm();
                    if est <= tol || stop {
                        let mut x = vec![C64::new(0.0, 0.0); dim];
                        for (j, bj) in basis.iter().take(m).enumerate() {
                            axpy(&mut x, y[j], bj);
                        }
                        orthogonalize(&mut x, &locked);
                        let nx = norm_sqr(&x).sqrt();
                        scale(&mut x, 1.0 / nx);
                        let hx = op.apply_vec(&x);
                        let rq = dot(&x, &hx).re;
                        let mut r = hx;
                        axpy(&mut r, C64::new(-rq, 0.0), &x);
                        orthogonalize(&mut r, &locked);
                        let res = norm_sqr(&r).sqrt();
                        if res < best_res {
                            best_val = rq;
                            best_vec = x.clone();
                            best_res = res;
                        }
                        if res <= tol.max(1e-14 * norm) {
                            converged = true;
                        }
                        v = x;
                        break;
                    }
                }
                scale(&mut w, 1.0 / b);
                basis.push(w);
            }
            if converged || (exhausted && best_res <= 1e-8 * norm) {
                converged = true;
                break;
            }
        }
        if !converged && best_res > 1e-8 * norm {
            return Err(Error::Numerical(format!(
                "eigenpair {target} did not converge after {} restarts (residual {best_res:.3e}, bound {:.3e})",
                opts.max_restarts,
                1e-8 * norm
            )));
        }
        values.push(best_val);
        residuals.push(best_res);
        locked.push(best_vec);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
    let basis = op.basis().clone();
    let vectors = order
        .iter()
        .map(|&i| StateVector::from_amplitudes(basis.clone(), gauge_fix(locked[i].clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Eigenpairs {
        clusters: clusters(&values),
        values,
        vectors,
        residuals,
    })
}

/// Multiply by a phase so the largest-magnitude component is real positive.
pub fn gauge_fix(mut v: Vec<C64>) -> Vec<C64> {
    let mut big = C64::new(0.0, 0.0);
    for x in &v {
        if x.norm() > big.norm() * (1.0 + 1e-12) {
            big = *x;
        }
    }
    if big.norm() > 0.0 {
        let p = big.conj() / big.norm();
        v.iter_mut().for_each(|x| *x *= p);
    }
    v
}

fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[start] >= CLUSTER_TOL {
            if i - start > 1 {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Two-pass Gram–Schmidt of `w` against `basis`, returning the accumulated coefficients.
fn project_out(w: &mut [C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        for (c, b) in coeffs.iter_mut().zip(basis) {
            let d = dot(b, w);
            axpy(w, -d, b);
            *c += d;
        }
    }
    coeffs
}

/// Lowest eigenpair of the projected matrix, taken Hermitian from its upper triangle.
fn lowest_ritz(proj: &[Vec<C64>]) -> (f64, Vec<C64>) {
    let m = proj.len();
    let mut t = DMatrix::<C64>::zeros(m, m);
    for (j, col) in proj.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            t[(i, j)] = if i == j { C64::new(c.re, 0.0) } else { *c };
            t[(j, i)] = t[(i, j)].conj();
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap();
    (val, eig.eigenvectors.column(idx).iter().copied().collect())
}
