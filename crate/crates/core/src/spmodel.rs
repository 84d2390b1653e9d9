//! Single-particle sector: spectrum of `Ĥ = −J`, chiral checks, edge modes
//! and the finite-size splitting of the edge pair.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    build_magic_chain_with, coupling_matrix, ChainConfig, CouplingMatrix, MagicLayout, Sublattice,
};
use crate::par;

/// Eigenvalues closer than this are treated as one degenerate cluster.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SingleParticleSpectrum {
    /// Ascending, in MHz.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    pub chiral_residual: f64,
    /// `‖ĤV − VΛ‖_max`.
    pub residual: f64,
    pub sublattice: Vec<Sublattice>,
}

/// `Ĥ_ij = −J_ij`.
pub fn single_particle_matrix(j: &CouplingMatrix) -> DMatrix<f64> {
    let n = j.n();
    DMatrix::from_fn(n, n, |a, b| -j.get(a, b))
}

/// Dense symmetric eigendecomposition, sorted ascending and gauge fixed.
///
/// Degenerate clusters are rotated to diagonalize the sublattice operator,
/// then each vector's largest-magnitude component is made positive.
pub fn diagonalize(j: &CouplingMatrix) -> SingleParticleSpectrum {
    let h = single_particle_matrix(j);
    let n = j.n();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let signs: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.columns(start, end - start).into_owned();
            let us = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs.clone()));
            let proj = block.transpose() * &us * &block;
            let inner = SymmetricEigen::new(proj);
            let mut idx: Vec<usize> = (0..end - start).collect();
            idx.sort_by(|&a, &b| inner.eigenvalues[b].total_cmp(&inner.eigenvalues[a]));
            let rot = DMatrix::from_fn(end - start, end - start, |r, c| {
                inner.eigenvectors[(r, idx[c])]
            });
            let rotated = block * rot;
            vecs.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    for c in 0..n {
        let mut col = vecs.column_mut(c);
        let big = col.iter().copied().fold(
            0.0_f64,
            |m, x| if x.abs() > m.abs() + 1e-14 { x } else { m },
        );
        if big < 0.0 {
            col.neg_mut();
        }
    }
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    let residual = (&h * &vecs - &vecs * lambda).amax();
    SingleParticleSpectrum {
        eigenvalues: values,
        eigenvectors: vecs,
        chiral_residual: chiral_residual(j),
        residual,
        sublattice: j.sublattice().to_vec(),
    }
}

/// `‖U_S Ĥ U_S† + Ĥ‖_max` with `U_S = diag(+1, −1, +1, …)`.
pub fn chiral_residual(j: &CouplingMatrix) -> f64 {
    let n = j.n();
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let s = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let h = -j.get(a, b);
            worst = worst.max((s * h + h).abs());
        }
    }
    worst
}

impl SingleParticleSpectrum {
    /// Gap between the two central bands of a finite open chain, skipping
    /// modes inside `edge_window` of zero.
    pub fn finite_band_gap(&self, edge_window: f64) -> f64 {
        let upper = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|&e| e >= edge_window)
            .fold(f64::INFINITY, f64::min);
        let lower = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|&e| e <= -edge_window)
            .fold(f64::NEG_INFINITY, f64::max);
        upper - lower
    }

    pub fn weights(&self, mode: usize) -> Vec<f64> {
        self.eigenvectors
            .column(mode)
            .iter()
            .map(|x| x * x)
            .collect()
    }
}

/// Bulk gap of the two-band Bloch Hamiltonian assembled from the couplings
/// of the central unit cell to every other site of the chain.
pub fn bulk_band_gap(j: &CouplingMatrix, k_samples: usize) -> Result<f64> {
    let n = j.n();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "bulk gap needs an even chain of ≥ 4 sites, got {n}"
        )));
    }
    let cells = n / 2;
    let c0 = (cells / 2) * 2;
    let m = k_samples.max(2) & !1;
    let mut top = f64::NEG_INFINITY;
    let mut bottom = f64::INFINITY;
    for step in 0..m {
        let k = 2.0 * PI * step as f64 / m as f64;
        let mut hk = Matrix2::<C64>::zeros();
        for cell in 0..cells {
            let dist = cell as f64 - (c0 / 2) as f64;
            let phase = C64::from_polar(1.0, k * dist);
            for a in 0..2 {
                for b in 0..2 {
                    let site = 2 * cell + b;
                    if site == c0 + a {
                        continue;
                    }
                    hk[(a, b)] += -j.get(c0 + a, site) * phase;
                }
            }
        }
        let herm = (hk + hk.adjoint()) * C64::new(0.5, 0.0);
        let tr = 0.5 * (herm[(0, 0)].re + herm[(1, 1)].re);
        let det_dev = (0.5 * (herm[(0, 0)].re - herm[(1, 1)].re)).hypot(herm[(0, 1)].norm());
        bottom = bottom.min(tr + det_dev);
        top = top.max(tr - det_dev);
    }
    Ok(bottom - top)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeModeReport {
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// Per-mode site weights `|ψ_i|²`.
    pub weights: Vec<Vec<f64>>,
    /// Decay length of the amplitude, in sites, from the left edge.
    pub localization_length: Option<f64>,
    pub e_hyb: Option<f64>,
}

/// Mid-gap modes. With `window = None` the two eigenvalues closest to zero
/// are taken; otherwise every mode with `|E| < window`.
pub fn edge_modes(spec: &SingleParticleSpectrum, window: Option<f64>) -> Result<EdgeModeReport> {
    let n = spec.eigenvalues.len();
    let indices: Vec<usize> = match window {
        Some(w) => {
            let found: Vec<usize> = (0..n).filter(|&k| spec.eigenvalues[k].abs() < w).collect();
            if found.len() > 2 {
                return Err(Error::Ambiguity(format!(
                    "{} modes inside |E| < {w} MHz; shrink the window",
                    found.len()
                )));
            }
            found
        }
        None => {
            let mut by_abs: Vec<usize> = (0..n).collect();
            by_abs.sort_by(|&a, &b| {
                spec.eigenvalues[a]
                    .abs()
                    .total_cmp(&spec.eigenvalues[b].abs())
            });
            let mut two: Vec<usize> = by_abs.into_iter().take(2).collect();
            two.sort_unstable();
            two
        }
    };
    let energies: Vec<f64> = indices.iter().map(|&k| spec.eigenvalues[k]).collect();
    let weights: Vec<Vec<f64>> = indices.iter().map(|&k| spec.weights(k)).collect();
    let e_hyb = (energies.len() == 2).then(|| (energies[1] - energies[0]).abs());
    let localization_length = if weights.is_empty() {
        None
    } else {
        localization_length(&weights)
    };
    Ok(EdgeModeReport {
        indices,
        energies,
        weights,
        localization_length,
        e_hyb,
    })
}

/// Least-squares slope of `ln w` on the dominant sublattice of the left
/// half, converted to an amplitude decay length.
fn localization_length(weights: &[Vec<f64>]) -> Option<f64> {
    let n = weights[0].len();
    let total: Vec<f64> = (0..n)
        .map(|i| weights.iter().map(|w| w[i]).sum::<f64>())
        .collect();
    let half = n / 2;
    let even: f64 = (0..half).step_by(2).map(|i| total[i]).sum();
    let odd: f64 = (1..half).step_by(2).map(|i| total[i]).sum();
    let first = if even >= odd { 0 } else { 1 };
    let pts: Vec<(f64, f64)> = (first..half)
        .step_by(2)
        .filter(|&i| total[i] >= 1e-12)
        .map(|i| (i as f64, total[i].ln()))
        .collect();
    let slope = linear_fit(&pts)?.0;
    (slope < 0.0).then(|| -2.0 / slope)
}

/// Ordinary least squares `y = a x + b`; returns `(a, b)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

/// Splitting of the two eigenvalues of `Ĥ` closest to zero.
pub fn mid_gap_splitting(j: &CouplingMatrix) -> f64 {
    let mut e: Vec<f64> = single_particle_matrix(j)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    e.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    (e[0] - e[1]).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridizationModel {
    NearestNeighbor,
    FullDipolar,
}

/// Inclusive chain-length segments used for the two fits.
#[derive(Debug, Clone, Copy)]
pub struct ScanSegments {
    pub exponential: (usize, usize),
    pub algebraic: (usize, usize),
}

impl Default for ScanSegments {
    fn default() -> Self {
        Self {
            exponential: (4, 20),
            algebraic: (60, 100),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridizationScan {
    pub points: Vec<(usize, f64)>,
    /// Slope of `ln E_hyb` against N on the exponential segment.
    pub exponential_slope: Option<f64>,
    /// Slope of `ln E_hyb` against `ln N` on the algebraic segment (full dipolar only).
    pub loglog_slope: Option<f64>,
}

/// Below this the splitting is lost in rounding and excluded from fits.
const E_HYB_FLOOR: f64 = 1e-12;

pub fn hybridization_scan(
    n_max: usize,
    model: HybridizationModel,
    j: f64,
    j_prime: f64,
) -> Result<HybridizationScan> {
    hybridization_scan_with(
        n_max,
        model,
        j,
        j_prime,
        &MagicLayout::default(),
        ScanSegments::default(),
    )
}

pub fn hybridization_scan_with(
    n_max: usize,
    model: HybridizationModel,
    j: f64,
    j_prime: f64,
    layout: &MagicLayout,
    segments: ScanSegments,
) -> Result<HybridizationScan> {
    if n_max < 4 || !n_max.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "n_max must be even and ≥ 4, got {n_max}"
        )));
    }
    let sizes: Vec<usize> = (4..=n_max).step_by(2).collect();
    let points = par::try_map_indexed(sizes.len(), |k| {
        let n = sizes[k];
        let m = match model {
            HybridizationModel::NearestNeighbor => CouplingMatrix::ssh(n, j, j_prime),
            HybridizationModel::FullDipolar => {
                let chain =
                    build_magic_chain_with(n, j, j_prime, ChainConfig::Topological, layout)?;
                coupling_matrix(&chain.geometry, None)?
            }
        };
        Ok::<_, Error>((n, mid_gap_splitting(&m)))
    })?;
    let in_seg = |n: usize, seg: (usize, usize)| n >= seg.0 && n <= seg.1;
    let exp_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, e)| in_seg(n, segments.exponential) && e > E_HYB_FLOOR)
        .map(|&(n, e)| (n as f64, e.ln()))
        .collect();
    let log_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, e)| in_seg(n, segments.algebraic) && e > E_HYB_FLOOR)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    Ok(HybridizationScan {
        exponential_slope: linear_fit(&exp_pts).map(|f| f.0),
        loglog_slope: match model {
            HybridizationModel::FullDipolar => linear_fit(&log_pts).map(|f| f.0),
            HybridizationModel::NearestNeighbor => None,
        },
        points,
    })
}
