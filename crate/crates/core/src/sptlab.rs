//! Symmetry-protected topological classification of dimer MPS.
//!
//! Unit cells hold two spins with local states `0 = ↑` (empty) and `1 = ↓`
//! (particle); the cell index is `2i + j`. The symmetry group is U(1)×Z₂ᵀ
//! with elements `R_φ S^a`, acting on a cell as `r̃(φ) ∘ s̃^a` where
//! `r̃(φ) = exp(−iφ(σᶻ₁ + σᶻ₂)/2)` and `s̃ = σˣ₁σˣ₂ K`.
//!
//! Bond matrices follow one phase convention throughout: `|det V| = 1` and
//! the first entry (row-major) above `1e-8·max|V|` is real positive. For
//! antiunitary elements the composite convention `V(R_φ S) := V(R_φ) V(S)`
//! is used, which fixes `χ(R_φ, S) = 1`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CouplingMatrix;
use crate::mbcore::{
    build_basis, build_boson_hamiltonian, build_fermion_hamiltonian, HamiltonianSpec, StateVector,
    Statistics,
};

const SYMMETRY_TOL: f64 = 1e-8;
const CONSISTENCY_TOL: f64 = 1e-10;
/// Largest integer character tried when trivializing a cocycle.
pub const K_MAX: i32 = 8;
const TRIVIALIZATION_TOL: f64 = 0.1;

/// Translation-invariant MPS with periodic trace boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Mps {
    /// `matrices[2i + j]` is `A^{ij}`.
    pub matrices: Vec<DMatrix<C64>>,
    pub cells: usize,
}

impl Mps {
    pub fn new(matrices: Vec<DMatrix<C64>>, cells: usize) -> Result<Self> {
        if matrices.len() != 4 {
            return Err(Error::Construction(format!(
                "need 4 matrices per cell, got {}",
                matrices.len()
            )));
        }
        let d = matrices[0].nrows();
        if d == 0 || matrices.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Construction(
                "MPS matrices must share one square shape".into(),
            ));
        }
        if cells == 0 {
            return Err(Error::Construction("an MPS needs at least one cell".into()));
        }
        Ok(Self { matrices, cells })
    }

    pub fn bond_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    /// Dense normalized state on `2·cells` sites, bit `2k` holding the first spin of cell `k`.
    pub fn contract(&self) -> Result<StateVector> {
        let l = self.cells;
        let basis = build_basis(2 * l, None)?;
        let d = self.bond_dim();
        let amps: Vec<C64> = (0..basis.dim())
            .map(|s| {
                let mut p = DMatrix::<C64>::identity(d, d);
                for k in 0..l {
                    let bits = (s >> (2 * k)) & 0b11;
                    p *= &self.matrices[2 * (bits & 1) + (bits >> 1)];
                }
                p.trace()
            })
            .collect();
        StateVector::from_amplitudes(basis, amps)?.normalized()
    }
}

fn local_index(i: usize, j: usize) -> usize {
    // Cell index `2i + j` maps to bits `i | j << 1` of the contracted state.
    i | (j << 1)
}

fn real(m: DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Exact ground states at the perfectly dimerized points:
/// `A^{ij} = |i⟩⟨1−j|` (D = 2) and `B^{ij} = σˣ_{ij}` (D = 1).
pub fn mps_ground_states(cells: usize) -> Result<(Mps, Mps)> {
    let mut top = Vec::with_capacity(4);
    let mut triv = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut a = DMatrix::<f64>::zeros(2, 2);
            a[(i, 1 - j)] = 1.0;
            top.push(real(a));
            triv.push(real(DMatrix::from_element(
                1,
                1,
                if i != j { 1.0 } else { 0.0 },
            )));
        }
    }
    Ok((Mps::new(top, cells)?, Mps::new(triv, cells)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    /// Rotation angle in `[0, 2π)`.
    pub phi: f64,
    pub antiunitary: bool,
}

impl GroupElement {
    pub fn new(phi: f64, antiunitary: bool) -> Self {
        Self {
            phi: phi.rem_euclid(TAU),
            antiunitary,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, false)
    }

    pub fn rotation(phi: f64) -> Self {
        Self::new(phi, false)
    }

    pub fn s() -> Self {
        Self::new(0.0, true)
    }

    pub fn compose(self, other: Self) -> Self {
        Self::new(self.phi + other.phi, self.antiunitary ^ other.antiunitary)
    }

    pub fn sigma(self) -> i32 {
        if self.antiunitary {
            -1
        } else {
            1
        }
    }

    fn same(self, other: Self) -> bool {
        let d = (self.phi - other.phi).rem_euclid(TAU);
        self.antiunitary == other.antiunitary && d.min(TAU - d) < 1e-12
    }
}

/// On-site action on one cell: `u` and whether complex conjugation follows it.
fn onsite(g: GroupElement) -> DMatrix<C64> {
    let z = |s: usize| 1.0 - 2.0 * s as f64;
    let mut r = DMatrix::<C64>::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let c = 2 * i + j;
            r[(c, c)] = C64::from_polar(1.0, -0.5 * g.phi * (z(i) + z(j)));
        }
    }
    if g.antiunitary {
        // σˣ⊗σˣ maps cell index c to 3 − c.
        let mut flip = DMatrix::<C64>::zeros(4, 4);
        for c in 0..4 {
            flip[(3 - c, c)] = C64::new(1.0, 0.0);
        }
        r * flip
    } else {
        r
    }
}

/// `Σ_c π(g)_{c'c} A^c`, conjugating `A` first for antiunitary `g`.
fn transform(mps: &Mps, g: GroupElement) -> Vec<DMatrix<C64>> {
    let u = onsite(g);
    (0..4)
        .map(|cp| {
            let d = mps.bond_dim();
            let mut acc = DMatrix::<C64>::zeros(d, d);
            for c in 0..4 {
                let a = if g.antiunitary {
                    mps.matrices[c].map(|x| x.conj())
                } else {
                    mps.matrices[c].clone()
                };
                acc += a * u[(cp, c)];
            }
            acc
        })
        .collect()
}

/// Global symmetry action on a dense state of whole cells.
pub fn apply_global(psi: &StateVector, g: GroupElement) -> Result<StateVector> {
    let n = psi.n_sites();
    if !psi.basis().is_full() || !n.is_multiple_of(2) {
        return Err(Error::Contract(
            "global symmetry needs a full basis of whole cells".into(),
        ));
    }
    let u = onsite(g);
    let cells = n / 2;
    let src = psi.amplitudes();
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    for (s, o) in out.iter_mut().enumerate() {
        // Each cell's u is a permutation times a phase, so one source term survives.
        let mut phase = C64::new(1.0, 0.0);
        let mut from = 0usize;
        for k in 0..cells {
            let bits = (s >> (2 * k)) & 0b11;
            let cp = 2 * (bits & 1) + (bits >> 1);
            let c = (0..4)
                .find(|&c| u[(cp, c)].norm() > 0.0)
                .expect("permutation");
            phase *= u[(cp, c)];
            from |= local_index(c >> 1, c & 1) << (2 * k);
        }
        let a = if g.antiunitary {
            src[from].conj()
        } else {
            src[from]
        };
        *o = phase * a;
    }
    StateVector::from_amplitudes(psi.basis().clone(), out)
}

/// `M` with `M·vec(X) = vec(Σ_c L^c X (R^c)†)`, column-major.
fn transfer(left: &[DMatrix<C64>], right: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = left[0].nrows();
    let mut m = DMatrix::<C64>::zeros(d * d, d * d);
    for (l, r) in left.iter().zip(right) {
        m += r.map(|x| x.conj()).kronecker(l);
    }
    m
}

/// Dominant eigenpair via Schur eigenvalues and an SVD null vector.
fn dominant(m: &DMatrix<C64>) -> Result<(C64, DMatrix<C64>)> {
    let n = m.nrows();
    let eig = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur eigenvalues unavailable".into()))?;
    let mut vals: Vec<C64> = eig.iter().copied().collect();
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mu = vals[0];
    if mu.norm() == 0.0 {
        return Err(Error::NotSymmetric("transfer operator vanishes".into()));
    }
    if n > 1
        && (vals[1] - mu).norm() > 1e-9 * mu.norm()
        && vals[1].norm() > mu.norm() * (1.0 - 1e-9)
    {
        return Err(Error::Ambiguity(
            "dominant transfer eigenvalue is not unique in modulus".into(),
        ));
    }
    let shifted = m - DMatrix::<C64>::identity(n, n) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let idx = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    let d = (n as f64).sqrt().round() as usize;
    let vec = v_t.row(idx).adjoint();
    Ok((mu, DMatrix::from_column_slice(d, d, vec.as_slice())))
}

/// Apply the canonical phase convention to a bond matrix.
pub fn canonical_phase(v: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let d = v.nrows();
    let det = v.determinant().norm();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::NotSymmetric("bond matrix is singular".into()));
    }
    let scaled = v / C64::new(det.powf(1.0 / d as f64), 0.0);
    let big = scaled.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let first = (0..d)
        .flat_map(|r| (0..d).map(move |c| (r, c)))
        .map(|rc| scaled[rc])
        .find(|x| x.norm() > 1e-8 * big)
        .expect("nonzero matrix");
    Ok(scaled * (first.conj() / first.norm()))
}

/// Bond-space action of one group element: `π(g)·A = γ V⁻¹ A V`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondAction {
    pub v: DMatrix<C64>,
    pub gamma: C64,
    pub antiunitary: bool,
}

/// Solve the gauge equation for `g` from the mixed transfer operator.
pub fn extract_projective(mps: &Mps, g: GroupElement) -> Result<BondAction> {
    let a = &mps.matrices;
    let (lambda, y_r) = dominant(&transfer(a, a))?;
    let transformed = transform(mps, g);
    let (mu, x) = dominant(&transfer(&transformed, a))?;
    let gamma = mu / lambda;
    if gamma.norm() < 1.0 - SYMMETRY_TOL {
        return Err(Error::NotSymmetric(format!(
            "mixed transfer eigenvalue modulus {:.3e} below 1 for {g:?}",
            gamma.norm()
        )));
    }
    let x_inv = x
        .try_inverse()
        .ok_or_else(|| Error::NotSymmetric("mixed fixed point is singular".into()))?;
    let v = canonical_phase(&(y_r * x_inv))?;
    let v_inv = v.clone().try_inverse().expect("canonical V is invertible");
    // The gauge equation must hold matrix by matrix, not only at the fixed point.
    let scale = a.iter().map(|m| m.norm()).fold(0.0, f64::max);
    for (t, m) in transformed.iter().zip(a) {
        let err = (t - &v_inv * m * &v * gamma).norm();
        if err > 1e-8 * scale {
            return Err(Error::NotSymmetric(format!(
                "gauge equation residual {err:.3e} for {g:?}"
            )));
        }
    }
    Ok(BondAction {
        v,
        gamma,
        antiunitary: g.antiunitary,
    })
}

/// Bond representation of an MPS with optional per-element rephasings `V(g) → f(g)V(g)`.
#[derive(Debug, Clone)]
pub struct ProjectiveRep {
    mps: Mps,
    rephasing: Vec<(GroupElement, C64)>,
}

impl ProjectiveRep {
    pub fn new(mps: &Mps) -> Result<Self> {
        extract_projective(mps, GroupElement::s())?;
        Ok(Self {
            mps: mps.clone(),
            rephasing: Vec::new(),
        })
    }

    pub fn bond_dim(&self) -> usize {
        self.mps.bond_dim()
    }

    /// Multiply `V(g)` by the unit phase `f`.
    pub fn with_rephasing(mut self, g: GroupElement, f: C64) -> Self {
        self.rephasing.retain(|(h, _)| !h.same(g));
        self.rephasing.push((g, f / f.norm()));
        self
    }

    fn phase_of(&self, g: GroupElement) -> C64 {
        self.rephasing
            .iter()
            .find(|(h, _)| h.same(g))
            .map(|p| p.1)
            .unwrap_or(C64::new(1.0, 0.0))
    }

    /// `V(g)` under the composite convention, including any rephasing.
    pub fn v(&self, g: GroupElement) -> Result<BondAction> {
        let rot = extract_projective(&self.mps, GroupElement::rotation(g.phi))?;
        if !g.antiunitary {
            return Ok(BondAction {
                v: rot.v * self.phase_of(g),
                ..rot
            });
        }
        let s = extract_projective(&self.mps, GroupElement::s())?;
        let v = &rot.v * &s.v;
        let direct = extract_projective(&self.mps, g)?;
        proportionality(&direct.v, &v)?;
        Ok(BondAction {
            v: v * self.phase_of(g),
            gamma: direct.gamma,
            antiunitary: true,
        })
    }
}

/// `c` with `p = c·q`, or an inconsistency error.
fn proportionality(q: &DMatrix<C64>, p: &DMatrix<C64>) -> Result<C64> {
    let d = q.nrows();
    let r = q
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InconsistentRepresentation("singular bond matrix".into()))?
        * p;
    let c = r.trace() / C64::new(d as f64, 0.0);
    let off = (&r - DMatrix::<C64>::identity(d, d) * c).norm();
    if off > CONSISTENCY_TOL * r.norm().max(1.0) {
        return Err(Error::InconsistentRepresentation(format!(
            "matrices not proportional, residual {off:.3e}"
        )));
    }
    Ok(c)
}

/// Twisted product `V(g₁) ∘ V(g₂)`: `V₂` is conjugated when `g₁` is antiunitary.
fn twisted_product(v1: &BondAction, v2: &BondAction) -> DMatrix<C64> {
    if v1.antiunitary {
        &v1.v * v2.v.map(|x| x.conj())
    } else {
        &v1.v * &v2.v
    }
}

/// `χ(g₁, g₂)` from `V(g₁) ∘ V(g₂) = χ V(g₁g₂)`.
pub fn cocycle(rep: &ProjectiveRep, g1: GroupElement, g2: GroupElement) -> Result<C64> {
    let v1 = rep.v(g1)?;
    let v2 = rep.v(g2)?;
    let v12 = rep.v(g1.compose(g2))?;
    proportionality(&v12.v, &twisted_product(&v1, &v2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SptClass {
    Trivial,
    Topological,
}

/// Classify an MPS by its U(1)×Z₂ᵀ cocycle class.
pub fn classify(mps: &Mps, phi_samples: &[f64]) -> Result<SptClass> {
    classify_rep(&ProjectiveRep::new(mps)?, phi_samples)
}

/// Classification from a possibly rephased representation. Every matrix is
/// first brought back to the canonical convention, so rephasings drop out.
pub fn classify_rep(rep: &ProjectiveRep, phi_samples: &[f64]) -> Result<SptClass> {
    check_samples(phi_samples)?;
    let canon = |g: GroupElement| -> Result<BondAction> {
        let b = rep.v(g)?;
        Ok(BondAction {
            v: canonical_phase(&b.v)?,
            ..b
        })
    };
    let s = canon(GroupElement::s())?;
    let chis = phi_samples
        .iter()
        .map(|&phi| {
            let r = canon(GroupElement::rotation(phi))?;
            // Composite convention on canonical generators.
            let sr = BondAction {
                v: &r.v * &s.v,
                gamma: s.gamma,
                antiunitary: true,
            };
            proportionality(&sr.v, &twisted_product(&s, &r))
        })
        .collect::<Result<Vec<C64>>>()?;
    let trivializable = (-K_MAX..=K_MAX).any(|k| {
        phi_samples.iter().zip(&chis).all(|(&phi, chi)| {
            (chi * C64::from_polar(1.0, 2.0 * k as f64 * phi) - 1.0).norm() <= TRIVIALIZATION_TOL
        })
    });
    Ok(if trivializable {
        SptClass::Trivial
    } else {
        SptClass::Topological
    })
}

fn check_samples(phis: &[f64]) -> Result<()> {
    let wrapped: Vec<f64> = phis.iter().map(|p| p.rem_euclid(TAU)).collect();
    let distinct = wrapped.iter().enumerate().all(|(a, x)| {
        x.min(TAU - x) > 1e-6
            && wrapped[..a]
                .iter()
                .all(|y| (x - y).abs().min(TAU - (x - y).abs()) > 1e-6)
    });
    if wrapped.len() < 3 || !distinct {
        return Err(Error::Contract(
            "classification needs at least 3 distinct nonzero angles".into(),
        ));
    }
    Ok(())
}

/// Second-order shifts of the edge-empty and edge-filled ground states of
/// the 3-site edge problem `H⁰ = −J(x₂†x₃ + h.c.)` perturbed by `J′` on
/// (1,2) and `J″` on (1,3).
pub fn perturbative_oracle(
    j: f64,
    j_prime: f64,
    j_pp: f64,
    statistics: Statistics,
) -> Result<(f64, f64)> {
    if j == 0.0 {
        return Err(Error::Domain(
            "second-order shifts are singular at J = 0".into(),
        ));
    }
    let s = match statistics {
        Statistics::Boson => 1.0,
        Statistics::Fermion => -1.0,
    };
    Ok((
        -(j_prime + j_pp).powi(2) / (2.0 * j),
        -(j_prime + s * j_pp).powi(2) / (2.0 * j),
    ))
}

/// Exact shifts `E₀(n) + J` for the same 3-site problem: `n = 1` (edge empty)
/// and `n = 2` (edge filled).
pub fn three_site_exact(
    j: f64,
    j_prime: f64,
    j_pp: f64,
    statistics: Statistics,
) -> Result<(f64, f64)> {
    let mut c = CouplingMatrix::zeros(3);
    c.set(0, 1, j_prime);
    c.set(0, 2, j_pp);
    c.set(1, 2, j);
    let ground = |n: usize| -> Result<f64> {
        let basis = build_basis(3, Some(n))?;
        let op = match statistics {
            Statistics::Boson => build_boson_hamiltonian(&HamiltonianSpec::new(c.clone()), basis)?,
            Statistics::Fermion => build_fermion_hamiltonian(&c, basis)?,
        };
        let e = nalgebra::SymmetricEigen::new(op.to_dense()?).eigenvalues;
        Ok(e.iter().cloned().fold(f64::INFINITY, f64::min) + j)
    };
    Ok((ground(1)?, ground(2)?))
}
