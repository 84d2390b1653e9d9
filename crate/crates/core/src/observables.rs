//! Expectation values and estimators on many-body states.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mbcore::{apply_local_unitary, drive_rotation, StateVector};
use crate::par;

/// Pauli observable measured on each site, with `Z = 1 − 2n` and `X = b + b†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Z,
    X,
}

/// Imaginary part of the string order above which a warning is attached.
pub const STRING_IMAG_WARN: f64 = 1e-6;

pub fn occupancies(psi: &StateVector) -> Vec<f64> {
    let n = psi.n_sites();
    let basis = psi.basis();
    let amps = psi.amplitudes();
    par::chunked_fold(
        amps.len(),
        vec![0.0; n],
        |range| {
            let mut acc = vec![0.0; n];
            for k in range {
                let p = amps[k].norm_sqr();
                let s = basis.unrank(k);
                for (site, a) in acc.iter_mut().enumerate() {
                    if s >> site & 1 == 1 {
                        *a += p;
                    }
                }
            }
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )
}

pub fn number_distribution(psi: &StateVector) -> Vec<f64> {
    let n = psi.n_sites();
    let basis = psi.basis();
    let amps = psi.amplitudes();
    par::chunked_fold(
        amps.len(),
        vec![0.0; n + 1],
        |range| {
            let mut acc = vec![0.0; n + 1];
            for k in range {
                acc[basis.unrank(k).count_ones() as usize] += amps[k].norm_sqr();
            }
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )
}

fn check_site(psi: &StateVector, i: usize) -> Result<()> {
    if i >= psi.n_sites() {
        return Err(Error::Contract(format!(
            "site {i} out of range for {} sites",
            psi.n_sites()
        )));
    }
    Ok(())
}

fn require_full(psi: &StateVector) -> Result<()> {
    if psi.basis().is_full() {
        Ok(())
    } else {
        Err(Error::Contract(
            "X-basis estimators need the full Fock basis".into(),
        ))
    }
}

/// `⟨ψ|F|ψ⟩` for the bit-flip operator `F` on `flip` (full basis).
fn flip_expectation(psi: &StateVector, flip: u32) -> C64 {
    let amps = psi.amplitudes();
    let f = flip as usize;
    par::chunked_sum(amps.len(), C64::new(0.0, 0.0), |range| {
        range.map(|s| amps[s].conj() * amps[s ^ f]).sum()
    })
}

/// `⟨ψ|Π_{k∈mask} Z_k|ψ⟩`.
fn z_product(psi: &StateVector, mask: u32) -> f64 {
    let basis = psi.basis();
    let amps = psi.amplitudes();
    par::chunked_sum(amps.len(), 0.0, |range| {
        range
            .map(|k| {
                let p = amps[k].norm_sqr();
                if (basis.unrank(k) & mask).count_ones().is_multiple_of(2) {
                    p
                } else {
                    -p
                }
            })
            .sum()
    })
}

pub fn single_site(psi: &StateVector, observable: Observable, i: usize) -> Result<f64> {
    check_site(psi, i)?;
    match observable {
        Observable::Z => Ok(z_product(psi, 1 << i)),
        Observable::X => {
            require_full(psi)?;
            Ok(flip_expectation(psi, 1 << i).re)
        }
    }
}

/// Raw `⟨O_i O_j⟩` for `i ≠ j`.
pub fn correlator(psi: &StateVector, observable: Observable, i: usize, j: usize) -> Result<f64> {
    check_site(psi, i)?;
    check_site(psi, j)?;
    if i == j {
        return Err(Error::Contract(
            "correlator needs two distinct sites".into(),
        ));
    }
    let mask = (1u32 << i) | (1u32 << j);
    match observable {
        Observable::Z => Ok(z_product(psi, mask)),
        Observable::X => {
            require_full(psi)?;
            Ok(flip_expectation(psi, mask).re)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub observable: Observable,
    pub connected: bool,
    /// Row-major `N×N` table.
    pub values: Vec<f64>,
    pub n_sites: usize,
}

impl CorrelationMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_sites + j]
    }
}

/// Full `N×N` map. The diagonal holds `⟨O_i²⟩ = 1`, minus `⟨O_i⟩²` when connected.
pub fn correlation_map(
    psi: &StateVector,
    observable: Observable,
    connected: bool,
) -> Result<CorrelationMap> {
    let n = psi.n_sites();
    if observable == Observable::X {
        require_full(psi)?;
    }
    let singles: Vec<f64> = if connected {
        (0..n)
            .map(|i| single_site(psi, observable, i))
            .collect::<Result<_>>()?
    } else {
        vec![0.0; n]
    };
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0 - singles[i] * singles[i];
        for j in i + 1..n {
            let c = correlator(psi, observable, i, j)? - singles[i] * singles[j];
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(CorrelationMap {
        observable,
        connected,
        values,
        n_sites: n,
    })
}

/// Mean intra-dimer correlator over the bulk dimers `(2i, 2i+1)`, `i = 2..N/2−2`
/// in one-based site labels, which skips the edge dimers and the first and
/// last strong bonds.
pub fn bulk_dimer_correlator(psi: &StateVector, observable: Observable) -> Result<f64> {
    let n = psi.n_sites();
    let pairs = bulk_dimers(n)?;
    let mut sum = 0.0;
    for &(a, b) in &pairs {
        sum += correlator(psi, observable, a, b)?;
    }
    Ok(sum / pairs.len() as f64)
}

/// Zero-based index pairs used by [`bulk_dimer_correlator`].
pub fn bulk_dimers(n_sites: usize) -> Result<Vec<(usize, usize)>> {
    if n_sites < 8 || !n_sites.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "bulk dimers need an even chain of at least 8 sites, got {n_sites}"
        )));
    }
    Ok((2..=n_sites / 2 - 2).map(|i| (2 * i - 1, 2 * i)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringOrder {
    pub value: f64,
    pub imag: f64,
    pub warning: Option<String>,
}

/// `−⟨O_2 exp(iπ/2 Σ_{k=3}^{N−2} O_k) O_{N−1}⟩` with one-based labels.
pub fn string_order(psi: &StateVector, observable: Observable) -> Result<StringOrder> {
    let n = psi.n_sites();
    if n < 6 {
        return Err(Error::Contract(format!(
            "string order needs N ≥ 6, got {n}"
        )));
    }
    let z = match observable {
        Observable::Z => z_string(psi),
        Observable::X => {
            require_full(psi)?;
            z_string(&rotate_to_x(psi)?)
        }
    };
    let warning = (z.im.abs() > STRING_IMAG_WARN)
        .then(|| format!("string order has imaginary part {:.3e}", z.im));
    Ok(StringOrder {
        value: z.re,
        imag: z.im,
        warning,
    })
}

/// Map `X` onto `Z` site by site: `U† Z U = X` for `U = R_y(−π/2)`.
pub fn rotate_to_x(psi: &StateVector) -> Result<StateVector> {
    let sites: Vec<usize> = (0..psi.n_sites()).collect();
    apply_local_unitary(
        psi,
        &sites,
        &drive_rotation(std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2),
    )
}

fn z_string(psi: &StateVector) -> C64 {
    let n = psi.n_sites();
    let basis = psi.basis();
    let amps = psi.amplitudes();
    let ends = (1u32 << 1) | (1u32 << (n - 2));
    let inner: u32 = ((1u32 << (n - 4)) - 1) << 2;
    let inner_len = (n - 4) as u32;
    const PHASES: [C64; 4] = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let total = par::chunked_sum(amps.len(), C64::new(0.0, 0.0), |range| {
        range
            .map(|k| {
                let s = basis.unrank(k);
                let occupied = (s & inner).count_ones();
                // Σ z_k = inner_len − 2·occupied
                let power = (inner_len + 4 * 4 - 2 * occupied) % 4;
                let sign = if (s & ends).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                PHASES[power as usize] * (sign * amps[k].norm_sqr())
            })
            .sum()
    });
    -total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub center: f64,
    pub center_err: f64,
    pub width: f64,
    pub width_err: f64,
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub offset: f64,
    pub offset_err: f64,
    pub iterations: usize,
    pub residual_ss: f64,
}

const FIT_MAX_ITER: usize = 500;

fn gaussian_row(p: &Vector4<f64>, x: f64) -> (f64, Vector4<f64>) {
    let (a, c, w, _) = (p[0], p[1], p[2], p[3]);
    let u = (x - c) / w;
    let g = (-0.5 * u * u).exp();
    (
        a * g + p[3],
        Vector4::new(g, a * g * u / w, a * g * u * u / w, 1.0),
    )
}

fn fit_cost(p: &Vector4<f64>, x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| (gaussian_row(p, xi).0 - yi).powi(2))
        .sum()
}

/// Least-squares fit of `A·exp(−(x−c)²/2w²) + b` by Levenberg–Marquardt.
pub fn gaussian_fit(x: &[f64], y: &[f64]) -> Result<GaussianFit> {
    if x.len() != y.len() {
        return Err(Error::Contract("x and y lengths differ".into()));
    }
    if x.len() < 5 {
        return Err(Error::Contract(format!(
            "need at least 5 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite fit input".into()));
    }
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if ymax - ymin <= 0.0 {
        return Err(Error::Contract("y is constant".into()));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (offset0, amp0) = if ymax - median >= median - ymin {
        (ymin, ymax - ymin)
    } else {
        (ymax, ymin - ymax)
    };
    let weights: Vec<f64> = y.iter().map(|v| (v - offset0) / amp0).collect();
    let wsum: f64 = weights.iter().sum();
    let c0 = x.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let var = x
        .iter()
        .zip(&weights)
        .map(|(a, b)| (a - c0).powi(2) * b)
        .sum::<f64>()
        / wsum;
    let span = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - x.iter().cloned().fold(f64::INFINITY, f64::min);
    let w0 = if var > 0.0 { var.sqrt() } else { span / 4.0 };

    let mut p = Vector4::new(amp0, c0, w0, offset0);
    let mut cost = fit_cost(&p, x, y);
    let mut lambda = 1e-3;
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < FIT_MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&xi, &yi) in x.iter().zip(y) {
            let (f, g) = gaussian_row(&p, xi);
            jtj += g * g.transpose();
            jtr += g * (yi - f);
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut damped = jtj;
            for d in 0..4 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|ch| ch.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let trial_cost = fit_cost(&trial, x, y);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small_step = step
                    .iter()
                    .zip(trial.iter())
                    .all(|(s, v)| s.abs() <= 1e-12 * (v.abs() + 1e-12));
                let small_drop = cost - trial_cost <= 1e-15 * scale;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                converged = small_step || small_drop;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence after {FIT_MAX_ITER} iterations, residual {cost:.3e}"
        )));
    }
    let mut jtj = Matrix4::zeros();
    for &xi in x {
        let g = gaussian_row(&p, xi).1;
        jtj += g * g.transpose();
    }
    let dof = (x.len() - 4).max(1) as f64;
    let cov = jtj.try_inverse().ok_or_else(|| {
        Error::Fit(format!(
            "singular normal matrix at c={:.6}, w={:.6}",
            p[1], p[2]
        ))
    })? * (cost / dof);
    let err = |k: usize| cov[(k, k)].max(0.0).sqrt();
    Ok(GaussianFit {
        center: p[1],
        center_err: err(1),
        width: p[2].abs(),
        width_err: err(2),
        amplitude: p[0],
        amplitude_err: err(0),
        offset: p[3],
        offset_err: err(3),
        iterations,
        residual_ss: cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbcore::build_basis;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, seed: u64, real: bool) -> StateVector {
        let basis = build_basis(n, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..basis.dim())
            .map(|_| {
                C64::new(
                    rng.random::<f64>() - 0.5,
                    if real { 0.0 } else { rng.random::<f64>() - 0.5 },
                )
            })
            .collect();
        StateVector::from_amplitudes(basis, amps)
            .unwrap()
            .normalized()
            .unwrap()
    }

    // Dense single-site operators embedded by Kronecker products; bit k is site k.
    fn site_op(n: usize, k: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::identity(1, 1);
        for site in (0..n).rev() {
            let factor = if site == k {
                op.clone()
            } else {
                DMatrix::identity(2, 2)
            };
            out = out.kronecker(&factor);
        }
        out
    }

    fn pauli(o: Observable) -> DMatrix<C64> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match o {
            Observable::Z => DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
            Observable::X => DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        }
    }

    fn dense_expect(psi: &StateVector, op: &DMatrix<C64>) -> C64 {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        (v.adjoint() * op * &v)[(0, 0)]
    }

    fn dense_string(psi: &StateVector, o: Observable) -> C64 {
        let n = psi.n_sites();
        let p = pauli(o);
        let mut op = site_op(n, 1, &p) * site_op(n, n - 2, &p);
        // exp(iπ/2 O) = i·O for a Pauli O.
        for k in 2..n - 2 {
            op = op * site_op(n, k, &p) * C64::new(0.0, 1.0);
        }
        -dense_expect(psi, &op)
    }

    #[test]
    fn vacuum_values() {
        let psi = StateVector::vacuum(build_basis(14, None).unwrap()).unwrap();
        assert!(occupancies(&psi).iter().all(|&v| v == 0.0));
        assert_eq!(correlator(&psi, Observable::Z, 0, 5).unwrap(), 1.0);
        assert_eq!(correlator(&psi, Observable::X, 0, 5).unwrap(), 0.0);
        let s = string_order(&psi, Observable::Z).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.imag, 0.0);
        let p = number_distribution(&psi);
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn dimer_and_cat_states() {
        let basis = build_basis(2, None).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let psi =
            StateVector::from_amplitudes(basis, vec![z, C64::new(h, 0.0), C64::new(h, 0.0), z])
                .unwrap();
        let occ = occupancies(&psi);
        assert!((occ[0] - 0.5).abs() < 1e-15 && (occ[1] - 0.5).abs() < 1e-15);
        assert!((correlator(&psi, Observable::Z, 0, 1).unwrap() + 1.0).abs() < 1e-15);
        assert!((correlator(&psi, Observable::X, 0, 1).unwrap() - 1.0).abs() < 1e-15);

        let basis = build_basis(6, None).unwrap();
        let mut amps = vec![z; 64];
        amps[0] = C64::new(h, 0.0);
        amps[63] = C64::new(h, 0.0);
        let cat = StateVector::from_amplitudes(basis, amps).unwrap();
        let p = number_distribution(&cat);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[6] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sector_rejects_x() {
        let basis = build_basis(8, Some(4)).unwrap();
        let psi = StateVector::basis_state(basis, 0b1111).unwrap();
        assert!(matches!(
            correlator(&psi, Observable::X, 0, 1),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            string_order(&psi, Observable::X),
            Err(Error::Contract(_))
        ));
        assert_eq!(correlator(&psi, Observable::Z, 0, 5).unwrap(), -1.0);
        assert!(matches!(
            correlator(&psi, Observable::Z, 2, 2),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn estimators_match_dense_oracle() {
        for (n, seed) in [(6, 1), (7, 2), (8, 3)] {
            let psi = random_state(n, seed, false);
            for o in [Observable::Z, Observable::X] {
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let dense = dense_expect(
                            &psi,
                            &(site_op(n, i, &pauli(o)) * site_op(n, j, &pauli(o))),
                        );
                        assert!(dense.im.abs() < 1e-12);
                        assert!((correlator(&psi, o, i, j).unwrap() - dense.re).abs() < 1e-10);
                    }
                }
                let s = string_order(&psi, o).unwrap();
                let d = dense_string(&psi, o);
                assert!((s.value - d.re).abs() < 1e-10, "{o:?} {} {}", s.value, d.re);
                assert!((s.imag - d.im).abs() < 1e-10, "{o:?} {} {}", s.imag, d.im);
            }
        }
    }

    #[test]
    fn dimerized_n6_string() {
        // Topological dimerization for N=6: edge sites 1 and 6 free, dimers (2,3), (4,5)
        // in the symmetric single-particle state, edges empty.
        let basis = build_basis(6, None).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 64];
        for a in [0b000010u32, 0b000100] {
            for b in [0b001000u32, 0b010000] {
                amps[(a | b) as usize] = C64::new(0.5, 0.0);
            }
        }
        let psi = StateVector::from_amplitudes(basis, amps).unwrap();
        for o in [Observable::Z, Observable::X] {
            let s = string_order(&psi, o).unwrap();
            let d = dense_string(&psi, o);
            assert!((s.value - d.re).abs() < 1e-12);
            assert!(s.imag.abs() < 1e-12);
        }
        // Z-string factorizes over dimers: −⟨Z_2 i Z_3⟩⟨i Z_4 Z_5⟩ = −(i·(−1))² = 1.
        assert!((string_order(&psi, Observable::Z).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_map_shape() {
        let psi = random_state(6, 9, true);
        for o in [Observable::Z, Observable::X] {
            let m = correlation_map(&psi, o, false).unwrap();
            for i in 0..6 {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..6 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
            let c = correlation_map(&psi, o, true).unwrap();
            let (a, b) = (
                single_site(&psi, o, 1).unwrap(),
                single_site(&psi, o, 4).unwrap(),
            );
            assert!((c.get(1, 4) - (m.get(1, 4) - a * b)).abs() < 1e-14);
        }
    }

    #[test]
    fn bulk_dimers_for_fourteen() {
        assert_eq!(
            bulk_dimers(14).unwrap(),
            vec![(3, 4), (5, 6), (7, 8), (9, 10)]
        );
        assert!(bulk_dimers(7).is_err());
    }

    #[test]
    fn noiseless_gaussian() {
        let x: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 0.7 * (-(v - 0.13f64).powi(2) / (2.0 * 0.21f64.powi(2))).exp() + 0.02)
            .collect();
        let f = gaussian_fit(&x, &y).unwrap();
        assert!((f.center - 0.13).abs() < 1e-8);
        assert!((f.width - 0.21).abs() < 1e-8);
        assert!((f.amplitude - 0.7).abs() < 1e-8);
        assert!((f.offset - 0.02).abs() < 1e-8);
        assert!(f.center_err < 1e-8);

        let dip: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
        let f = gaussian_fit(&x, &dip).unwrap();
        assert!((f.center - 0.13).abs() < 1e-8 && (f.amplitude + 0.7).abs() < 1e-8);
    }

    #[test]
    fn gaussian_fit_contract() {
        assert!(matches!(
            gaussian_fit(&[0.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            gaussian_fit(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0; 5]),
            Err(Error::Contract(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn estimator_bounds(seed in any::<u64>(), n in 6usize..9) {
            let psi = random_state(n, seed, false);
            let p = number_distribution(&psi);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for i in 0..n {
                for j in i + 1..n {
                    let z = correlator(&psi, Observable::Z, i, j).unwrap();
                    let x = correlator(&psi, Observable::X, i, j).unwrap();
                    prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
                    prop_assert!(x.abs() <= 1.0 + 1e-12);
                    prop_assert!(flip_expectation(&psi, (1 << i) | (1 << j)).im.abs() < 1e-10);
                }
            }
        }

        #[test]
        fn rotated_string_equals_direct(seed in any::<u64>(), n in 6usize..9) {
            let psi = random_state(n, seed, true);
            let via_rotation = string_order(&psi, Observable::X).unwrap();
            let direct = dense_string(&psi, Observable::X);
            prop_assert!((via_rotation.value - direct.re).abs() < 1e-10);
            prop_assert!((via_rotation.imag - direct.im).abs() < 1e-10);
            if n % 2 == 0 {
                prop_assert!(via_rotation.imag.abs() < 1e-10);
            }
        }
    }
}
