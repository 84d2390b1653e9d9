use super::*;
use crate::geometry::CouplingMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_vec(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn sorted_eigs(m: DMatrix<C64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Kronecker-product spin-language oracle; site 0 is the least significant bit.
fn site_op(n: usize, k: usize, op: [[C64; 2]; 2]) -> DMatrix<C64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |r, col| {
        if (r ^ col) & !(1 << k) != 0 {
            return c(0.0);
        }
        op[r >> k & 1][col >> k & 1]
    })
}

fn pauli_x() -> [[C64; 2]; 2] {
    [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
}
fn pauli_y() -> [[C64; 2]; 2] {
    // basis (|0⟩ = empty = ↑, |1⟩ = particle = ↓)
    [[c(0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), c(0.0)]]
}
fn pauli_z() -> [[C64; 2]; 2] {
    [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
}

fn dense(op: &ManyBodyOperator) -> DMatrix<C64> {
    op.to_dense().unwrap()
}

#[test]
fn dimer_sector_matrix() {
    let b = build_basis(2, Some(1)).unwrap();
    let op = build_boson_hamiltonian(&HamiltonianSpec::new(CouplingMatrix::from_links(&[1.7])), b)
        .unwrap();
    let m = dense(&op);
    assert_eq!(m[(0, 1)], c(-1.7));
    let e = sorted_eigs(m);
    assert!((e[0] + 1.7).abs() < 1e-14 && (e[1] - 1.7).abs() < 1e-14);
}

#[test]
fn drive_in_sector_is_rejected() {
    let b = build_basis(4, Some(2)).unwrap();
    let spec = HamiltonianSpec::new(CouplingMatrix::ssh(4, 1.0, -0.3)).with_drive(1.0, 0.0);
    assert!(matches!(
        build_boson_hamiltonian(&spec, b),
        Err(crate::Error::Contract(_))
    ));
}

#[test]
fn hermitian_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut spec = HamiltonianSpec::new(CouplingMatrix::ssh(6, 2.42, -0.92).with_entry(0, 2, 0.3));
    spec.drive = 0.7;
    spec.drive_phase = 0.4;
    spec.detuning = -0.3;
    spec.add_zz(1, 4, 0.2);
    let op = build_boson_hamiltonian(&spec, build_basis(6, None).unwrap()).unwrap();
    let scale = op.norm_bound();
    for _ in 0..100 {
        let x = random_vec(64, &mut rng);
        let y = random_vec(64, &mut rng);
        let a = dot(&y, &op.apply_vec(&x));
        let b = dot(&x, &op.apply_vec(&y)).conj();
        assert!((a - b).norm() <= 1e-12 * scale);
    }
}

#[test]
fn number_conserved_without_drive() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = HamiltonianSpec::new(CouplingMatrix::ssh(6, 2.42, -0.92).with_entry(1, 5, 0.1));
    let b = build_basis(6, None).unwrap();
    let op = build_boson_hamiltonian(&spec, b.clone()).unwrap();
    let x = random_vec(64, &mut rng);
    let nx: Vec<C64> = x
        .iter()
        .enumerate()
        .map(|(s, a)| a * s.count_ones() as f64)
        .collect();
    let hnx = op.apply_vec(&nx);
    let hx = op.apply_vec(&x);
    let nhx: Vec<C64> = hx
        .iter()
        .enumerate()
        .map(|(s, a)| a * s.count_ones() as f64)
        .collect();
    let err: f64 = hnx
        .iter()
        .zip(&nhx)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-12);
}

#[test]
fn xxz_matches_spin_oracle() {
    let (j, jp, delta, n) = (-1.0, 0.25, 1.0, 8);
    let spec = build_xxz_hamiltonian(j, jp, delta, n).unwrap();
    let op = build_boson_hamiltonian(&spec, build_basis(n, None).unwrap()).unwrap();
    let dim = 1 << n;
    let mut oracle = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..n - 1 {
        let cpl = if k % 2 == 0 { jp } else { j };
        let xx = site_op(n, k, pauli_x()) * site_op(n, k + 1, pauli_x());
        let yy = site_op(n, k, pauli_y()) * site_op(n, k + 1, pauli_y());
        let zz = site_op(n, k, pauli_z()) * site_op(n, k + 1, pauli_z());
        oracle -= (xx + yy + zz * c(delta)) * c(cpl / 2.0);
    }
    let a = sorted_eigs(oracle);
    let b = sorted_eigs(dense(&op));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn xxz_delta_zero_is_ssh() {
    let spec = build_xxz_hamiltonian(2.42, -0.92, 0.0, 10).unwrap();
    assert_eq!(
        spec,
        HamiltonianSpec::new(CouplingMatrix::ssh(10, 2.42, -0.92))
    );
    let two = build_xxz_hamiltonian(5.0, 1.0, 0.0, 2).unwrap();
    let op = build_boson_hamiltonian(&two, build_basis(2, None).unwrap()).unwrap();
    let e = sorted_eigs(dense(&op));
    for (x, y) in e.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
        assert!((x - y).abs() < 1e-14);
    }
}

#[test]
fn jordan_wigner_equivalence_nearest_neighbor() {
    for n in [4, 6, 8] {
        let j = CouplingMatrix::ssh(n, 2.42, -0.92);
        let b = build_basis(n, None).unwrap();
        let eb = sorted_eigs(dense(
            &build_boson_hamiltonian(&HamiltonianSpec::new(j.clone()), b.clone()).unwrap(),
        ));
        let ef = sorted_eigs(dense(&build_fermion_hamiltonian(&j, b).unwrap()));
        let worst = eb
            .iter()
            .zip(&ef)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "N={n}: {worst}");
    }
}

#[test]
fn statistics_differ_with_next_nearest() {
    let j = CouplingMatrix::from_links(&[-0.92, 2.42]).with_entry(0, 2, 0.26);
    let b = build_basis(3, None).unwrap();
    let eb = sorted_eigs(dense(
        &build_boson_hamiltonian(&HamiltonianSpec::new(j.clone()), b.clone()).unwrap(),
    ));
    let ef = sorted_eigs(dense(&build_fermion_hamiltonian(&j, b).unwrap()));
    let worst = eb
        .iter()
        .zip(&ef)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

#[test]
fn correlated_hopping_image() {
    let j = CouplingMatrix::zeros(3).with_entry(0, 2, 1.0);
    let ferm = dense(&build_fermion_hamiltonian(&j, build_basis(3, None).unwrap()).unwrap());
    // −(1 − 2n_2)(b_1†b_3 + h.c.)
    let mut want = DMatrix::<C64>::zeros(8, 8);
    for s in 0..8usize {
        for t in 0..8usize {
            if s ^ t == 0b101 && (s & 0b101).count_ones() == 1 {
                let z2 = if s & 0b010 != 0 { -1.0 } else { 1.0 };
                want[(s, t)] = c(-z2);
            }
        }
    }
    assert!((ferm - want).camax() < 1e-14);
}

#[test]
fn fermi_sea_energy() {
    let j = CouplingMatrix::ssh(8, 2.42, -0.92)
        .with_entry(0, 2, 0.3)
        .with_entry(3, 7, -0.2);
    let sp: f64 = crate::spmodel::diagonalize(&j)
        .eigenvalues
        .iter()
        .filter(|e| **e < 0.0)
        .sum();
    let op = build_fermion_hamiltonian(&j, build_basis(8, Some(4)).unwrap()).unwrap();
    let e0 = sorted_eigs(dense(&op))[0];
    assert!((e0 - sp).abs() < 1e-10);
}

#[test]
fn sb_basics() {
    let b = build_basis(5, None).unwrap();
    let vac = StateVector::vacuum(b.clone()).unwrap();
    let filled = apply_symmetry_sb(&vac).unwrap();
    assert_eq!(filled.amplitudes()[31], c(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psi = StateVector::from_amplitudes(b.clone(), random_vec(32, &mut rng)).unwrap();
    let twice = apply_symmetry_sb(&apply_symmetry_sb(&psi).unwrap()).unwrap();
    assert!(psi
        .amplitudes()
        .iter()
        .zip(twice.amplitudes())
        .all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(
        apply_symmetry_sb(&StateVector::vacuum(build_basis(5, Some(0)).unwrap()).unwrap()).is_err()
    );
}

#[test]
fn sb_commutes_with_zz_form_and_jpp() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut spec = HamiltonianSpec::new(CouplingMatrix::ssh(8, 2.42, -0.92).with_entry(5, 7, 0.26));
    spec.add_zz(0, 1, 0.3);
    spec.add_zz(2, 6, -0.1);
    spec.drive = 0.5;
    let b = build_basis(8, None).unwrap();
    let op = build_boson_hamiltonian(&spec, b.clone()).unwrap();
    let psi = StateVector::from_amplitudes(b.clone(), random_vec(256, &mut rng)).unwrap();
    assert!(sb_commutator_residual(&op, &psi).unwrap() < 1e-12);
    let detuned = op.with_controls(0.5, 0.4).unwrap();
    assert!(sb_commutator_residual(&detuned, &psi).unwrap() > 1e-3);
}

#[test]
fn z_rotation_identity_and_sign_flip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = build_xxz_hamiltonian(-1.0, 0.25, 0.0, 8).unwrap();
    let b = build_basis(8, None).unwrap();
    let op = build_boson_hamiltonian(&spec, b.clone()).unwrap();
    let x = random_vec(256, &mut rng);
    let same = apply_local_z_rotation(&op, &[0, 2, 4, 6], 0.0).unwrap();
    let d0: f64 = op
        .apply_vec(&x)
        .iter()
        .zip(same.apply_vec(&x))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(d0 < 1e-14);
    let flipped = apply_local_z_rotation(&op, &[0, 2, 4, 6], std::f64::consts::PI).unwrap();
    let d1: f64 = op
        .apply_vec(&x)
        .iter()
        .zip(flipped.apply_vec(&x))
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max);
    assert!(d1 < 1e-12);
}

#[test]
fn z_rotation_preserves_spectrum() {
    let mut spec = HamiltonianSpec::new(CouplingMatrix::ssh(6, 2.42, -0.92).with_entry(0, 2, 0.2));
    spec.drive = 0.8;
    spec.add_zz(1, 2, 0.3);
    let op = build_boson_hamiltonian(&spec, build_basis(6, None).unwrap()).unwrap();
    let rot = apply_local_z_rotation(&op, &[1, 3, 4], 1.234).unwrap();
    let a = sorted_eigs(dense(&op));
    let b = sorted_eigs(dense(&rot));
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn drive_phase_generates_y_rotation() {
    let mut spec = HamiltonianSpec::new(CouplingMatrix::zeros(1));
    spec.drive = 2.0;
    spec.drive_phase = std::f64::consts::FRAC_PI_2;
    let m = dense(&build_boson_hamiltonian(&spec, build_basis(1, None).unwrap()).unwrap());
    let y = pauli_y();
    for r in 0..2 {
        for col in 0..2 {
            assert!((m[(r, col)] - y[r][col]).norm() < 1e-15);
        }
    }
}
