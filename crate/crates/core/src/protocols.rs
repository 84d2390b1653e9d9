//! Experiment drivers built from the many-body core and the kernels.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{
    evolve, evolve_sampled, lowest_eigenpairs, EvolutionControls, Scheduled, SweepSchedule,
};
use crate::error::{Error, Result};
use crate::geometry::CouplingMatrix;
use crate::mbcore::{
    apply_local_unitary, build_basis, build_boson_hamiltonian, build_xxz_hamiltonian,
    drive_rotation, FockBasis, HamiltonianSpec, ManyBodyOperator, StateVector,
};
use crate::observables::{number_distribution, occupancies};
use crate::par;

/// Drive phase of rotation pulses. A π/2 pulse with this phase followed by a
/// Z readout measures `+X` on every site.
pub const ROTATION_PHASE: f64 = -FRAC_PI_2;

/// Largest chain for the Haldane-path eigensolves.
pub const HALDANE_MAX_SITES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyResult {
    pub detunings: Vec<f64>,
    /// `occupancy[g][i]`: site `i` after probing at grid point `g`.
    pub occupancy: Vec<Vec<f64>>,
    /// Occupancy conditioned on at most one particle; `None` where that event has zero weight.
    pub post_selected: Vec<Option<Vec<f64>>>,
}

/// Square probe of strength `probe_rabi` for `t_probe` at each detuning of `grid`.
pub fn spectroscopy_scan(
    spec: &HamiltonianSpec,
    initial: &StateVector,
    probe_rabi: f64,
    t_probe: f64,
    grid: &[f64],
    controls: &EvolutionControls,
) -> Result<SpectroscopyResult> {
    if !(probe_rabi > 0.0) {
        return Err(Error::Contract(format!(
            "probe Rabi frequency must be positive, got {probe_rabi}"
        )));
    }
    if !(t_probe >= 0.0) {
        return Err(Error::Contract(format!(
            "probe duration must be ≥ 0, got {t_probe}"
        )));
    }
    check_sites(spec, initial)?;
    let initial = initial.to_full()?;
    let base = build_boson_hamiltonian(&undriven(spec), initial.basis().clone())?
        .with_drive_phase(spec.drive_phase);
    let rows = par::try_map_indexed(grid.len(), |g| {
        let h = base.with_controls(probe_rabi, grid[g])?;
        let psi = evolve(&h, &initial, 0.0, t_probe, controls)?;
        Ok::<_, Error>((occupancies(&psi), post_select(&psi)))
    })?;
    let (occupancy, post_selected) = rows.into_iter().unzip();
    Ok(SpectroscopyResult {
        detunings: grid.to_vec(),
        occupancy,
        post_selected,
    })
}

fn undriven(spec: &HamiltonianSpec) -> HamiltonianSpec {
    let mut s = spec.clone();
    s.drive = 0.0;
    s.detuning = 0.0;
    s
}

fn check_sites(spec: &HamiltonianSpec, psi: &StateVector) -> Result<()> {
    if spec.n_sites() != psi.n_sites() {
        return Err(Error::Contract(format!(
            "state has {} sites, Hamiltonian has {}",
            psi.n_sites(),
            spec.n_sites()
        )));
    }
    Ok(())
}

fn post_select(psi: &StateVector) -> Option<Vec<f64>> {
    let n = psi.n_sites();
    let basis = psi.basis();
    let mut weight = 0.0;
    let mut occ = vec![0.0; n];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let s = basis.unrank(k);
        if s.count_ones() <= 1 {
            let p = a.norm_sqr();
            weight += p;
            if s != 0 {
                occ[s.trailing_zeros() as usize] += p;
            }
        }
    }
    (weight > 0.0).then(|| occ.into_iter().map(|v| v / weight).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub final_state: StateVector,
    pub times: Vec<f64>,
    /// `p_n[t][n]`: probability of `n` particles at sample `t`.
    pub p_n: Vec<Vec<f64>>,
    /// `|⟨target|ψ(t)⟩|²` per sample when a target was given.
    pub overlap: Option<Vec<f64>>,
}

impl SweepResult {
    pub fn final_overlap(&self) -> Option<f64> {
        self.overlap.as_ref().and_then(|o| o.last().copied())
    }
}

/// Evolve the vacuum through `schedule`, sampling `samples ≥ 2` uniformly spaced times.
pub fn adiabatic_sweep(
    spec: &HamiltonianSpec,
    schedule: &SweepSchedule,
    target: Option<&StateVector>,
    samples: usize,
    controls: &EvolutionControls,
) -> Result<SweepResult> {
    schedule.validate()?;
    let start = schedule.breakpoints[0];
    if !(start.detuning_mhz < 0.0) {
        return Err(Error::Contract(format!(
            "sweeps start from the vacuum at negative detuning, got {} MHz",
            start.detuning_mhz
        )));
    }
    if samples < 2 {
        return Err(Error::Contract("a sweep needs at least two samples".into()));
    }
    let n = spec.n_sites();
    let basis = build_basis(n, None)?;
    let target = match target {
        Some(t) => {
            if t.n_sites() != n {
                return Err(Error::Contract(
                    "target has the wrong number of sites".into(),
                ));
            }
            Some(t.to_full()?)
        }
        None => None,
    };
    let base =
        build_boson_hamiltonian(&undriven(spec), basis.clone())?.with_drive_phase(spec.drive_phase);
    let h = Scheduled {
        base: &base,
        schedule,
    };
    let (t0, t1) = (schedule.start(), schedule.end());
    let times: Vec<f64> = (0..samples)
        .map(|k| t0 + (t1 - t0) * k as f64 / (samples - 1) as f64)
        .collect();
    let mut p_n = Vec::with_capacity(samples);
    let mut overlap = target.as_ref().map(|_| Vec::with_capacity(samples));
    let mut err = None;
    let final_state = evolve_sampled(
        &h,
        &StateVector::vacuum(basis)?,
        &times,
        controls,
        |_, _, psi| {
            p_n.push(number_distribution(psi));
            if let (Some(o), Some(t)) = (overlap.as_mut(), target.as_ref()) {
                match t.overlap(psi) {
                    Ok(v) => o.push(v),
                    Err(e) => err = Some(e),
                }
            }
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(SweepResult {
        final_state,
        times,
        p_n,
        overlap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub times: Vec<f64>,
    pub left_edge: Vec<f64>,
    pub right_edge: Vec<f64>,
    pub bulk: Vec<f64>,
    /// Dominant transfer frequency in MHz; `None` when the right edge never moves.
    pub e_hyb: Option<f64>,
}

/// Free evolution of one particle placed on `start_site`, sampled at
/// `samples` uniform times over `[0, t_max]`.
pub fn transfer_dynamics(
    spec: &HamiltonianSpec,
    start_site: usize,
    t_max: f64,
    samples: usize,
    controls: &EvolutionControls,
) -> Result<TransferResult> {
    let n = spec.n_sites();
    if start_site >= n {
        return Err(Error::Contract(format!(
            "start site {start_site} outside a {n}-site chain"
        )));
    }
    if spec.drive != 0.0 {
        return Err(Error::Contract(
            "transfer dynamics run without a drive".into(),
        ));
    }
    if samples < 4 || !(t_max > 0.0) {
        return Err(Error::Contract(
            "transfer needs t_max > 0 and at least 4 samples".into(),
        ));
    }
    let basis = build_basis(n, Some(1))?;
    let h = build_boson_hamiltonian(spec, basis.clone())?;
    let psi0 = StateVector::basis_state(basis, 1 << start_site)?;
    let times: Vec<f64> = (0..samples)
        .map(|k| t_max * k as f64 / (samples - 1) as f64)
        .collect();
    let (mut left, mut right, mut bulk) = (Vec::new(), Vec::new(), Vec::new());
    evolve_sampled(&h, &psi0, &times, controls, |_, _, psi| {
        let occ = occupancies(psi);
        left.push(occ[0]);
        right.push(occ[n - 1]);
        bulk.push(occ[1..n - 1].iter().sum());
    })?;
    let e_hyb = dominant_frequency(&times, &right);
    Ok(TransferResult {
        times,
        left_edge: left,
        right_edge: right,
        bulk,
        e_hyb,
    })
}

/// Hann-windowed spectrum magnitude of the mean-free series at frequency `f`.
fn windowed_power(times: &[f64], centered: &[f64], f: f64) -> f64 {
    let m = times.len();
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..m {
        let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (m - 1) as f64).cos();
        let arg = 2.0 * PI * f * times[k];
        re += w * centered[k] * arg.cos();
        im += w * centered[k] * arg.sin();
    }
    re * re + im * im
}

/// Strongest nonzero frequency of a uniformly sampled series, refined by
/// golden-section search around the best point of an 8× oversampled grid.
/// The search starts above the window's DC lobe at `2/T`.
pub fn dominant_frequency(times: &[f64], series: &[f64]) -> Option<f64> {
    let m = times.len();
    if m < 4 || series.len() != m {
        return None;
    }
    let span = times[m - 1] - times[0];
    let mean = series.iter().sum::<f64>() / m as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    if centered.iter().all(|v| v.abs() < 1e-12) {
        return None;
    }
    let nyquist = 0.5 * (m - 1) as f64 / span;
    let f_lo = 2.0 / span;
    if f_lo >= nyquist {
        return None;
    }
    let points = 8 * m;
    let step = (nyquist - f_lo) / points as f64;
    let best = (0..=points)
        .map(|k| f_lo + step * k as f64)
        .map(|f| (f, windowed_power(times, &centered, f)))
        .fold(
            (f_lo, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        );
    let (mut a, mut b) = ((best.0 - step).max(f_lo), (best.0 + step).min(nyquist));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if windowed_power(times, &centered, c) > windowed_power(times, &centered, d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseVariant {
    /// Independent single-site rotations; hopping and interactions suppressed.
    Ideal,
    /// Evolution under the full Hamiltonian with the pulse drive and zero detuning.
    Full,
}

/// Resonant pulse of strength `pulse_rabi` and duration `tau` with drive
/// phase `phase`; see [`ROTATION_PHASE`].
pub fn rotation_pulse(
    psi: &StateVector,
    spec: &HamiltonianSpec,
    pulse_rabi: f64,
    tau: f64,
    phase: f64,
    variant: PulseVariant,
    controls: &EvolutionControls,
) -> Result<StateVector> {
    if !psi.basis().is_full() {
        return Err(Error::Contract(
            "rotation pulses need the full basis".into(),
        ));
    }
    check_sites(spec, psi)?;
    if !(pulse_rabi >= 0.0) || !(tau >= 0.0) {
        return Err(Error::Contract(
            "pulse strength and duration must be ≥ 0".into(),
        ));
    }
    match variant {
        PulseVariant::Ideal => {
            let sites: Vec<usize> = (0..psi.n_sites()).collect();
            apply_local_unitary(
                psi,
                &sites,
                &drive_rotation(2.0 * PI * pulse_rabi * tau, phase),
            )
        }
        PulseVariant::Full => {
            let h = build_boson_hamiltonian(&undriven(spec), psi.basis().clone())?
                .with_drive_phase(phase)
                .with_controls(pulse_rabi, 0.0)?;
            evolve(&h, psi, 0.0, tau, controls)
        }
    }
}

/// Lowest eigenstate of an undriven Hamiltonian over a set of number sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGroundState {
    pub energy: f64,
    pub sector: usize,
    pub state: StateVector,
    /// Lowest energies of every searched sector, in sector order.
    pub sector_energies: Vec<(usize, f64)>,
}

/// Ground state of `spec` (drive must be zero) minimized over `sectors`.
/// Ties go to the lowest sector index.
pub fn sector_ground_state(
    spec: &HamiltonianSpec,
    sectors: impl IntoIterator<Item = usize>,
) -> Result<SectorGroundState> {
    if spec.drive != 0.0 {
        return Err(Error::Contract(
            "sector minimization needs a zero drive".into(),
        ));
    }
    let n = spec.n_sites();
    let sectors: Vec<usize> = sectors.into_iter().collect();
    if sectors.is_empty() || sectors.iter().any(|&s| s > n) {
        return Err(Error::Contract(format!(
            "invalid sector list {sectors:?} for {n} sites"
        )));
    }
    let solved = par::try_map_indexed(sectors.len(), |k| {
        let h = build_boson_hamiltonian(spec, build_basis(n, Some(sectors[k]))?)?;
        let e = lowest_eigenpairs(&h, 1)?;
        Ok::<_, Error>((
            e.values[0],
            e.vectors.into_iter().next().expect("one eigenvector"),
        ))
    })?;
    let mut best = 0;
    for (k, (e, _)) in solved.iter().enumerate() {
        if *e < solved[best].0 {
            best = k;
        }
    }
    let sector_energies = sectors
        .iter()
        .zip(&solved)
        .map(|(&s, (e, _))| (s, *e))
        .collect();
    let (energy, state) = solved.into_iter().nth(best).expect("best sector");
    Ok(SectorGroundState {
        energy,
        sector: sectors[best],
        state,
        sector_energies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    pub rabi: Vec<f64>,
    pub detuning: Vec<f64>,
    /// Row-major over `(rabi, detuning)`.
    pub mean_number: Vec<f64>,
    pub gap: Vec<f64>,
}

impl PhaseMap {
    pub fn index(&self, r: usize, d: usize) -> usize {
        r * self.detuning.len() + d
    }
}

/// Ground-state particle number and gap over a drive/detuning grid.
pub fn phase_map(
    hopping: &CouplingMatrix,
    rabi_grid: &[f64],
    detuning_grid: &[f64],
) -> Result<PhaseMap> {
    if rabi_grid.is_empty() || detuning_grid.is_empty() {
        return Err(Error::Contract("phase map grids must be nonempty".into()));
    }
    let n = hopping.n();
    let spec = HamiltonianSpec::new(hopping.clone());
    spec.validate()?;
    let full = build_boson_hamiltonian(&spec, build_basis(n, None)?)?;
    let sectors: Vec<ManyBodyOperator> = (0..=n)
        .map(|s| build_boson_hamiltonian(&spec, build_basis(n, Some(s))?))
        .collect::<Result<_>>()?;
    let cells = par::try_map_indexed(rabi_grid.len() * detuning_grid.len(), |idx| {
        let rabi = rabi_grid[idx / detuning_grid.len()];
        let det = detuning_grid[idx % detuning_grid.len()];
        if rabi != 0.0 {
            let h = full.with_controls(rabi, det)?;
            let e = lowest_eigenpairs(&h, 2)?;
            let mean = number_distribution(&e.vectors[0])
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * p)
                .sum();
            Ok::<_, Error>((mean, (e.values[1] - e.values[0]).max(0.0)))
        } else {
            let mut levels = Vec::new();
            for (s, op) in sectors.iter().enumerate() {
                let h = op.with_controls(0.0, det)?;
                let e = lowest_eigenpairs(&h, 2.min(h.dim()))?;
                levels.extend(e.values.into_iter().map(|v| (v, s)));
            }
            levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            Ok((levels[0].1 as f64, (levels[1].0 - levels[0].0).max(0.0)))
        }
    })?;
    let (mean_number, gap) = cells.into_iter().unzip();
    Ok(PhaseMap {
        rabi: rabi_grid.to_vec(),
        detuning: detuning_grid.to_vec(),
        mean_number,
        gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaldanePath {
    /// Fixed `J`, `J′`; the grid runs over the anisotropy δ.
    DeltaRamp,
    /// δ = 1 with `J′ = K`, `J = K − 1`; the grid runs over `K`.
    KRamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaldanePoint {
    pub parameter: f64,
    /// Lowest `k` energies relative to the ground energy.
    pub energies: Vec<f64>,
}

/// Lowest `k` levels of the XXZ ladder over number sectors `L−1 … L+1`
/// (`N = 2L` sites) along `path`.
pub fn haldane_path(
    j: f64,
    j_prime: f64,
    path: HaldanePath,
    grid: &[f64],
    cells: usize,
    k: usize,
) -> Result<Vec<HaldanePoint>> {
    let n = 2 * cells;
    if n > HALDANE_MAX_SITES {
        return Err(Error::Resource(format!(
            "{n} sites exceed the eigensolver ceiling of {HALDANE_MAX_SITES}"
        )));
    }
    if cells < 2 || k == 0 {
        return Err(Error::Contract(
            "need at least 2 unit cells and k ≥ 1".into(),
        ));
    }
    let bases: Vec<Arc<FockBasis>> = (cells - 1..=cells + 1)
        .map(|s| build_basis(n, Some(s)))
        .collect::<Result<_>>()?;
    grid.iter()
        .map(|&p| {
            let (jj, jp, delta) = match path {
                HaldanePath::DeltaRamp => (j, j_prime, p),
                HaldanePath::KRamp => (p - 1.0, p, 1.0),
            };
            let spec = build_xxz_hamiltonian(jj, jp, delta, n)?;
            let mut levels = Vec::new();
            for b in &bases {
                let h = build_boson_hamiltonian(&spec, b.clone())?;
                levels.extend(lowest_eigenpairs(&h, k.min(h.dim()))?.values);
            }
            levels.sort_by(f64::total_cmp);
            levels.truncate(k);
            let e0 = levels[0];
            Ok(HaldanePoint {
                parameter: p,
                energies: levels.into_iter().map(|e| e - e0).collect(),
            })
        })
        .collect()
}
