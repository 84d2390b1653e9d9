//! Subcommand pipelines. Each one turns a validated configuration into a
//! [`Report`].

use serde_json::{json, Value};

use rydssh::engine::{lowest_eigenpairs, EvolutionControls};
use rydssh::mbcore::{
    build_basis, build_boson_hamiltonian, build_fermion_hamiltonian, HamiltonianSpec, StateVector,
    Statistics,
};
use rydssh::noise::{
    monte_carlo_experiment, realization_records, Estimate, Preparation, ProtocolDescriptor,
};
use rydssh::observables::{bulk_dimer_correlator, correlation_map, string_order, Observable};
use rydssh::protocols::{
    adiabatic_sweep, haldane_path, phase_map, sector_ground_state, spectroscopy_scan,
    transfer_dynamics,
};
use rydssh::spmodel::{
    bulk_band_gap, diagonalize, edge_modes, hybridization_scan, mid_gap_splitting,
};
use rydssh::sptlab::{
    classify, cocycle, mps_ground_states, perturbative_oracle, three_site_exact, GroupElement,
    ProjectiveRep,
};

use crate::config::{grid, PreparationKind, RunConfig};
use crate::error::CliError;
use crate::report::{Cell, Report, Table};

/// Default chain when a command runs without a `chain` section.
pub const DEFAULT_J_MHZ: f64 = 2.42;
pub const DEFAULT_J_PRIME_MHZ: f64 = -0.92;

/// Detuning of the half-filled ground state used by correlator runs.
const DEFAULT_GROUND_DETUNING_MHZ: f64 = -1.0;

fn report(command: &str, tables: Vec<Table>, summary: Value) -> Report {
    Report {
        command: command.to_string(),
        tables,
        summary,
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len())
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap_or(0)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let levels = RunConfig::require(&cfg.spectrum, "spectrum")?.levels;
    let spec = cfg.hamiltonian()?;
    let n = spec.n_sites();
    let mut table = Table::new("spectrum", &["kind", "sector", "index", "energy_mhz"]);

    let sp = diagonalize(&spec.hopping);
    for (k, &e) in sp.eigenvalues.iter().enumerate() {
        table.push(vec![
            "single_particle".into(),
            Cell::Text(String::new()),
            k.into(),
            e.into(),
        ]);
    }
    let edges = edge_modes(&sp, None)?;

    let driven = spec.drive != 0.0;
    let sectors: Vec<Option<usize>> = match cfg.sector {
        Some(s) => vec![Some(s)],
        None if driven => vec![None],
        None => ((n / 2).saturating_sub(1)..=(n / 2 + 1).min(n))
            .map(Some)
            .collect(),
    };
    let mut ground = serde_json::Map::new();
    for sector in sectors {
        let basis = build_basis(n, sector)?;
        let op = match cfg.statistics() {
            Statistics::Boson => build_boson_hamiltonian(&spec, basis)?,
            Statistics::Fermion if !driven => build_fermion_hamiltonian(&spec.hopping, basis)?,
            Statistics::Fermion => {
                return Err(CliError::Config(
                    "fermionic spectra are only defined without a drive".into(),
                ))
            }
        };
        let k = levels.min(op.dim());
        let pairs = lowest_eigenpairs(&op, k)?;
        let label = sector.map_or("all".to_string(), |s| s.to_string());
        for (i, &e) in pairs.values.iter().enumerate() {
            let sector_cell = sector.map_or(Cell::Text("all".into()), |s| s.into());
            table.push(vec!["many_body".into(), sector_cell, i.into(), e.into()]);
        }
        ground.insert(label, json!(pairs.values[0]));
    }
    let summary = json!({
        "n_sites": n,
        "e_hyb_mhz": edges.e_hyb,
        "mid_gap_splitting_mhz": mid_gap_splitting(&spec.hopping),
        "bulk_band_gap_mhz": bulk_band_gap(&spec.hopping, 512).ok(),
        "chiral_residual": sp.chiral_residual,
        "ground_energy_mhz": ground,
    });
    Ok(report("spectrum", vec![table], summary))
}

pub fn spectroscopy(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = *RunConfig::require(&cfg.spectroscopy, "spectroscopy")?;
    let spec = cfg.hamiltonian()?;
    let n = spec.n_sites();
    let detunings = grid(s.detuning_min_mhz, s.detuning_max_mhz, s.points);
    let vacuum = StateVector::vacuum(build_basis(n, None)?)?;
    let r = spectroscopy_scan(
        &spec,
        &vacuum,
        s.probe_rabi_mhz,
        s.t_probe_us,
        &detunings,
        &EvolutionControls::default(),
    )?;
    let mut table = Table::new("spectroscopy", &["delta_mhz", "site", "occupancy"]);
    for (g, occ) in r.occupancy.iter().enumerate() {
        for (site, &o) in occ.iter().enumerate() {
            table.push(vec![r.detunings[g].into(), site.into(), o.into()]);
        }
    }
    let series = |f: &dyn Fn(&[f64]) -> f64| r.occupancy.iter().map(|o| f(o)).collect::<Vec<f64>>();
    let left = series(&|o| o[0]);
    let right = series(&|o| o[n - 1]);
    let bulk = series(&|o| o[1..n - 1].iter().sum::<f64>() / (n - 2) as f64);
    let summary = json!({
        "points": detunings.len(),
        "left_edge_peak_mhz": r.detunings[argmax(&left)],
        "right_edge_peak_mhz": r.detunings[argmax(&right)],
        "bulk_peak_mhz": r.detunings[argmax(&bulk)],
    });
    Ok(report("spectroscopy", vec![table], summary))
}

pub fn hybridization(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = *RunConfig::require(&cfg.hybridization, "hybridization")?;
    let (j, jp) = cfg
        .chain
        .as_ref()
        .map_or((DEFAULT_J_MHZ, DEFAULT_J_PRIME_MHZ), |c| {
            (c.j_mhz, c.j_prime_mhz)
        });
    let scan = hybridization_scan(h.n_max, h.model, j, jp)?;
    let mut table = Table::new("hybridization", &["n", "e_hyb_mhz"]);
    for &(n, e) in &scan.points {
        table.push(vec![n.into(), e.into()]);
    }
    let at14 = scan.points.iter().find(|p| p.0 == 14).map(|p| p.1);
    let summary = json!({
        "model": h.model,
        "exponential_slope_per_site": scan.exponential_slope,
        "loglog_slope": scan.loglog_slope,
        "e_hyb_14_mhz": at14,
    });
    Ok(report("hybridization", vec![table], summary))
}

pub fn transfer(cfg: &RunConfig) -> Result<Report, CliError> {
    let t = *RunConfig::require(&cfg.transfer, "transfer")?;
    let spec = HamiltonianSpec::new(cfg.hopping()?);
    let r = transfer_dynamics(
        &spec,
        t.start_site,
        t.t_max_us,
        t.samples,
        &EvolutionControls::default(),
    )?;
    let mut table = Table::new("transfer", &["t_us", "left_edge", "right_edge", "bulk"]);
    for k in 0..r.times.len() {
        table.push(vec![
            r.times[k].into(),
            r.left_edge[k].into(),
            r.right_edge[k].into(),
            r.bulk[k].into(),
        ]);
    }
    let peak = r.right_edge.iter().cloned().fold(0.0, f64::max);
    let summary = json!({
        "e_hyb_mhz": r.e_hyb,
        "max_right_edge": peak,
        "single_particle_e_hyb_mhz": edge_modes(&diagonalize(&spec.hopping), None)?.e_hyb,
    });
    Ok(report("transfer", vec![table], summary))
}

pub fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = RunConfig::require(&cfg.sweep, "sweep")?;
    let schedule = s.schedule()?;
    let spec = HamiltonianSpec::new(cfg.hopping()?);
    let n = spec.n_sites();
    let final_detuning = schedule
        .breakpoints
        .last()
        .map_or(s.final_detuning_mhz, |b| b.detuning_mhz);
    let target = sector_ground_state(&spec.clone().with_drive(0.0, final_detuning), 0..=n)?;
    let r = adiabatic_sweep(
        &spec,
        &schedule,
        Some(&target.state),
        s.samples,
        &EvolutionControls::default(),
    )?;
    let mut table = Table::new("sweep", &["t_us", "n", "p_n"]);
    for (k, p) in r.p_n.iter().enumerate() {
        for (m, &pm) in p.iter().enumerate() {
            table.push(vec![r.times[k].into(), m.into(), pm.into()]);
        }
    }
    let last = r.p_n.last().cloned().unwrap_or_default();
    let summary = json!({
        "final_detuning_mhz": final_detuning,
        "final_overlap": r.final_overlap(),
        "modal_particle_number": argmax(&last),
        "target_sector": target.sector,
    });
    Ok(report("sweep", vec![table], summary))
}

pub fn phase_map_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = *RunConfig::require(&cfg.phase_map, "phase_map")?;
    let rabi = grid(0.0, p.rabi_max_mhz, p.rabi_points);
    let det = grid(p.detuning_min_mhz, p.detuning_max_mhz, p.detuning_points);
    let map = phase_map(&cfg.hopping()?, &rabi, &det)?;
    let mut table = Table::new(
        "phase_map",
        &["rabi_mhz", "delta_mhz", "n_particles", "gap_mhz"],
    );
    for r in 0..rabi.len() {
        for d in 0..det.len() {
            let k = map.index(r, d);
            table.push(vec![
                rabi[r].into(),
                det[d].into(),
                map.mean_number[k].into(),
                map.gap[k].into(),
            ]);
        }
    }
    let min_gap = map.gap.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary =
        json!({ "rabi_points": rabi.len(), "detuning_points": det.len(), "min_gap_mhz": min_gap });
    Ok(report("phase-map", vec![table], summary))
}

fn preparation(cfg: &RunConfig) -> Result<Preparation, CliError> {
    let c = RunConfig::require(&cfg.correlators, "correlators")?;
    Ok(match c.preparation {
        PreparationKind::Sweep => Preparation::Sweep {
            schedule: RunConfig::require(&cfg.sweep, "sweep")?.schedule()?,
        },
        PreparationKind::GroundState => Preparation::GroundState {
            detuning_mhz: c.detuning_mhz.unwrap_or(DEFAULT_GROUND_DETUNING_MHZ),
        },
    })
}

fn estimate(e: Option<Estimate>) -> Value {
    e.map_or(Value::Null, |e| json!({ "mean": e.mean, "sem": e.sem }))
}

pub fn correlators(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = *RunConfig::require(&cfg.correlators, "correlators")?;
    let protocol = ProtocolDescriptor {
        hopping: cfg.hopping()?,
        preparation: preparation(cfg)?,
        readout: Observable::Z,
        controls: EvolutionControls::default(),
    };
    let n = protocol.n_sites();
    let psi = protocol
        .prepare(0)?
        .ok_or_else(|| CliError::Config("empty chain".into()))?;

    let mut table = Table::new("correlators", &["i", "j", "basis", "value"]);
    for (basis, obs) in [("z", Observable::Z), ("x", Observable::X)] {
        let map = correlation_map(&psi, obs, false)?;
        for i in 0..n {
            for j in i + 1..n {
                table.push(vec![i.into(), j.into(), basis.into(), map.get(i, j).into()]);
            }
        }
    }
    let mut summary = json!({
        "c_z": bulk_dimer_correlator(&psi, Observable::Z)?,
        "c_x": bulk_dimer_correlator(&psi, Observable::X)?,
        "cz_string": string_order(&psi, Observable::Z)?.value,
        "cx_string": string_order(&psi, Observable::X)?.value,
    });
    let mut tables = vec![table];

    if let Some(model) = cfg.error_model(cfg.seed.unwrap_or(0))? {
        let realizations = cfg.errors.map_or(1, |e| e.realizations);
        let z = monte_carlo_experiment(&protocol, &model, realizations, c.shots)?;
        let xp = ProtocolDescriptor {
            readout: Observable::X,
            ..protocol.clone()
        };
        let x = monte_carlo_experiment(&xp, &model, realizations, c.shots)?;
        summary["full_simulation"] = json!({
            "c_z": estimate(z.dimer_correlator),
            "c_x": estimate(x.dimer_correlator),
            "cz_string": estimate(z.string_order),
            "cx_string": estimate(x.string_order),
            "realizations": realizations,
            "shots_per_realization": c.shots,
            "distinct_defect_masks": z.distinct_masks,
        });
        let mut records = Table::new("records", &["shot", "site", "bit"]);
        for (s, r) in realization_records(&protocol, &model, 0, c.shots)?
            .iter()
            .enumerate()
        {
            for site in 0..n {
                records.push(vec![
                    s.into(),
                    site.into(),
                    Cell::Int(r.particle(site) as i64),
                ]);
            }
        }
        tables.push(records);
    }
    Ok(report("correlators", tables, summary))
}

pub fn perturbation(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = *RunConfig::require(&cfg.perturbation, "perturbation")?;
    let half = p.max_fraction * p.j_mhz.abs();
    let g = grid(-half, half, p.points);
    let mut table = Table::new(
        "perturbation",
        &[
            "j_prime_mhz",
            "j_pp_mhz",
            "statistics",
            "e2_empty_mhz",
            "e2_filled_mhz",
            "ed_empty_mhz",
            "ed_filled_mhz",
            "abs_error_mhz",
        ],
    );
    let mut worst: f64 = 0.0;
    for &jp in &g {
        for &jpp in &g {
            let scale = jp.abs().max(jpp.abs()).powi(3) / (p.j_mhz * p.j_mhz);
            for (name, st) in [
                ("boson", Statistics::Boson),
                ("fermion", Statistics::Fermion),
            ] {
                let (e0, e1) = perturbative_oracle(p.j_mhz, jp, jpp, st)?;
                let (x0, x1) = three_site_exact(p.j_mhz, jp, jpp, st)?;
                let err = (e0 - x0).abs().max((e1 - x1).abs());
                if scale > 0.0 {
                    worst = worst.max(err / scale);
                }
                table.push(vec![
                    jp.into(),
                    jpp.into(),
                    name.into(),
                    e0.into(),
                    e1.into(),
                    x0.into(),
                    x1.into(),
                    err.into(),
                ]);
            }
        }
    }
    let summary = json!({ "points": g.len(), "max_error_over_cubic_scale": worst });
    Ok(report("perturbation", vec![table], summary))
}

pub fn haldane(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = *RunConfig::require(&cfg.haldane_path, "haldane_path")?;
    let params = grid(0.0, 1.0, h.points);
    let pts = haldane_path(h.j_mhz, h.j_prime_mhz, h.path, &params, h.cells, h.levels)?;
    let mut table = Table::new("haldane_path", &["parameter", "level", "energy"]);
    for p in &pts {
        for (k, &e) in p.energies.iter().enumerate() {
            table.push(vec![p.parameter.into(), k.into(), e.into()]);
        }
    }
    let mut summary = json!({ "path": h.path, "cells": h.cells });
    if h.levels >= 5 {
        let spread = pts.iter().map(|p| p.energies[3]).fold(0.0, f64::max);
        let gap = pts
            .iter()
            .map(|p| p.energies[4] - p.energies[3])
            .fold(f64::INFINITY, f64::min);
        summary["max_cluster_spread"] = json!(spread);
        summary["min_gap_above_cluster"] = json!(gap);
    }
    Ok(report("haldane-path", vec![table], summary))
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = RunConfig::require(&cfg.classify, "classify")?;
    let (top, triv) = mps_ground_states(c.cells)?;
    let mut table = Table::new("cocycle", &["state", "phi_rad", "chi_re", "chi_im"]);
    let mut classes = serde_json::Map::new();
    for (name, mps) in [("topological", &top), ("trivial", &triv)] {
        let rep = ProjectiveRep::new(mps)?;
        for &phi in &c.phi_samples {
            let chi = cocycle(&rep, GroupElement::s(), GroupElement::rotation(phi))?;
            table.push(vec![name.into(), phi.into(), chi.re.into(), chi.im.into()]);
        }
        classes.insert(name.to_string(), json!(classify(mps, &c.phi_samples)?));
    }
    let summary = json!({ "cells": c.cells, "classes": classes });
    Ok(report("classify", vec![table], summary))
}
