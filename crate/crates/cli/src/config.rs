//! Run configuration: JSON validated against the shipped schema, then
//! against the physical contracts of the engine.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rydssh::engine::{Breakpoint, CanonicalTimings, SweepSchedule};
use rydssh::geometry::{
    build_magic_chain_with, coupling_matrix_with, perturb_edge, ChainConfig, ChainGeometry,
    CouplingMatrix, CouplingRange, MagicLayout,
};
use rydssh::mbcore::{HamiltonianSpec, Statistics, MAX_SITES};
use rydssh::noise::ErrorModel;
use rydssh::protocols::HaldanePath;
use rydssh::spmodel::HybridizationModel;

use crate::error::CliError;

pub const SCHEMA: &str = include_str!("../../../schema/run_config.schema.json");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Statistics>,
    /// Fixed particle-number sector for eigensolves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectroscopy: Option<SpectroscopySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybridization: Option<HybridizationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_map: Option<PhaseMapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlators: Option<CorrelatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub haldane_path: Option<HaldaneSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    FullDipolar,
    NearestNeighbor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub j_mhz: f64,
    pub j_prime_mhz: f64,
    #[serde(default = "default_termination")]
    pub termination: ChainConfig,
    #[serde(default = "default_couplings")]
    pub couplings: CouplingModel,
    /// Move the last atom until its coupling to site N−2 equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_j_pp_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<MagicLayout>,
    /// Explicit geometry; replaces the magic-angle builder when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_file: Option<String>,
}

fn default_termination() -> ChainConfig {
    ChainConfig::Topological
}

fn default_couplings() -> CouplingModel {
    CouplingModel::FullDipolar
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopySpec {
    pub probe_rabi_mhz: f64,
    pub t_probe_us: f64,
    pub detuning_min_mhz: f64,
    pub detuning_max_mhz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridizationSpec {
    pub n_max: usize,
    pub model: HybridizationModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    pub start_site: usize,
    pub t_max_us: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub final_detuning_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<CanonicalTimings>,
    /// Explicit waveform; overrides the canonical shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<Breakpoint>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    101
}

impl SweepSpec {
    pub fn schedule(&self) -> Result<SweepSchedule, CliError> {
        match &self.breakpoints {
            Some(b) => Ok(SweepSchedule::new(b.clone())?),
            None => Ok(SweepSchedule::canonical_with(
                self.final_detuning_mhz,
                &self.timings.unwrap_or_default(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMapSpec {
    pub rabi_max_mhz: f64,
    pub rabi_points: usize,
    pub detuning_min_mhz: f64,
    pub detuning_max_mhz: f64,
    pub detuning_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreparationKind {
    Sweep,
    GroundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorSpec {
    pub preparation: PreparationKind,
    /// Detuning of the exact ground state; sweeps use `sweep.final_detuning_mhz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_mhz: Option<f64>,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

fn default_shots() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpec {
    pub eta: f64,
    pub eps: f64,
    pub eps_prime: f64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_realizations() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub j_mhz: f64,
    /// Grid half-width as a fraction of `|J|`.
    pub max_fraction: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaldaneSpec {
    #[serde(default = "default_haldane_path")]
    pub path: HaldanePath,
    pub j_mhz: f64,
    pub j_prime_mhz: f64,
    pub cells: usize,
    pub levels: usize,
    pub points: usize,
}

fn default_haldane_path() -> HaldanePath {
    HaldanePath::DeltaRamp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub phi_samples: Vec<f64>,
    pub cells: usize,
}

/// One validation finding, tied to a dotted field path and, when it can be
/// located, a line of the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Line of the first occurrence of `"key"` at or after the line holding
/// each earlier path segment.
fn locate(text: &str, path: &[&str]) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let mut from = 0;
    let mut found = None;
    for seg in path {
        if seg.parse::<usize>().is_ok() {
            continue;
        }
        let needle = format!("\"{seg}\"");
        let hit = (from..lines.len()).find(|&l| lines[l].contains(&needle))?;
        from = hit;
        found = Some(hit + 1);
    }
    found
}

fn diag(text: &str, field: &str, message: impl Into<String>) -> Diagnostic {
    let path: Vec<&str> = field.split('.').collect();
    Diagnostic {
        field: field.to_string(),
        line: locate(text, &path),
        message: message.into(),
    }
}

/// Parse and validate a configuration text. Every finding is returned.
pub fn parse(text: &str) -> Result<RunConfig, Vec<Diagnostic>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic {
            field: "<document>".into(),
            line: Some(e.line()),
            message: e.to_string(),
        }]
    })?;
    let schema: serde_json::Value =
        serde_json::from_str(SCHEMA).expect("shipped schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    let mut found: Vec<Diagnostic> = validator
        .iter_errors(&value)
        .map(|e| {
            let pointer = e.instance_path().to_string();
            let segs: Vec<&str> = pointer.split('/').filter(|s| !s.is_empty()).collect();
            let field = if segs.is_empty() {
                "<document>".to_string()
            } else {
                segs.join(".")
            };
            Diagnostic {
                line: locate(text, &segs),
                field,
                message: format!("schema: {e}"),
            }
        })
        .collect();
    if !found.is_empty() {
        return Err(found);
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(|e| {
        vec![Diagnostic {
            field: "<document>".into(),
            line: None,
            message: e.to_string(),
        }]
    })?;
    found.extend(physics(&cfg, text));
    if found.is_empty() {
        Ok(cfg)
    } else {
        Err(found)
    }
}

pub fn load(path: &Path) -> Result<(RunConfig, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match parse(&text) {
        Ok(cfg) => Ok((cfg, text)),
        Err(d) => Err(CliError::Invalid {
            source_name: path.display().to_string(),
            diagnostics: d,
        }),
    }
}

/// Physical contracts that the schema cannot express.
pub fn physics(cfg: &RunConfig, text: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(c) = &cfg.chain {
        if c.n_sites % 2 != 0 {
            out.push(diag(
                text,
                "chain.n_sites",
                format!("SSH chains need an even number of sites, got {}", c.n_sites),
            ));
        }
        if c.n_sites > MAX_SITES {
            out.push(diag(
                text,
                "chain.n_sites",
                format!("at most {MAX_SITES} sites are supported"),
            ));
        }
        if !(c.j_mhz.abs() > c.j_prime_mhz.abs()) {
            out.push(diag(
                text,
                "chain.j_prime_mhz",
                format!(
                    "the strong link must dominate: |J| = {} MHz is not above |J′| = {} MHz",
                    c.j_mhz.abs(),
                    c.j_prime_mhz.abs()
                ),
            ));
        }
        if let Some(s) = cfg.sector {
            if s > c.n_sites {
                out.push(diag(
                    text,
                    "sector",
                    format!("sector {s} exceeds the {} available sites", c.n_sites),
                ));
            }
        }
    }
    if let (Some(_), Some(d)) = (cfg.sector, cfg.drive) {
        if d.rabi_mhz != 0.0 {
            out.push(diag(
                text,
                "sector",
                "a nonzero drive does not conserve particle number, so no fixed sector can hold the evolution; remove `sector` or set drive.rabi_mhz to 0",
            ));
        }
    }
    if let Some(e) = &cfg.errors {
        if let Err(err) = ErrorModel::new(e.eta, e.eps, e.eps_prime, 0) {
            out.push(diag(text, "errors", err.to_string()));
        }
    }
    if let Some(s) = &cfg.spectroscopy {
        if !(s.detuning_max_mhz >= s.detuning_min_mhz) {
            out.push(diag(
                text,
                "spectroscopy.detuning_max_mhz",
                "must not be below detuning_min_mhz",
            ));
        }
    }
    if let Some(p) = &cfg.phase_map {
        if !(p.detuning_max_mhz >= p.detuning_min_mhz) {
            out.push(diag(
                text,
                "phase_map.detuning_max_mhz",
                "must not be below detuning_min_mhz",
            ));
        }
    }
    if let Some(s) = &cfg.sweep {
        if let Err(e) = s.schedule() {
            out.push(diag(text, "sweep", e.to_string()));
        }
    }
    out
}

/// Uniform grid of `points` values over `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

impl RunConfig {
    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("this command needs a `{name}` section")))
    }

    pub fn geometry(&self) -> Result<Option<ChainGeometry>, CliError> {
        let c = Self::require(&self.chain, "chain")?;
        if c.couplings == CouplingModel::NearestNeighbor
            && c.geometry_file.is_none()
            && c.edge_j_pp_mhz.is_none()
        {
            return Ok(None);
        }
        let geom = match &c.geometry_file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("chain.geometry_file {p}: {e}")))?;
                ChainGeometry::from_json(&text)?
            }
            None => {
                build_magic_chain_with(
                    c.n_sites,
                    c.j_mhz,
                    c.j_prime_mhz,
                    c.termination,
                    &c.layout.unwrap_or_default(),
                )?
                .geometry
            }
        };
        Ok(Some(match c.edge_j_pp_mhz {
            Some(jpp) => perturb_edge(&geom, jpp)?.geometry,
            None => geom,
        }))
    }

    pub fn hopping(&self) -> Result<CouplingMatrix, CliError> {
        let c = Self::require(&self.chain, "chain")?;
        let range = match c.couplings {
            CouplingModel::FullDipolar => CouplingRange::Full,
            CouplingModel::NearestNeighbor => CouplingRange::NearestNeighbor,
        };
        match self.geometry()? {
            Some(g) => Ok(coupling_matrix_with(&g, None, range)?),
            None => {
                let (j, jp) = (c.j_mhz, c.j_prime_mhz);
                Ok(match c.termination {
                    ChainConfig::Topological => CouplingMatrix::ssh(c.n_sites, j, jp),
                    ChainConfig::Trivial => CouplingMatrix::ssh(c.n_sites, jp, j),
                })
            }
        }
    }

    /// Hamiltonian with the configured drive.
    pub fn hamiltonian(&self) -> Result<HamiltonianSpec, CliError> {
        let mut spec = HamiltonianSpec::new(self.hopping()?);
        if let Some(d) = self.drive {
            spec = spec.with_drive(d.rabi_mhz, d.detuning_mhz);
            spec.drive_phase = d.phase_rad;
        }
        Ok(spec)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics.unwrap_or(Statistics::Boson)
    }

    pub fn error_model(&self, seed: u64) -> Result<Option<ErrorModel>, CliError> {
        match &self.errors {
            Some(e) => Ok(Some(ErrorModel::new(e.eta, e.eps, e.eps_prime, seed)?)),
            None => Ok(None),
        }
    }
}
