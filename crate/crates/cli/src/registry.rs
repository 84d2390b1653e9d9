//! Named targets with pinned, in-repo configurations.

use crate::commands;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Spectrum,
    Spectroscopy,
    Hybridization,
    Transfer,
    Sweep,
    PhaseMap,
    Correlators,
    Perturbation,
    HaldanePath,
    Classify,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Spectrum => "spectrum",
            Pipeline::Spectroscopy => "spectroscopy",
            Pipeline::Hybridization => "hybridization",
            Pipeline::Transfer => "transfer",
            Pipeline::Sweep => "sweep",
            Pipeline::PhaseMap => "phase-map",
            Pipeline::Correlators => "correlators",
            Pipeline::Perturbation => "perturbation",
            Pipeline::HaldanePath => "haldane-path",
            Pipeline::Classify => "classify",
        }
    }

    pub fn run(self, cfg: &RunConfig) -> Result<Report, CliError> {
        match self {
            Pipeline::Spectrum => commands::spectrum(cfg),
            Pipeline::Spectroscopy => commands::spectroscopy(cfg),
            Pipeline::Hybridization => commands::hybridization(cfg),
            Pipeline::Transfer => commands::transfer(cfg),
            Pipeline::Sweep => commands::sweep(cfg),
            Pipeline::PhaseMap => commands::phase_map_cmd(cfg),
            Pipeline::Correlators => commands::correlators(cfg),
            Pipeline::Perturbation => commands::perturbation(cfg),
            Pipeline::HaldanePath => commands::haldane(cfg),
            Pipeline::Classify => commands::classify_cmd(cfg),
        }
    }
}

pub struct Target {
    pub id: &'static str,
    pub pipeline: Pipeline,
    pub config: &'static str,
    pub description: &'static str,
}

macro_rules! pinned {
    ($file:literal) => {
        include_str!(concat!("../../../configs/", $file))
    };
}

pub const TARGETS: &[Target] = &[
    Target {
        id: "fig2b",
        pipeline: Pipeline::Spectroscopy,
        config: pinned!("fig2b.json"),
        description: "single-particle spectroscopy, topological chain",
    },
    Target {
        id: "fig2b-trivial",
        pipeline: Pipeline::Spectroscopy,
        config: pinned!("fig2b-trivial.json"),
        description: "single-particle spectroscopy, trivial chain",
    },
    Target {
        id: "fig3e",
        pipeline: Pipeline::Transfer,
        config: pinned!("fig3e.json"),
        description: "edge-to-edge transfer of one particle",
    },
    Target {
        id: "fig4",
        pipeline: Pipeline::Spectrum,
        config: pinned!("fig4.json"),
        description: "single-particle and many-body spectra",
    },
    Target {
        id: "fig5",
        pipeline: Pipeline::Spectrum,
        config: pinned!("fig5.json"),
        description: "spectra with a same-sublattice edge coupling",
    },
    Target {
        id: "fig-s2a",
        pipeline: Pipeline::Hybridization,
        config: pinned!("fig-s2a.json"),
        description: "edge hybridization versus length",
    },
    Target {
        id: "fig-s4",
        pipeline: Pipeline::PhaseMap,
        config: pinned!("fig-s4.json"),
        description: "particle number and gap over drive and detuning",
    },
    Target {
        id: "fig-s5",
        pipeline: Pipeline::Sweep,
        config: pinned!("fig-s5.json"),
        description: "adiabatic preparation sweep",
    },
    Target {
        id: "fig-s6",
        pipeline: Pipeline::HaldanePath,
        config: pinned!("fig-s6.json"),
        description: "lowest levels along the ladder path",
    },
    Target {
        id: "table-s1",
        pipeline: Pipeline::Correlators,
        config: pinned!("table-s1.json"),
        description: "dimer and string correlators",
    },
    Target {
        id: "perturbation",
        pipeline: Pipeline::Perturbation,
        config: pinned!("perturbation.json"),
        description: "three-site second-order shifts",
    },
    Target {
        id: "cohomology",
        pipeline: Pipeline::Classify,
        config: pinned!("cohomology.json"),
        description: "cocycles and SPT class of the MPS states",
    },
];

pub fn lookup(id: &str) -> Result<&'static Target, CliError> {
    TARGETS.iter().find(|t| t.id == id).ok_or_else(|| {
        let known: Vec<&str> = TARGETS.iter().map(|t| t.id).collect();
        CliError::Config(format!(
            "unknown target `{id}`; known targets: {}",
            known.join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_pinned_config_validates() {
        for t in TARGETS {
            if let Err(d) = crate::config::parse(t.config) {
                panic!("{}: {:?}", t.id, d);
            }
        }
    }

    #[test]
    fn unknown_target_lists_known() {
        let err = lookup("fig9").err().unwrap();
        assert!(err.to_string().contains("table-s1"));
    }
}
