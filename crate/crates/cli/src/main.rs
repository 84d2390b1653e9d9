#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod registry;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{HybridizationSpec, RunConfig};
use error::CliError;
use registry::Pipeline;
use report::{Format, Metadata};
use rydssh::spmodel::HybridizationModel;

#[derive(Parser, Debug)]
#[command(
    name = "rydssh",
    version,
    about = "Batch workbench for bosonic SSH chain simulations"
)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; results go to standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker cap; 1 runs every kernel sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the error-model realization count.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Defaults to csv with --out and json on standard output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    #[value(alias = "full_dipolar")]
    Full,
    #[value(alias = "nearest_neighbor")]
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    Spectrum,
    Spectroscopy,
    Hybridization {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    Transfer,
    Sweep,
    PhaseMap,
    Correlators,
    Perturbation,
    HaldanePath,
    Classify,
    /// Run the pinned configuration of a named figure or table.
    Reproduce {
        id: String,
        #[arg(long, value_enum, default_value = "on")]
        errors: Toggle,
    },
    /// Check a configuration without running it.
    Validate {
        path: PathBuf,
    },
    /// List the reproduce targets.
    Targets,
}

fn base_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(p) => Ok(config::load(p)?.0),
        None => Ok(RunConfig::default()),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rydssh::par::configure_threads(n);
    }
    let (pipeline, mut cfg) = match &cli.command {
        Command::Validate { path } => {
            config::load(path)?;
            println!("{}: valid", path.display());
            return Ok(());
        }
        Command::Targets => {
            for t in registry::TARGETS {
                println!("{:<14} {:<14} {}", t.id, t.pipeline.name(), t.description);
            }
            return Ok(());
        }
        Command::Reproduce { id, errors } => {
            let target = registry::lookup(id)?;
            let mut cfg = config::parse(target.config).map_err(|d| CliError::Invalid {
                source_name: format!("pinned config {id}"),
                diagnostics: d,
            })?;
            if *errors == Toggle::Off {
                cfg.errors = None;
            }
            (target.pipeline, cfg)
        }
        Command::Hybridization { n_max, model } => {
            let mut cfg = base_config(cli)?;
            let mut h = cfg.hybridization.unwrap_or(HybridizationSpec {
                n_max: 100,
                model: HybridizationModel::FullDipolar,
            });
            if let Some(n) = n_max {
                h.n_max = *n;
            }
            if let Some(m) = model {
                h.model = match m {
                    ModelArg::Full => HybridizationModel::FullDipolar,
                    ModelArg::Nearest => HybridizationModel::NearestNeighbor,
                };
            }
            cfg.hybridization = Some(h);
            (Pipeline::Hybridization, cfg)
        }
        other => {
            let pipeline = match other {
                Command::Spectrum => Pipeline::Spectrum,
                Command::Spectroscopy => Pipeline::Spectroscopy,
                Command::Transfer => Pipeline::Transfer,
                Command::Sweep => Pipeline::Sweep,
                Command::PhaseMap => Pipeline::PhaseMap,
                Command::Correlators => Pipeline::Correlators,
                Command::Perturbation => Pipeline::Perturbation,
                Command::HaldanePath => Pipeline::HaldanePath,
                Command::Classify => Pipeline::Classify,
                _ => unreachable!("handled above"),
            };
            (pipeline, base_config(cli)?)
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let (Some(r), Some(e)) = (cli.realizations, cfg.errors.as_mut()) {
        e.realizations = r;
    }
    let seed = cfg.seed.unwrap_or(0);

    let report = pipeline.run(&cfg)?;
    let meta = Metadata::new(pipeline.name(), &cfg, seed)?;
    match &cli.out {
        Some(dir) => {
            for p in report::write_dir(&report, &meta, dir, cli.format.unwrap_or(Format::Csv))? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!(
            "{}",
            report::to_stdout(&report, &meta, cli.format.unwrap_or(Format::Json))?
        ),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invalid {
                source_name,
                diagnostics,
            } = &e
            {
                for d in diagnostics {
                    eprintln!("  {source_name}: {d}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
