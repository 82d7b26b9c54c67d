//! `simulate` and `seeds` subcommands.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use dhom_core::quantizer::{seed_grid, Seed};
use dhom_core::sim::{example_plant, simulate, HomFeedback, HomPlant, SimError, Trajectory};
use dhom_core::{HomQuantizer, HomSpace};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv error on {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("simulation blew up: {0}")]
    BlowUp(String),
    #[error(transparent)]
    Simulation(SimError),
    #[error("seed export supports n = 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("invalid level range `{0}`, expected <lo>..<hi>")]
    LevelRange(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Core(Box<dyn std::error::Error + Send + Sync>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::BlowUp(_) => EXIT_BLOWUP,
            Self::Io { .. } | Self::Csv { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }

    fn core(e: impl std::error::Error + Send + Sync + 'static) -> Self {
        Self::Core(Box::new(e))
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn open(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// Builds the example plant on the configured geometry. The drift is fixed;
/// the config supplies generator, weight, gain and quantizer.
pub fn build_plant(cfg: &RunConfig) -> Result<HomPlant, CliError> {
    let space: HomSpace = cfg.dilation()?.into();
    let template = example_plant();
    if cfg.dim() != template.dim() {
        return Err(ConfigError::Validation {
            key: "generator".into(),
            message: format!("the example plant has {} states", template.dim()),
        }
        .into());
    }
    if cfg.gain.nrows() != template.inputs() {
        return Err(ConfigError::Validation {
            key: "gain".into(),
            message: format!("the example plant has {} input", template.inputs()),
        }
        .into());
    }
    let drift = std::sync::Arc::new(move |x: &dhom_core::DVector<f64>| template.drift(x));
    let b = example_plant().input_matrix().clone();
    HomPlant::new(drift, b, 1.0, space).map_err(|e| match e {
        SimError::NotHomogeneous { .. } => ConfigError::Validation {
            key: "generator".into(),
            message: e.to_string(),
        }
        .into(),
        other => CliError::Simulation(other),
    })
}

pub fn run_simulation(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let plant = build_plant(cfg)?;
    let feedback = HomFeedback {
        gain: cfg.gain.clone(),
        norm_power: cfg.norm_power,
    };
    let quantizer = if cfg.quantized {
        Some(
            HomQuantizer::new(plant.space().clone(), cfg.quantizer_params()?)
                .map_err(CliError::core)?,
        )
    } else {
        None
    };
    simulate(
        &plant,
        &feedback,
        quantizer.as_ref(),
        &cfg.x0,
        cfg.step,
        cfg.t_end,
    )
    .map_err(|e| match e {
        SimError::NonFiniteState { time, .. } => {
            CliError::BlowUp(format!("non-finite state at t = {time}"))
        }
        other => CliError::Simulation(other),
    })
}

/// Header `t,x1..xn,q1..qn,u1..um,hnorm`.
pub fn trajectory_header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=n).map(|i| format!("q{i}")));
    h.extend((1..=m).map(|i| format!("u{i}")));
    h.push("hnorm".into());
    h
}

pub fn write_trajectory(traj: &Trajectory, n: usize, m: usize, out: &Path) -> Result<(), CliError> {
    let mut w = open(out)?;
    let err = csv_err(out);
    w.write_record(trajectory_header(n, m)).map_err(&err)?;
    for k in 0..traj.len() {
        let mut row = vec![num(traj.times[k])];
        row.extend(traj.states[k].iter().map(|&v| num(v)));
        row.extend(traj.quantized_states[k].iter().map(|&v| num(v)));
        row.extend(traj.controls[k].iter().map(|&v| num(v)));
        row.push(num(traj.hom_norms[k]));
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: out.display().to_string(),
        source,
    })
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let traj = run_simulation(cfg)?;
    write_trajectory(&traj, cfg.dim(), cfg.gain.nrows(), out)
}

/// Parses `lo..hi` (inclusive).
pub fn parse_levels(text: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::LevelRange(text.to_string());
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Seeds of the configured quantizer for levels `lo..=hi`.
pub fn enumerate_seeds(cfg: &RunConfig, levels: (i32, i32)) -> Result<Vec<Seed>, CliError> {
    let n = cfg.dim();
    if n != 2 && n != 3 {
        return Err(CliError::UnsupportedDimension(n));
    }
    let space: HomSpace = cfg.dilation()?.into();
    let p = cfg.quantizer_params()?;
    seed_grid(&space, &p, levels).map_err(CliError::core)
}

pub fn cmd_seeds(cfg: &RunConfig, levels: (i32, i32), out: &Path) -> Result<usize, CliError> {
    let seeds = enumerate_seeds(cfg, levels)?;
    let mut w = open(out)?;
    let err = csv_err(out);
    let mut header = vec!["level".to_string(), "angle_index".to_string()];
    header.extend((1..=cfg.dim()).map(|i| format!("s{i}")));
    header.push("hnorm".into());
    w.write_record(&header).map_err(&err)?;
    for seed in &seeds {
        let mut row = vec![seed.level.to_string(), seed.angle_index.to_string()];
        row.extend(seed.coords.iter().map(|&v| num(v)));
        row.push(num(seed.hnorm));
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: out.display().to_string(),
        source,
    })?;
    Ok(seeds.len())
}

/// Writes `msg` to stderr, ignoring a closed pipe.
pub fn report(msg: &str) {
    let _ = writeln!(io::stderr(), "{msg}");
}
