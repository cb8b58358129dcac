//! Geometry-based stochastic channel simulator.
//!
//! A fixed base station with a dual-polarized uniform planar array serves a
//! single-antenna UE moving along a linear or circular track. Each path is a
//! single bounce off a point scatterer (or the direct ray). In the default
//! drifting mode the delay and both unit vectors of every path are recomputed
//! from the exact geometry at each sounding instant, which is what makes the
//! channel non-stationary over a trajectory.

mod config;
mod dataset;
mod geometry;
mod io;
mod paths;
mod trajectory;

pub use config::{ChannelMode, ScenarioConfig, ScenarioKind, SpeedSetting, TrackKind, SPEED_OF_LIGHT};
pub use dataset::{build_dataset, Dataset, Partition, TrajectoryRecord, Window, WindowRef};
pub use geometry::{antenna_positions, polarization_of, unit_from_angles, Vec3};
pub use io::{read_dataset, write_dataset, DatasetDtype, DATASET_MAGIC, DATASET_VERSION};
pub use paths::{sample_paths, Path, PathGeometry, PathSet};
pub use trajectory::{generate_trajectory, snapshot, Trajectory, UeState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(String),
    #[error("UE within {distance:.3} m of scatterer {path}")]
    Collision { path: usize, distance: f64 },
    #[error("path {0} has no scatterer geometry, drifting mode unavailable")]
    NoGeometry(usize),
    #[error("trajectory of {t} snapshots too short for K={k}, horizon={horizon}")]
    TooShort { t: usize, k: usize, horizon: usize },
    #[error("malformed dataset file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
