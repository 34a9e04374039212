//! Deterministic exploration simulator.
//!
//! Each tick scans the ground truth into the belief grid, rebuilds the
//! distance fields and frontier clusters, picks a goal, computes the nominal
//! velocity, filters it (or only clips it in baseline mode) and integrates.

mod episode;
mod metrics;
mod sensor;
mod trace;
mod world;

use std::path::PathBuf;

use thiserror::Error;

pub use episode::{mode_name, run_episode, step, Episode, Simulator};
pub use metrics::{compute_metrics, EpisodeMetrics, MetricsContext};
pub use sensor::{cast_ray, sense_and_update, SensorModel};
pub use trace::{write_trace_csv, TickRecord, TraceCase, TRACE_COLUMNS};
pub use world::{Scenario, World, BUNDLED_SCENARIOS, DEFAULT_ROBOT_RADIUS};

use crate::config::ConfigError;
use crate::filter::FilterError;
use crate::grid::GridError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("scenario is missing the `start_x start_y` line")]
    MissingStart,
    #[error("bad start line `{0}`")]
    BadStart(String),
    #[error("unexpected content after the start line: `{0}`")]
    TrailingContent(String),
    #[error("ground truth may not contain unknown cells")]
    UnknownInWorld,
    #[error("robot radius must be positive, got {0}")]
    RobotRadius(f64),
    #[error("start position ({x}, {y}) overlaps an obstacle or the map edge")]
    StartInContact { x: f64, y: f64 },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}
