//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, unknown keys are rejected
//! and missing keys keep their defaults. [`RunConfig`]'s `Display` output is
//! itself a valid configuration document.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::barrier::{BarrierSpec, GammaSchedule, Shaping};
use crate::filter::{FilterConfig, FilterParams};
use crate::grid::DEFAULT_N_MIN;
use crate::nominal::{ApfParams, DEFAULT_GOAL_REACHED_RADIUS};
use crate::sim::SensorModel;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    Type {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Bundled scenario name or path to a scenario file.
    pub scenario: String,
    pub ticks: usize,
    pub dt: f64,
    pub seed: u64,
    pub filter_enabled: bool,
    pub a1: f64,
    pub a2: f64,
    pub d_safe: f64,
    pub d_stop: f64,
    pub gamma1: f64,
    pub gamma2_min: f64,
    pub gamma2_max: f64,
    pub shaping: Shaping,
    pub penalty_p: f64,
    pub v_max: f64,
    pub parallel_tol: f64,
    pub degenerate_tol: f64,
    pub bisection_iters: usize,
    pub intervention_tol: f64,
    pub k_att: f64,
    pub k_rep: f64,
    pub d0: f64,
    pub v_nom_cap: f64,
    pub goal_reached_radius: f64,
    pub n_min: usize,
    pub sensor_range: f64,
    pub sensor_rays: usize,
    pub sensor_fov: f64,
    pub robot_radius: f64,
    /// Half-width of the uniform start-position perturbation drawn from the seed.
    pub start_jitter: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let obstacle = BarrierSpec::obstacle_default();
        let frontier = BarrierSpec::frontier_default();
        let schedule = GammaSchedule::default();
        let filter = FilterParams::default();
        let apf = ApfParams::default();
        let sensor = SensorModel::default();
        Self {
            scenario: "corridor".to_string(),
            ticks: 1200,
            dt: 0.1,
            seed: 0,
            filter_enabled: true,
            a1: obstacle.sharpness,
            a2: frontier.sharpness,
            d_safe: obstacle.standoff,
            d_stop: frontier.standoff,
            gamma1: obstacle.gain,
            gamma2_min: schedule.gamma_min,
            gamma2_max: schedule.gamma_max,
            shaping: obstacle.shaping,
            penalty_p: filter.penalty,
            v_max: filter.v_max,
            parallel_tol: filter.parallel_tol,
            degenerate_tol: filter.degenerate_tol,
            bisection_iters: filter.bisection_iters,
            intervention_tol: filter.intervention_tol,
            k_att: apf.k_att,
            k_rep: apf.k_rep,
            d0: apf.d0,
            v_nom_cap: apf.v_nom_cap,
            goal_reached_radius: DEFAULT_GOAL_REACHED_RADIUS,
            n_min: DEFAULT_N_MIN,
            sensor_range: sensor.range,
            sensor_rays: sensor.rays,
            sensor_fov: sensor.fov_deg,
            robot_radius: crate::sim::DEFAULT_ROBOT_RADIUS,
            start_jitter: 0.1,
            out_dir: PathBuf::from("runs"),
        }
    }
}

/// Every accepted key, in echo order.
pub const KEYS: [&str; 31] = [
    "scenario",
    "ticks",
    "dt",
    "seed",
    "filter_enabled",
    "a1",
    "a2",
    "d_safe",
    "d_stop",
    "gamma1",
    "gamma2_min",
    "gamma2_max",
    "shaping",
    "penalty_p",
    "v_max",
    "parallel_tol",
    "degenerate_tol",
    "bisection_iters",
    "intervention_tol",
    "k_att",
    "k_rep",
    "d0",
    "v_nom_cap",
    "goal_reached_radius",
    "n_min",
    "sensor_range",
    "sensor_rays",
    "sensor_fov",
    "robot_radius",
    "start_jitter",
    "out_dir",
];

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Type {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a boolean",
        }),
    }
}

impl RunConfig {
    /// Assigns one key. Values are checked for type here and for range in
    /// [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        const F: &str = "a number";
        const U: &str = "a non-negative integer";
        match key {
            "scenario" => self.scenario = value.to_string(),
            "ticks" => self.ticks = parse(key, value, U)?,
            "dt" => self.dt = parse(key, value, F)?,
            "seed" => self.seed = parse(key, value, U)?,
            "filter_enabled" => self.filter_enabled = parse_bool(key, value)?,
            "a1" => self.a1 = parse(key, value, F)?,
            "a2" => self.a2 = parse(key, value, F)?,
            "d_safe" => self.d_safe = parse(key, value, F)?,
            "d_stop" => self.d_stop = parse(key, value, F)?,
            "gamma1" => self.gamma1 = parse(key, value, F)?,
            "gamma2_min" => self.gamma2_min = parse(key, value, F)?,
            "gamma2_max" => self.gamma2_max = parse(key, value, F)?,
            "shaping" => self.shaping = parse(key, value, "one of tanh, rational, erf")?,
            "penalty_p" => self.penalty_p = parse(key, value, F)?,
            "v_max" => self.v_max = parse(key, value, F)?,
            "parallel_tol" => self.parallel_tol = parse(key, value, F)?,
            "degenerate_tol" => self.degenerate_tol = parse(key, value, F)?,
            "bisection_iters" => self.bisection_iters = parse(key, value, U)?,
            "intervention_tol" => self.intervention_tol = parse(key, value, F)?,
            "k_att" => self.k_att = parse(key, value, F)?,
            "k_rep" => self.k_rep = parse(key, value, F)?,
            "d0" => self.d0 = parse(key, value, F)?,
            "v_nom_cap" => self.v_nom_cap = parse(key, value, F)?,
            "goal_reached_radius" => self.goal_reached_radius = parse(key, value, F)?,
            "n_min" => self.n_min = parse(key, value, U)?,
            "sensor_range" => self.sensor_range = parse(key, value, F)?,
            "sensor_rays" => self.sensor_rays = parse(key, value, U)?,
            "sensor_fov" => self.sensor_fov = parse(key, value, F)?,
            "robot_radius" => self.robot_radius = parse(key, value, F)?,
            "start_jitter" => self.start_jitter = parse(key, value, F)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Overlays the assignments of a config document onto `self`.
    pub fn apply_document(&mut self, text: &str) -> Result<(), ConfigError> {
        self.apply_lines(text, false)
    }

    fn apply_lines(&mut self, text: &str, skip_metrics: bool) -> Result<(), ConfigError> {
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if skip_metrics && key.starts_with("metrics.") {
                continue;
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            self.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                other => other,
            })?;
            seen.push(key.to_string());
        }
        Ok(())
    }

    /// Parses and validates a config document over the defaults.
    pub fn parse_document(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_document(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Recovers the configuration echoed at the top of a run summary.
    pub fn from_summary(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_lines(text, true)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse_document(&text)
    }

    pub fn obstacle_barrier(&self) -> BarrierSpec {
        BarrierSpec {
            sharpness: self.a1,
            standoff: self.d_safe,
            gain: self.gamma1,
            shaping: self.shaping,
        }
    }

    /// The frontier gain is replaced every tick by the adaptive schedule.
    pub fn frontier_barrier(&self) -> BarrierSpec {
        BarrierSpec {
            sharpness: self.a2,
            standoff: self.d_stop,
            gain: self.gamma2_max,
            shaping: self.shaping,
        }
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            obstacle: self.obstacle_barrier(),
            frontier: self.frontier_barrier(),
            schedule: GammaSchedule {
                gamma_min: self.gamma2_min,
                gamma_max: self.gamma2_max,
            },
            params: FilterParams {
                penalty: self.penalty_p,
                v_max: self.v_max,
                parallel_tol: self.parallel_tol,
                degenerate_tol: self.degenerate_tol,
                bisection_iters: self.bisection_iters,
                intervention_tol: self.intervention_tol,
            },
        }
    }

    pub fn apf_params(&self) -> ApfParams {
        ApfParams {
            k_att: self.k_att,
            k_rep: self.k_rep,
            d0: self.d0,
            v_nom_cap: self.v_nom_cap,
        }
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            range: self.sensor_range,
            rays: self.sensor_rays,
            fov_deg: self.sensor_fov,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &'static str, reason: String| ConfigError::Invalid { key, reason };
        let positive = |key: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive and finite, got {v}")))
            }
        };
        if self.scenario.trim().is_empty() {
            return Err(invalid("scenario", "must not be empty".into()));
        }
        if self.ticks == 0 {
            return Err(invalid("ticks", "must be at least 1".into()));
        }
        for (key, v) in [
            ("dt", self.dt),
            ("a1", self.a1),
            ("a2", self.a2),
            ("gamma1", self.gamma1),
            ("gamma2_min", self.gamma2_min),
            ("gamma2_max", self.gamma2_max),
            ("penalty_p", self.penalty_p),
            ("v_max", self.v_max),
            ("parallel_tol", self.parallel_tol),
            ("degenerate_tol", self.degenerate_tol),
            ("intervention_tol", self.intervention_tol),
            ("k_att", self.k_att),
            ("k_rep", self.k_rep),
            ("d0", self.d0),
            ("v_nom_cap", self.v_nom_cap),
            ("goal_reached_radius", self.goal_reached_radius),
            ("sensor_range", self.sensor_range),
            ("sensor_fov", self.sensor_fov),
            ("robot_radius", self.robot_radius),
        ] {
            positive(key, v)?;
        }
        for (key, v) in [
            ("d_safe", self.d_safe),
            ("d_stop", self.d_stop),
            ("start_jitter", self.start_jitter),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(key, format!("must be non-negative and finite, got {v}")));
            }
        }
        if self.gamma2_min > self.gamma2_max {
            return Err(invalid(
                "gamma2_min",
                format!("must not exceed gamma2_max ({} > {})", self.gamma2_min, self.gamma2_max),
            ));
        }
        if self.bisection_iters == 0 {
            return Err(invalid("bisection_iters", "must be at least 1".into()));
        }
        if self.n_min == 0 {
            return Err(invalid("n_min", "must be at least 1".into()));
        }
        if self.sensor_rays < 8 {
            return Err(invalid(
                "sensor_rays",
                format!("must be at least 8, got {}", self.sensor_rays),
            ));
        }
        if self.sensor_fov > 360.0 {
            return Err(invalid(
                "sensor_fov",
                format!("must not exceed 360 degrees, got {}", self.sensor_fov),
            ));
        }
        Ok(())
    }

    /// True when the repulsion radius does not reach past the standoff.
    pub fn repulsion_inside_standoff(&self) -> bool {
        self.apf_params().repulsion_inside_standoff(self.d_safe)
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "scenario" => self.scenario.clone(),
            "ticks" => self.ticks.to_string(),
            "dt" => self.dt.to_string(),
            "seed" => self.seed.to_string(),
            "filter_enabled" => self.filter_enabled.to_string(),
            "a1" => self.a1.to_string(),
            "a2" => self.a2.to_string(),
            "d_safe" => self.d_safe.to_string(),
            "d_stop" => self.d_stop.to_string(),
            "gamma1" => self.gamma1.to_string(),
            "gamma2_min" => self.gamma2_min.to_string(),
            "gamma2_max" => self.gamma2_max.to_string(),
            "shaping" => self.shaping.key().to_string(),
            "penalty_p" => self.penalty_p.to_string(),
            "v_max" => self.v_max.to_string(),
            "parallel_tol" => self.parallel_tol.to_string(),
            "degenerate_tol" => self.degenerate_tol.to_string(),
            "bisection_iters" => self.bisection_iters.to_string(),
            "intervention_tol" => self.intervention_tol.to_string(),
            "k_att" => self.k_att.to_string(),
            "k_rep" => self.k_rep.to_string(),
            "d0" => self.d0.to_string(),
            "v_nom_cap" => self.v_nom_cap.to_string(),
            "goal_reached_radius" => self.goal_reached_radius.to_string(),
            "n_min" => self.n_min.to_string(),
            "sensor_range" => self.sensor_range.to_string(),
            "sensor_rays" => self.sensor_rays.to_string(),
            "sensor_fov" => self.sensor_fov.to_string(),
            "robot_radius" => self.robot_radius.to_string(),
            "start_jitter" => self.start_jitter.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in KEYS {
            writeln!(f, "{key} = {}", self.value_of(key))?;
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_document(s)
    }
}
