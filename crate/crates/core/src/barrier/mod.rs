//! Barrier functions over signed distance fields and the halfspace velocity
//! constraints they induce under single-integrator kinematics.

mod shaping;

pub use shaping::{
    check_admissibility, AdmissibilityReport, Scaled, Shaping, ShapingFunction, DEFAULT_ADMISSIBILITY_RANGE,
    DEFAULT_ADMISSIBILITY_SAMPLES,
};

use thiserror::Error;

use crate::grid::SdfSample;
use crate::Vec2;

/// Constraint normals shorter than this are unusable.
pub const DEFAULT_DEGENERATE_NORM: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BarrierError {
    #[error("barrier sharpness must be positive, got {0}")]
    Sharpness(f64),
    #[error("barrier standoff must be non-negative, got {0}")]
    Standoff(f64),
    #[error("barrier gain must be positive, got {0}")]
    Gain(f64),
    #[error("gamma schedule needs 0 < gamma_min <= gamma_max, got ({min}, {max})")]
    Schedule { min: f64, max: f64 },
    #[error("uncertainty density must lie in [0, 1], got {0}")]
    DensityOutOfRange(f64),
}

/// `h = T(a (phi - d))` with decay rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub sharpness: f64,
    pub standoff: f64,
    pub gain: f64,
    pub shaping: Shaping,
}

impl BarrierSpec {
    pub fn new(sharpness: f64, standoff: f64, gain: f64, shaping: Shaping) -> Result<Self, BarrierError> {
        let spec = Self {
            sharpness,
            standoff,
            gain,
            shaping,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Obstacle barrier defaults: d_safe = 0.35 m, a1 = 2.0, gamma1 = 1.5.
    pub fn obstacle_default() -> Self {
        Self {
            sharpness: 2.0,
            standoff: 0.35,
            gain: 1.5,
            shaping: Shaping::Tanh,
        }
    }

    /// Frontier barrier defaults: d_stop = 0.35 m, a2 = 2.0. The gain is
    /// overwritten each tick by the schedule; gamma_max is used here.
    pub fn frontier_default() -> Self {
        Self {
            sharpness: 2.0,
            standoff: 0.35,
            gain: 1.0,
            shaping: Shaping::Tanh,
        }
    }

    pub fn with_gain(self, gain: f64) -> Self {
        Self { gain, ..self }
    }

    pub fn validate(&self) -> Result<(), BarrierError> {
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(BarrierError::Sharpness(self.sharpness));
        }
        if !(self.standoff >= 0.0 && self.standoff.is_finite()) {
            return Err(BarrierError::Standoff(self.standoff));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(BarrierError::Gain(self.gain));
        }
        Ok(())
    }

    fn argument(&self, sdf_value: f64) -> f64 {
        self.sharpness * (sdf_value - self.standoff)
    }
}

/// `g . u >= b`, built from one barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfspaceConstraint {
    pub normal: Vec2,
    pub offset: f64,
    /// Barrier value `h` the constraint was built from.
    pub barrier: f64,
    pub degenerate: bool,
}

impl HalfspaceConstraint {
    /// A non-degenerate constraint with no barrier attached; mostly for tests
    /// and oracles.
    pub fn new(normal: Vec2, offset: f64) -> Self {
        Self {
            normal,
            offset,
            barrier: f64::NAN,
            degenerate: normal.norm() < DEFAULT_DEGENERATE_NORM,
        }
    }

    /// `g . u - b`; non-negative when satisfied.
    #[inline]
    pub fn slack(&self, u: &Vec2) -> f64 {
        self.normal.dot(u) - self.offset
    }

    #[inline]
    pub fn is_satisfied(&self, u: &Vec2) -> bool {
        self.slack(u) >= 0.0
    }

    /// The same constraint loosened by `delta`.
    pub fn relaxed(&self, delta: f64) -> Self {
        Self {
            offset: self.offset - delta,
            ..*self
        }
    }
}

pub fn barrier_value(spec: &BarrierSpec, sdf_value: f64) -> f64 {
    spec.shaping.value(spec.argument(sdf_value))
}

/// Constraint from `h_dot >= -gamma h` with `h_dot = T'(a(phi - d)) a grad(phi) . u`.
pub fn build_constraint(spec: &BarrierSpec, sample: &SdfSample) -> HalfspaceConstraint {
    build_constraint_with_tolerance(spec, sample, DEFAULT_DEGENERATE_NORM)
}

pub fn build_constraint_with_tolerance(
    spec: &BarrierSpec,
    sample: &SdfSample,
    degenerate_norm: f64,
) -> HalfspaceConstraint {
    let s = spec.argument(sample.value);
    let h = spec.shaping.value(s);
    let normal = sample.gradient * (spec.shaping.derivative(s) * spec.sharpness);
    HalfspaceConstraint {
        normal,
        offset: -spec.gain * h,
        barrier: h,
        degenerate: sample.degenerate || normal.norm() < degenerate_norm,
    }
}

/// Bounds for the frontier gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSchedule {
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for GammaSchedule {
    fn default() -> Self {
        Self {
            gamma_min: 0.2,
            gamma_max: 1.0,
        }
    }
}

impl GammaSchedule {
    pub fn new(gamma_min: f64, gamma_max: f64) -> Result<Self, BarrierError> {
        let s = Self { gamma_min, gamma_max };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), BarrierError> {
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite()) {
            return Err(BarrierError::Schedule {
                min: self.gamma_min,
                max: self.gamma_max,
            });
        }
        Ok(())
    }
}

/// Frontier gain from the local unknown-cell density: high density relaxes
/// toward `gamma_min`, a fully mapped neighbourhood tightens to `gamma_max`.
pub fn adaptive_gamma(schedule: &GammaSchedule, rho: f64) -> Result<f64, BarrierError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(BarrierError::DensityOutOfRange(rho));
    }
    let g = schedule.gamma_min + (schedule.gamma_max - schedule.gamma_min) * (1.0 - rho);
    Ok(g.clamp(schedule.gamma_min, schedule.gamma_max))
}
