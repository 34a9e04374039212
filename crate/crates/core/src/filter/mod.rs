//! The dual-barrier velocity safety filter.
//!
//! Each control tick: build the obstacle constraint, and the frontier
//! constraint when a frontier exists (with its gain scheduled from the local
//! unknown density), project the nominal velocity onto their intersection in
//! closed form, fall back to the soft relaxation when parallel normals leave
//! the intersection empty, then clamp to the speed ceiling.

mod projection;
mod soft;

pub use projection::{
    gram_det, is_parallel, project_dual, project_pair, project_parallel, project_single, single_multiplier, verify_kkt,
    DualProjection, KktReport, ProjectionError, KKT_COMPLEMENTARY_TOL, KKT_DUAL_TOL, KKT_PRIMAL_TOL,
    KKT_STATIONARITY_TOL,
};
pub use soft::{relaxed_projection, slack_upper_bracket, soft_residual, solve_soft, SoftSolution};

use std::fmt;

use thiserror::Error;

use crate::barrier::{
    adaptive_gamma, build_constraint_with_tolerance, BarrierError, BarrierSpec, GammaSchedule, HalfspaceConstraint,
    DEFAULT_DEGENERATE_NORM,
};
use crate::grid::SdfSample;
use crate::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error("soft-QP penalty must be positive, got {0}")]
    Penalty(f64),
    #[error("speed ceiling must be positive, got {0}")]
    MaxSpeed(f64),
    #[error("bisection needs at least one iteration")]
    BisectionIterations,
    #[error("tolerance {name} must be non-negative and finite, got {value}")]
    Tolerance { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Weight on the shared slack in the soft relaxation.
    pub penalty: f64,
    pub v_max: f64,
    /// Normals count as parallel when `gram_det < parallel_tol |g1|^2 |g2|^2`.
    pub parallel_tol: f64,
    pub degenerate_tol: f64,
    pub bisection_iters: usize,
    /// Corrections at or below this norm (m/s) are not interventions.
    pub intervention_tol: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            penalty: 50.0,
            v_max: 0.2,
            parallel_tol: 1e-6,
            degenerate_tol: DEFAULT_DEGENERATE_NORM,
            bisection_iters: 20,
            intervention_tol: 1e-6,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), FilterError> {
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(FilterError::Penalty(self.penalty));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(FilterError::MaxSpeed(self.v_max));
        }
        if self.bisection_iters == 0 {
            return Err(FilterError::BisectionIterations);
        }
        for (name, value) in [
            ("parallel_tol", self.parallel_tol),
            ("degenerate_tol", self.degenerate_tol),
            ("intervention_tol", self.intervention_tol),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(FilterError::Tolerance { name, value });
            }
        }
        Ok(())
    }
}

/// Everything the filter needs besides the per-tick samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub obstacle: BarrierSpec,
    /// Frontier barrier; its gain is replaced by the scheduled value.
    pub frontier: BarrierSpec,
    pub schedule: GammaSchedule,
    pub params: FilterParams,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            obstacle: BarrierSpec::obstacle_default(),
            frontier: BarrierSpec::frontier_default(),
            schedule: GammaSchedule::default(),
            params: FilterParams::default(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        self.obstacle.validate()?;
        self.frontier.validate()?;
        self.schedule.validate()?;
        self.params.validate()
    }
}

/// Which branch produced the safe velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterCase {
    /// Both constraints satisfied by the nominal velocity.
    Nominal,
    /// Only the obstacle constraint active.
    SingleObstacle,
    /// Only the frontier constraint active.
    SingleFrontier,
    /// Both active, Gram system solved.
    Dual,
    /// Parallel normals with an empty intersection.
    SoftFallback,
    /// A violated constraint with a vanishing normal; commands zero velocity.
    FailSafeStop,
    /// No frontier; the obstacle constraint was projected onto alone.
    ObstacleOnly,
}

impl FilterCase {
    pub const ALL: [FilterCase; 7] = [
        FilterCase::Nominal,
        FilterCase::SingleObstacle,
        FilterCase::SingleFrontier,
        FilterCase::Dual,
        FilterCase::SoftFallback,
        FilterCase::FailSafeStop,
        FilterCase::ObstacleOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterCase::Nominal => "Nominal",
            FilterCase::SingleObstacle => "SingleObstacle",
            FilterCase::SingleFrontier => "SingleFrontier",
            FilterCase::Dual => "Dual",
            FilterCase::SoftFallback => "SoftFallback",
            FilterCase::FailSafeStop => "FailSafeStop",
            FilterCase::ObstacleOnly => "ObstacleOnly",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for FilterCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Frontier sample and the unknown-cell density at the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierInput {
    pub sample: SdfSample,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterResult {
    pub u_safe: Vec2,
    /// Projection output before the speed ceiling.
    pub u_projected: Vec2,
    pub case: FilterCase,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Soft-relaxation slack; zero unless `case` is `SoftFallback`.
    pub slack: f64,
    pub speed_clipped: bool,
    pub h1: f64,
    pub h2: Option<f64>,
    pub gamma2: Option<f64>,
    /// Gram determinant of the two normals, when both were built.
    pub gram_det: Option<f64>,
    /// `|u_projected - u_des|`, the correction before speed clipping.
    pub intervention_magnitude: f64,
    pub obstacle_constraint: HalfspaceConstraint,
    pub frontier_constraint: Option<HalfspaceConstraint>,
}

impl FilterResult {
    pub fn is_intervention(&self, tol: f64) -> bool {
        self.intervention_magnitude > tol
    }
}

/// Scales `u` onto the ball of radius `v_max` when it lies outside.
pub fn speed_ceiling(u: &Vec2, v_max: f64) -> Vec2 {
    let n = u.norm();
    if n <= v_max {
        *u
    } else {
        u * (v_max / n)
    }
}

fn is_blocking(c: &HalfspaceConstraint) -> bool {
    c.degenerate && c.offset > 0.0
}

/// One filter evaluation.
pub fn apply_filter(
    u_des: &Vec2,
    obstacle: &SdfSample,
    frontier: Option<&FrontierInput>,
    config: &FilterConfig,
) -> Result<FilterResult, FilterError> {
    let params = &config.params;
    let c1 = build_constraint_with_tolerance(&config.obstacle, obstacle, params.degenerate_tol);

    let (frontier_constraint, gamma2) = match frontier {
        Some(f) => {
            let gamma2 = adaptive_gamma(&config.schedule, f.rho)?;
            let spec = config.frontier.with_gain(gamma2);
            (
                Some(build_constraint_with_tolerance(&spec, &f.sample, params.degenerate_tol)),
                Some(gamma2),
            )
        }
        None => (None, None),
    };

    let mut gram = None;
    let mut slack = 0.0;
    let (u_projected, case, lambda1, lambda2) = match &frontier_constraint {
        None => {
            if is_blocking(&c1) {
                (Vec2::zeros(), FilterCase::FailSafeStop, 0.0, 0.0)
            } else if c1.degenerate || c1.is_satisfied(u_des) {
                (*u_des, FilterCase::Nominal, 0.0, 0.0)
            } else {
                let l1 = single_multiplier(u_des, &c1);
                (u_des + c1.normal * l1, FilterCase::ObstacleOnly, l1, 0.0)
            }
        }
        Some(c2) => {
            if is_blocking(&c1) || is_blocking(c2) {
                (Vec2::zeros(), FilterCase::FailSafeStop, 0.0, 0.0)
            } else if c1.degenerate && c2.degenerate {
                (*u_des, FilterCase::Nominal, 0.0, 0.0)
            } else if c1.degenerate {
                single(u_des, c2, FilterCase::SingleFrontier, false)
            } else if c2.degenerate {
                single(u_des, &c1, FilterCase::SingleObstacle, true)
            } else {
                gram = Some(gram_det(&c1.normal, &c2.normal));
                match project_dual(u_des, &c1, c2, params.parallel_tol) {
                    Ok(p) => (p.u, p.case, p.lambda1, p.lambda2),
                    Err(ProjectionError::Parallel { .. }) => match project_parallel(u_des, &c1, c2) {
                        Some(p) => (p.u, p.case, p.lambda1, p.lambda2),
                        None => {
                            let s = solve_soft(
                                u_des,
                                &c1,
                                c2,
                                params.penalty,
                                params.bisection_iters,
                                params.parallel_tol,
                            );
                            slack = s.slack;
                            (s.u, FilterCase::SoftFallback, s.mu1, s.mu2)
                        }
                    },
                }
            }
        }
    };

    let u_safe = speed_ceiling(&u_projected, params.v_max);
    Ok(FilterResult {
        u_safe,
        u_projected,
        case,
        lambda1,
        lambda2,
        slack,
        speed_clipped: u_projected.norm() > params.v_max,
        h1: c1.barrier,
        h2: frontier_constraint.map(|c| c.barrier),
        gamma2,
        gram_det: gram,
        intervention_magnitude: (u_projected - u_des).norm(),
        obstacle_constraint: c1,
        frontier_constraint,
    })
}

fn single(u_des: &Vec2, c: &HalfspaceConstraint, case: FilterCase, is_first: bool) -> (Vec2, FilterCase, f64, f64) {
    if c.is_satisfied(u_des) {
        return (*u_des, FilterCase::Nominal, 0.0, 0.0);
    }
    let l = single_multiplier(u_des, c);
    let u = u_des + c.normal * l;
    if is_first {
        (u, case, l, 0.0)
    } else {
        (u, case, 0.0, l)
    }
}
