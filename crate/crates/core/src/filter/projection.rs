//! Euclidean projection onto one or two velocity halfspaces.

use thiserror::Error;

use super::FilterCase;
use crate::barrier::HalfspaceConstraint;
use crate::Vec2;

#[derive(Debug, Clone, Copy, Error, PartialEq)]
pub enum ProjectionError {
    #[error("constraint normals are parallel (gram determinant {gram_det:e})")]
    Parallel { gram_det: f64 },
}

/// Outcome of a projection onto at most two halfspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualProjection {
    pub u: Vec2,
    pub case: FilterCase,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gram_det: f64,
}

/// `|g1|^2 |g2|^2 - (g1 . g2)^2`, i.e. `sin^2(theta) |g1|^2 |g2|^2`.
#[inline]
pub fn gram_det(g1: &Vec2, g2: &Vec2) -> f64 {
    g1.norm_squared() * g2.norm_squared() - g1.dot(g2).powi(2)
}

/// True when the normals fall inside the parallel band
/// `gram_det < tol |g1|^2 |g2|^2`.
#[inline]
pub fn is_parallel(g1: &Vec2, g2: &Vec2, tol: f64) -> bool {
    gram_det(g1, g2) < tol * g1.norm_squared() * g2.norm_squared()
}

/// Multiplier of the single-halfspace projection (zero when already feasible).
#[inline]
pub fn single_multiplier(u_des: &Vec2, c: &HalfspaceConstraint) -> f64 {
    let violation = c.offset - c.normal.dot(u_des);
    if violation <= 0.0 {
        0.0
    } else {
        violation / c.normal.norm_squared()
    }
}

/// Projection of `u_des` onto `{u : g . u >= b}`. The constraint must not be
/// degenerate.
pub fn project_single(u_des: &Vec2, c: &HalfspaceConstraint) -> Vec2 {
    debug_assert!(c.normal.norm_squared() > 0.0, "projection onto a degenerate halfspace");
    u_des + c.normal * single_multiplier(u_des, c)
}

/// Closed-form projection onto the intersection of two non-parallel
/// halfspaces by enumerating the KKT active sets.
///
/// Case 1: `u_des` already feasible. Cases 2/3: project onto a violated
/// halfspace and keep the result if it satisfies the other. Case 4: both
/// active, solved through the 2x2 Gram system; a negative multiplier drops
/// its constraint in favour of the other single projection.
pub fn project_dual(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    parallel_tol: f64,
) -> Result<DualProjection, ProjectionError> {
    let (g1, g2) = (&c1.normal, &c2.normal);
    let det = gram_det(g1, g2);
    if det < parallel_tol * g1.norm_squared() * g2.norm_squared() {
        return Err(ProjectionError::Parallel { gram_det: det });
    }

    let s1 = c1.slack(u_des);
    let s2 = c2.slack(u_des);
    let result = |u, case, lambda1, lambda2| DualProjection {
        u,
        case,
        lambda1,
        lambda2,
        gram_det: det,
    };

    if s1 >= 0.0 && s2 >= 0.0 {
        return Ok(result(*u_des, FilterCase::Nominal, 0.0, 0.0));
    }
    if s1 < 0.0 {
        let l1 = single_multiplier(u_des, c1);
        let u1 = u_des + g1 * l1;
        if c2.is_satisfied(&u1) {
            return Ok(result(u1, FilterCase::SingleObstacle, l1, 0.0));
        }
    }
    if s2 < 0.0 {
        let l2 = single_multiplier(u_des, c2);
        let u2 = u_des + g2 * l2;
        if c1.is_satisfied(&u2) {
            return Ok(result(u2, FilterCase::SingleFrontier, 0.0, l2));
        }
    }

    let g11 = g1.norm_squared();
    let g22 = g2.norm_squared();
    let g12 = g1.dot(g2);
    let r1 = -s1;
    let r2 = -s2;
    let l1 = (r1 * g22 - g12 * r2) / det;
    let l2 = (g11 * r2 - g12 * r1) / det;

    if l1 < 0.0 {
        let l2 = single_multiplier(u_des, c2);
        return Ok(result(u_des + g2 * l2, FilterCase::SingleFrontier, 0.0, l2));
    }
    if l2 < 0.0 {
        let l1 = single_multiplier(u_des, c1);
        return Ok(result(u_des + g1 * l1, FilterCase::SingleObstacle, l1, 0.0));
    }
    Ok(result(u_des + g1 * l1 + g2 * l2, FilterCase::Dual, l1, l2))
}

/// Feasibility slop used where parallel halfspaces may meet in a single line.
#[inline]
pub(crate) fn feasibility_slop(c: &HalfspaceConstraint) -> f64 {
    1e-12 * (1.0 + c.offset.abs())
}

/// Projection for normals inside the parallel band. Same-direction pairs
/// reduce to the tighter halfspace; anti-parallel pairs form a slab. Returns
/// `None` when the slab is empty.
pub fn project_parallel(u_des: &Vec2, c1: &HalfspaceConstraint, c2: &HalfspaceConstraint) -> Option<DualProjection> {
    let det = gram_det(&c1.normal, &c2.normal);
    let ok = |c: &HalfspaceConstraint, u: &Vec2| c.slack(u) >= -feasibility_slop(c);
    let result = |u, case, lambda1, lambda2| DualProjection {
        u,
        case,
        lambda1,
        lambda2,
        gram_det: det,
    };

    let s1 = c1.slack(u_des);
    let s2 = c2.slack(u_des);
    if s1 >= 0.0 && s2 >= 0.0 {
        return Some(result(*u_des, FilterCase::Nominal, 0.0, 0.0));
    }
    if s1 < 0.0 {
        let l1 = single_multiplier(u_des, c1);
        let u1 = u_des + c1.normal * l1;
        if ok(c2, &u1) {
            return Some(result(u1, FilterCase::SingleObstacle, l1, 0.0));
        }
    }
    if s2 < 0.0 {
        let l2 = single_multiplier(u_des, c2);
        let u2 = u_des + c2.normal * l2;
        if ok(c1, &u2) {
            return Some(result(u2, FilterCase::SingleFrontier, 0.0, l2));
        }
    }
    None
}

/// Exact projection onto two halfspaces in any configuration; `None` when
/// the intersection is empty. Normals inside the parallel band are handled
/// as exactly parallel.
pub fn project_pair(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    parallel_tol: f64,
) -> Option<DualProjection> {
    match project_dual(u_des, c1, c2, parallel_tol) {
        Ok(p) => Some(p),
        Err(ProjectionError::Parallel { .. }) => project_parallel(u_des, c1, c2),
    }
}

/// Pass/fail for each KKT condition of the two-halfspace projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KktReport {
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub complementary_slackness: bool,
    pub stationarity: bool,
}

impl KktReport {
    pub fn all_pass(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.complementary_slackness && self.stationarity
    }
}

pub const KKT_PRIMAL_TOL: f64 = 1e-9;
pub const KKT_DUAL_TOL: f64 = 1e-12;
pub const KKT_COMPLEMENTARY_TOL: f64 = 1e-9;
pub const KKT_STATIONARITY_TOL: f64 = 1e-9;

/// Checks the four KKT conditions for `result` as a projection of `u_des`.
pub fn verify_kkt(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    result: &DualProjection,
) -> KktReport {
    let u = &result.u;
    let (l1, l2) = (result.lambda1, result.lambda2);
    let (s1, s2) = (c1.slack(u), c2.slack(u));
    let residual = u - u_des - c1.normal * l1 - c2.normal * l2;
    KktReport {
        primal_feasible: s1 >= -KKT_PRIMAL_TOL && s2 >= -KKT_PRIMAL_TOL,
        dual_feasible: l1 >= -KKT_DUAL_TOL && l2 >= -KKT_DUAL_TOL,
        complementary_slackness: (l1 * s1).abs() <= KKT_COMPLEMENTARY_TOL && (l2 * s2).abs() <= KKT_COMPLEMENTARY_TOL,
        stationarity: residual.norm() <= KKT_STATIONARITY_TOL,
    }
}
