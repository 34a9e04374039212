//! Soft relaxation for an empty hard intersection:
//!
//! ```text
//! min_{u, delta >= 0}  1/2 |u - u_des|^2 + p/2 delta^2
//!     s.t.  g_i . u >= b_i - delta,  i = 1, 2
//! ```
//!
//! For fixed `delta` the optimal `u` is the hard projection onto the relaxed
//! halfspaces, with multipliers `mu_i(delta)`. The optimal slack is the root
//! of `f(delta) = p delta - (mu_1 + mu_2)`, which is nondecreasing; relaxed
//! sets that are still empty count as `f = -inf`.

use super::projection::{gram_det, is_parallel, project_pair, DualProjection};
use crate::barrier::HalfspaceConstraint;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftSolution {
    pub u: Vec2,
    pub slack: f64,
    pub mu1: f64,
    pub mu2: f64,
}

/// Upper end of the bisection bracket: at this slack `u_des` itself satisfies
/// both relaxed constraints.
pub fn slack_upper_bracket(u_des: &Vec2, c1: &HalfspaceConstraint, c2: &HalfspaceConstraint) -> f64 {
    (-c1.slack(u_des)).max(-c2.slack(u_des)).max(0.0) + 1e-6
}

/// Hard projection onto the constraints relaxed by `delta`.
pub fn relaxed_projection(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    delta: f64,
    parallel_tol: f64,
) -> Option<DualProjection> {
    project_pair(u_des, &c1.relaxed(delta), &c2.relaxed(delta), parallel_tol)
}

/// `p delta - (mu_1 + mu_2)`; `-inf` when the relaxed set is empty.
pub fn soft_residual(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    penalty: f64,
    delta: f64,
    parallel_tol: f64,
) -> f64 {
    match relaxed_projection(u_des, c1, c2, delta, parallel_tol) {
        Some(p) => penalty * delta - (p.lambda1 + p.lambda2),
        None => f64::NEG_INFINITY,
    }
}

/// Smallest slack at which two anti-parallel halfspaces intersect; zero for
/// any other pair.
fn feasibility_threshold(c1: &HalfspaceConstraint, c2: &HalfspaceConstraint, parallel_tol: f64) -> f64 {
    let (g1, g2) = (&c1.normal, &c2.normal);
    if !is_parallel(g1, g2, parallel_tol) || g1.dot(g2) >= 0.0 {
        return 0.0;
    }
    // g2 = -k g1: need b1 - delta <= g1.u <= (delta - b2) / k.
    let k = -g1.dot(g2) / g1.norm_squared();
    ((k * c1.offset + c2.offset) / (1.0 + k)).max(0.0)
}

/// Root of the residual restricted to the active set found at `delta`.
fn active_set_root(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    p: &DualProjection,
    penalty: f64,
) -> f64 {
    let a1 = p.lambda1 > 0.0;
    let a2 = p.lambda2 > 0.0;
    match (a1, a2) {
        (false, false) => 0.0,
        (true, false) => -c1.slack(u_des) / (penalty * c1.normal.norm_squared() + 1.0),
        (false, true) => -c2.slack(u_des) / (penalty * c2.normal.norm_squared() + 1.0),
        (true, true) => {
            // mu(delta) = G^-1 (r - delta 1), so f is affine in delta.
            let (g1, g2) = (&c1.normal, &c2.normal);
            let det = gram_det(g1, g2);
            let (g11, g22, g12) = (g1.norm_squared(), g2.norm_squared(), g1.dot(g2));
            let (r1, r2) = (-c1.slack(u_des), -c2.slack(u_des));
            let sum_ginv_r = ((r1 * g22 - g12 * r2) + (g11 * r2 - g12 * r1)) / det;
            let sum_ginv_1 = ((g22 - g12) + (g11 - g12)) / det;
            sum_ginv_r / (penalty + sum_ginv_1)
        }
    }
}

/// Solves the soft relaxation by bisection on the slack, followed by an
/// exact solve of the residual on the active set found at the bracket's
/// upper end.
pub fn solve_soft(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    penalty: f64,
    iterations: usize,
    parallel_tol: f64,
) -> SoftSolution {
    if let Some(p) = project_pair(u_des, c1, c2, parallel_tol) {
        return SoftSolution {
            u: p.u,
            slack: 0.0,
            mu1: p.lambda1,
            mu2: p.lambda2,
        };
    }

    let mut lo = 0.0;
    let mut hi = slack_upper_bracket(u_des, c1, c2);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if soft_residual(u_des, c1, c2, penalty, mid, parallel_tol) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let at_hi =
        relaxed_projection(u_des, c1, c2, hi, parallel_tol).expect("relaxed set is non-empty at the upper bracket");
    let candidate = active_set_root(u_des, c1, c2, &at_hi, penalty).max(feasibility_threshold(c1, c2, parallel_tol));
    let slop = 1e-12 * (1.0 + hi);
    let polished = (candidate >= lo - slop && candidate <= hi + slop)
        .then(|| relaxed_projection(u_des, c1, c2, candidate, parallel_tol).map(|p| (candidate, p)))
        .flatten();

    let (slack, p) = polished.unwrap_or((hi, at_hi));
    SoftSolution {
        u: p.u,
        slack,
        mu1: p.lambda1,
        mu2: p.lambda2,
    }
}
