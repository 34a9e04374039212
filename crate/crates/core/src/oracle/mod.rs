//! Slow, independent reference solvers for checking the closed forms.
//!
//! Nothing here shares code with the filter's projection path: Dykstra's
//! method iterates plain single-halfspace projections, the soft-QP search
//! picks the closest feasible candidate point for each slack on a grid, and
//! the distance fields come from an all-pairs scan.

pub mod sweep;

use thiserror::Error;

use crate::barrier::HalfspaceConstraint;
use crate::grid::{
    distance_cap, extract_frontier_clusters, CellState, FrontierClusterSet, OccupancyGrid, SdfKind, SignedDistanceField,
};
use crate::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("Dykstra did not converge: residual violation {violation:e} after {iterations} sweeps")]
    NotConverged { violation: f64, iterations: usize },
    #[error("grid of {0} cells is too large for the brute-force scan")]
    GridTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub dykstra_iters: usize,
    /// Slack grid spacing. The search runs from zero up to the largest
    /// constraint violation of `u_des`, past which the slack only adds cost.
    pub grid_search_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dykstra_iters: 10_000,
            grid_search_step: 1e-4,
        }
    }
}

const DYKSTRA_FEASIBILITY: f64 = 1e-8;
const MAX_BRUTE_CELLS: usize = 64 * 64;

fn halfspace_step(x: &Vec2, c: &HalfspaceConstraint) -> Vec2 {
    let v = c.offset - c.normal.dot(x);
    if v > 0.0 {
        x + c.normal * (v / c.normal.norm_squared())
    } else {
        *x
    }
}

/// Dykstra's alternating projection onto an intersection of halfspaces.
pub fn dykstra_project(
    u_des: &Vec2,
    constraints: &[HalfspaceConstraint],
    cfg: &OracleConfig,
) -> Result<Vec2, OracleError> {
    let mut x = *u_des;
    let mut corrections = vec![Vec2::zeros(); constraints.len()];
    let mut sweeps = 0;
    for _ in 0..cfg.dykstra_iters {
        sweeps += 1;
        let mut moved = 0.0f64;
        for (c, p) in constraints.iter().zip(corrections.iter_mut()) {
            let y = halfspace_step(&(x + *p), c);
            let next_p = x + *p - y;
            moved = moved.max((y - x).norm()).max((next_p - *p).norm());
            *p = next_p;
            x = y;
        }
        if moved == 0.0 {
            break;
        }
    }
    let violation = constraints
        .iter()
        .map(|c| (c.offset - c.normal.dot(&x)).max(0.0))
        .fold(0.0, f64::max);
    if violation > DYKSTRA_FEASIBILITY {
        return Err(OracleError::NotConverged {
            violation,
            iterations: sweeps,
        });
    }
    Ok(x)
}

/// Closest point to `u_des` among {u_des, each line foot, the vertex} that
/// satisfies both constraints. The projection onto a polyhedron in the plane
/// is always one of these.
fn closest_feasible_candidate(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    slop: f64,
) -> Option<Vec2> {
    let feasible = |u: &Vec2| c1.slack(u) >= -slop && c2.slack(u) >= -slop;
    let foot =
        |c: &HalfspaceConstraint| u_des + c.normal * ((c.offset - c.normal.dot(u_des)) / c.normal.norm_squared());
    let mut candidates = vec![*u_des, foot(c1), foot(c2)];
    let (g1, g2) = (c1.normal, c2.normal);
    let cross = g1.x * g2.y - g1.y * g2.x;
    if cross.abs() > 1e-12 * g1.norm() * g2.norm() {
        // Cramer's rule on g1.u = b1, g2.u = b2.
        let x = (c1.offset * g2.y - c2.offset * g1.y) / cross;
        let y = (g1.x * c2.offset - g2.x * c1.offset) / cross;
        candidates.push(Vec2::new(x, y));
    }
    candidates
        .into_iter()
        .filter(feasible)
        .min_by(|a, b| (a - u_des).norm_squared().total_cmp(&(b - u_des).norm_squared()))
}

/// Soft-QP optimum by exhaustive search over the slack on a uniform grid.
/// For each slack the inner minimization over `u` is the hard projection,
/// found by candidate enumeration.
pub fn soft_qp_grid_search(
    u_des: &Vec2,
    c1: &HalfspaceConstraint,
    c2: &HalfspaceConstraint,
    penalty: f64,
    cfg: &OracleConfig,
) -> (Vec2, f64) {
    let infeasibility = (-c1.slack(u_des)).max(-c2.slack(u_des)).max(0.0);
    let upper = infeasibility + cfg.grid_search_step;
    let steps = (upper / cfg.grid_search_step).ceil() as usize;
    let mut best: Option<(f64, Vec2, f64)> = None;
    for k in 0..=steps {
        let delta = k as f64 * cfg.grid_search_step;
        let slop = 1e-12 * (1.0 + delta);
        if let Some(u) = closest_feasible_candidate(u_des, &c1.relaxed(delta), &c2.relaxed(delta), slop) {
            let cost = 0.5 * (u - u_des).norm_squared() + 0.5 * penalty * delta * delta;
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, u, delta));
            }
        }
    }
    let (_, u, delta) = best.expect("u_des is feasible at the top of the slack range");
    (u, delta)
}

fn brute_signed(grid: &OccupancyGrid, kind: SdfKind, inside: &[bool]) -> SignedDistanceField {
    let (w, h, r) = (grid.width(), grid.height(), grid.resolution());
    let cap = distance_cap(w, h, r);
    let coords = |i: usize| ((i % w) as i64, (i / w) as i64);
    let values = (0..w * h)
        .map(|i| {
            let (x, y) = coords(i);
            let nearest = (0..w * h)
                .filter(|&j| inside[j] != inside[i])
                .map(|j| {
                    let (xj, yj) = coords(j);
                    ((xj - x).pow(2) + (yj - y).pow(2)) as f64
                })
                .map(|d2| r * d2.sqrt())
                .fold(f64::INFINITY, f64::min);
            let magnitude = if nearest.is_finite() { nearest } else { cap };
            if inside[i] {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect();
    SignedDistanceField::from_values(w, h, r, grid.origin(), kind, values)
}

/// All-pairs obstacle SDF.
pub fn brute_force_obstacle_sdf(grid: &OccupancyGrid) -> Result<SignedDistanceField, OracleError> {
    check_size(grid)?;
    let inside: Vec<bool> = grid.cells().iter().map(|&c| c == CellState::Occupied).collect();
    Ok(brute_signed(grid, SdfKind::Obstacle, &inside))
}

/// All-pairs frontier SDF for the given clusters; `None` without clusters.
pub fn brute_force_frontier_sdf(
    grid: &OccupancyGrid,
    clusters: &FrontierClusterSet,
) -> Result<Option<SignedDistanceField>, OracleError> {
    check_size(grid)?;
    if clusters.is_empty() {
        return Ok(None);
    }
    let inside = clusters.mask(grid.width(), grid.height());
    Ok(Some(brute_signed(grid, SdfKind::Frontier, &inside)))
}

/// All-pairs SDF of either kind; frontier clusters use `n_min`.
pub fn brute_force_sdf(
    grid: &OccupancyGrid,
    kind: SdfKind,
    n_min: usize,
) -> Result<Option<SignedDistanceField>, OracleError> {
    match kind {
        SdfKind::Obstacle => brute_force_obstacle_sdf(grid).map(Some),
        SdfKind::Frontier => brute_force_frontier_sdf(grid, &extract_frontier_clusters(grid, n_min)),
    }
}

fn check_size(grid: &OccupancyGrid) -> Result<(), OracleError> {
    let n = grid.width() * grid.height();
    if n > MAX_BRUTE_CELLS {
        return Err(OracleError::GridTooLarge(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{project_single, solve_soft};
    use crate::grid::compute_obstacle_sdf;

    fn hs(gx: f64, gy: f64, b: f64) -> HalfspaceConstraint {
        HalfspaceConstraint::new(Vec2::new(gx, gy), b)
    }

    #[test]
    fn dykstra_single_halfspace_is_projection() {
        let c = hs(0.6, 0.8, 0.3);
        let u = Vec2::new(0.2, -0.4);
        let d = dykstra_project(&u, &[c], &OracleConfig::default()).unwrap();
        assert!((d - project_single(&u, &c)).norm() < 1e-10);
        assert!((d - Vec2::new(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn dykstra_orthogonal_pair() {
        let d = dykstra_project(
            &Vec2::zeros(),
            &[hs(1.0, 0.0, 1.0), hs(0.0, 1.0, 1.0)],
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((d - Vec2::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn dykstra_reports_empty_intersection() {
        let cfg = OracleConfig {
            dykstra_iters: 100,
            ..OracleConfig::default()
        };
        let r = dykstra_project(&Vec2::zeros(), &[hs(1.0, 0.0, 1.0), hs(-1.0, 0.0, 1.0)], &cfg);
        assert!(matches!(r, Err(OracleError::NotConverged { .. })));
    }

    #[test]
    fn grid_search_symmetric_case() {
        let (u, d) = soft_qp_grid_search(
            &Vec2::zeros(),
            &hs(1.0, 0.0, 1.0),
            &hs(-1.0, 0.0, 1.0),
            10.0,
            &OracleConfig::default(),
        );
        assert!((d - 1.0).abs() < 1e-9);
        assert!(u.norm() < 1e-9);
    }

    #[test]
    fn grid_search_trades_slack_when_hard_set_is_nonempty() {
        // cost (1 - d)^2 + 5 d^2 is minimized at d = 1/6.
        let (u, d) = soft_qp_grid_search(
            &Vec2::zeros(),
            &hs(1.0, 0.0, 1.0),
            &hs(0.0, 1.0, 1.0),
            10.0,
            &OracleConfig::default(),
        );
        assert!((d - 1.0 / 6.0).abs() < 1e-4);
        assert!((u - Vec2::new(5.0 / 6.0, 5.0 / 6.0)).norm() < 2e-4);
    }

    #[test]
    fn grid_search_leaves_satisfied_input_alone() {
        let u0 = Vec2::new(2.0, 2.0);
        let (u, d) = soft_qp_grid_search(
            &u0,
            &hs(1.0, 0.0, 1.0),
            &hs(0.0, 1.0, 1.0),
            10.0,
            &OracleConfig::default(),
        );
        assert_eq!(d, 0.0);
        assert_eq!(u, u0);
    }

    #[test]
    fn grid_search_matches_bisection_on_asymmetric_case() {
        let (c1, c2) = (hs(1.0, 0.0, 0.8), hs(-1.0, 0.0, 0.4));
        let u = Vec2::new(0.1, 0.0);
        let (ug, dg) = soft_qp_grid_search(&u, &c1, &c2, 5.0, &OracleConfig::default());
        let s = solve_soft(&u, &c1, &c2, 5.0, 20, 1e-6);
        assert!((ug - s.u).norm() < 1e-3);
        assert!((dg - s.slack).abs() < 1e-3);
    }

    #[test]
    fn brute_force_matches_single_obstacle() {
        let grid: OccupancyGrid = "3 3 1.0\n...\n.#.\n...\n".parse().unwrap();
        assert_eq!(brute_force_obstacle_sdf(&grid).unwrap(), compute_obstacle_sdf(&grid));
        let free = grid.blank_like(CellState::Free);
        let cap = distance_cap(3, 3, 1.0);
        assert!(brute_force_obstacle_sdf(&free)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == cap));
    }

    #[test]
    fn brute_force_rejects_large_grids() {
        let grid = OccupancyGrid::new(65, 64, 1.0, Vec2::zeros(), CellState::Free).unwrap();
        assert!(matches!(
            brute_force_obstacle_sdf(&grid),
            Err(OracleError::GridTooLarge(_))
        ));
    }
}
