//! Seeded instance generators and oracle sweeps.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{brute_force_frontier_sdf, brute_force_obstacle_sdf, dykstra_project, soft_qp_grid_search, OracleConfig};
use crate::barrier::{check_admissibility, AdmissibilityReport, HalfspaceConstraint, Shaping};
use crate::barrier::{DEFAULT_ADMISSIBILITY_RANGE, DEFAULT_ADMISSIBILITY_SAMPLES};
use crate::filter::{apply_filter, project_dual, solve_soft, verify_kkt, FilterConfig, FrontierInput};
use crate::grid::{
    compute_frontier_sdf, compute_obstacle_sdf, extract_frontier_clusters, CellState, OccupancyGrid, SdfSample,
    DEFAULT_N_MIN,
};
use crate::Vec2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// A non-parallel pair: `|g_i|` in [0.1, 2], angle between normals in
/// [10, 170] degrees, offsets in [-1, 1], `u_des` in [-1, 1]^2.
#[derive(Debug, Clone, Copy)]
pub struct DualInstance {
    pub u_des: Vec2,
    pub c1: HalfspaceConstraint,
    pub c2: HalfspaceConstraint,
}

pub fn random_dual_instance<R: Rng>(rng: &mut R) -> DualInstance {
    let base = rng.random_range(0.0..std::f64::consts::TAU);
    let sep = rng.random_range(10f64.to_radians()..=170f64.to_radians());
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let g1 = unit(base) * rng.random_range(0.1..=2.0);
    let g2 = unit(base + sign * sep) * rng.random_range(0.1..=2.0);
    DualInstance {
        u_des: Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)),
        c1: HalfspaceConstraint::new(g1, rng.random_range(-1.0..=1.0)),
        c2: HalfspaceConstraint::new(g2, rng.random_range(-1.0..=1.0)),
    }
}

/// Anti-parallel normals whose hard intersection is empty by at least 1e-3.
pub fn random_parallel_infeasible_instance<R: Rng>(rng: &mut R) -> (DualInstance, f64) {
    loop {
        let dir = unit(rng.random_range(0.0..std::f64::consts::TAU));
        let n1 = rng.random_range(0.1..=2.0);
        let n2 = rng.random_range(0.1..=2.0);
        let (b1, b2): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        // Empty iff b1/n1 + b2/n2 > 0 (the slab's lower edge passes its upper edge).
        if b1 / n1 + b2 / n2 < 1e-3 {
            continue;
        }
        let inst = DualInstance {
            u_des: Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)),
            c1: HalfspaceConstraint::new(dir * n1, b1),
            c2: HalfspaceConstraint::new(-dir * n2, b2),
        };
        return (inst, rng.random_range(1.0..=100.0));
    }
}

#[derive(Debug, Clone)]
pub struct ClosedFormReport {
    pub instances: usize,
    pub max_component_error: f64,
    pub mismatches: usize,
    pub oracle_failures: usize,
    pub kkt_failures: usize,
    pub closed_form_time: Duration,
    pub median_filter_latency: Duration,
}

impl ClosedFormReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.oracle_failures == 0 && self.kkt_failures == 0
    }
}

/// Closed-form projection against Dykstra, plus the KKT certificate, on
/// `n` seeded instances. Also times `apply_filter` on samples shaped like
/// each instance.
pub fn closed_form_sweep(n: usize, seed: u64, tol: f64, oracle: &OracleConfig) -> ClosedFormReport {
    let mut r = rng(seed);
    let instances: Vec<DualInstance> = (0..n).map(|_| random_dual_instance(&mut r)).collect();

    let start = Instant::now();
    let projections: Vec<_> = instances
        .iter()
        .map(|i| project_dual(&i.u_des, &i.c1, &i.c2, 1e-6))
        .collect();
    let closed_form_time = start.elapsed();

    let mut report = ClosedFormReport {
        instances: n,
        max_component_error: 0.0,
        mismatches: 0,
        oracle_failures: 0,
        kkt_failures: 0,
        closed_form_time,
        median_filter_latency: Duration::ZERO,
    };

    for (inst, proj) in instances.iter().zip(&projections) {
        let Ok(proj) = proj else {
            report.mismatches += 1;
            continue;
        };
        if !verify_kkt(&inst.u_des, &inst.c1, &inst.c2, proj).all_pass() {
            report.kkt_failures += 1;
        }
        match dykstra_project(&inst.u_des, &[inst.c1, inst.c2], oracle) {
            Ok(reference) => {
                let err = (proj.u - reference).abs().max();
                report.max_component_error = report.max_component_error.max(err);
                if err > tol {
                    report.mismatches += 1;
                }
            }
            Err(_) => report.oracle_failures += 1,
        }
    }

    let cfg = FilterConfig::default();
    let mut latencies: Vec<Duration> = instances
        .iter()
        .map(|inst| {
            let obs = SdfSample {
                value: 0.35 + inst.c1.offset * 0.2,
                gradient: inst.c1.normal.normalize(),
                degenerate: false,
            };
            let frontier = FrontierInput {
                sample: SdfSample {
                    value: 0.35 + inst.c2.offset * 0.2,
                    gradient: inst.c2.normal.normalize(),
                    degenerate: false,
                },
                rho: 0.5,
            };
            let t = Instant::now();
            let out = apply_filter(&inst.u_des, &obs, Some(&frontier), &cfg);
            let dt = t.elapsed();
            std::hint::black_box(out).ok();
            dt
        })
        .collect();
    latencies.sort();
    report.median_filter_latency = latencies.get(latencies.len() / 2).copied().unwrap_or_default();
    report
}

#[derive(Debug, Clone)]
pub struct SoftReport {
    pub instances: usize,
    pub max_u_error: f64,
    pub max_slack_error: f64,
    pub mismatches: usize,
    pub feasible_checked: usize,
    pub feasible_nonzero_slack: usize,
    pub symmetric_exact: bool,
}

impl SoftReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.feasible_nonzero_slack == 0 && self.symmetric_exact
    }
}

/// Bisection soft-QP against the grid-search oracle on `n` parallel
/// infeasible instances, zero slack on `n` feasible ones, and the exact
/// symmetric anti-parallel case.
pub fn soft_sweep(n: usize, seed: u64, tol: f64, oracle: &OracleConfig) -> SoftReport {
    let mut r = rng(seed);
    let mut report = SoftReport {
        instances: n,
        max_u_error: 0.0,
        max_slack_error: 0.0,
        mismatches: 0,
        feasible_checked: 0,
        feasible_nonzero_slack: 0,
        symmetric_exact: false,
    };
    for _ in 0..n {
        let (inst, p) = random_parallel_infeasible_instance(&mut r);
        let s = solve_soft(&inst.u_des, &inst.c1, &inst.c2, p, 20, 1e-6);
        let (u_ref, d_ref) = soft_qp_grid_search(&inst.u_des, &inst.c1, &inst.c2, p, oracle);
        let eu = (s.u - u_ref).norm();
        let ed = (s.slack - d_ref).abs();
        report.max_u_error = report.max_u_error.max(eu);
        report.max_slack_error = report.max_slack_error.max(ed);
        if eu > tol || ed > tol {
            report.mismatches += 1;
        }
    }
    for k in 0..n {
        let inst = if k % 2 == 0 {
            random_dual_instance(&mut r)
        } else {
            // Parallel but feasible: same-direction normals.
            let mut i = random_dual_instance(&mut r);
            i.c2.normal = i.c1.normal * r.random_range(0.1..=2.0);
            i
        };
        let s = solve_soft(&inst.u_des, &inst.c1, &inst.c2, 50.0, 20, 1e-6);
        report.feasible_checked += 1;
        if s.slack != 0.0 {
            report.feasible_nonzero_slack += 1;
        }
    }
    let sym = solve_soft(
        &Vec2::zeros(),
        &HalfspaceConstraint::new(Vec2::new(1.0, 0.0), 1.0),
        &HalfspaceConstraint::new(Vec2::new(-1.0, 0.0), 1.0),
        10.0,
        20,
        1e-6,
    );
    report.symmetric_exact = sym.u == Vec2::zeros() && sym.slack == 1.0;
    report
}

/// Random occupancy grid: each cell independently occupied / unknown / free.
pub fn random_grid<R: Rng>(rng: &mut R, width: usize, height: usize, resolution: f64) -> OccupancyGrid {
    let p_occ = rng.random_range(0.02..0.3);
    let p_unk = rng.random_range(0.0..0.5);
    let cells = (0..width * height)
        .map(|_| {
            let x: f64 = rng.random();
            if x < p_occ {
                CellState::Occupied
            } else if x < p_occ + p_unk {
                CellState::Unknown
            } else {
                CellState::Free
            }
        })
        .collect();
    OccupancyGrid::from_cells(
        width,
        height,
        resolution,
        OccupancyGrid::default_origin(resolution),
        cells,
    )
    .expect("valid random grid")
}

/// Free grid with a handful of rectangular obstacles, like a floor plan.
pub fn random_room_grid<R: Rng>(rng: &mut R, width: usize, height: usize, resolution: f64) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(
        width,
        height,
        resolution,
        OccupancyGrid::default_origin(resolution),
        CellState::Free,
    )
    .expect("valid grid");
    let n = rng.random_range(3..=6);
    for _ in 0..n {
        let w = rng.random_range(2..=width / 6);
        let h = rng.random_range(2..=height / 6);
        let x0 = rng.random_range(0..width - w);
        let y0 = rng.random_range(0..height - h);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                grid.set(x, y, CellState::Occupied);
            }
        }
    }
    grid
}

#[derive(Debug, Clone)]
pub struct EdtReport {
    pub grids: usize,
    pub mismatched_grids: usize,
}

impl EdtReport {
    pub fn passed(&self) -> bool {
        self.mismatched_grids == 0
    }
}

/// Bitwise comparison of the EDT-based fields with the all-pairs scan on
/// `n` random grids with sides in `[1, max_side]`.
pub fn edt_sweep(n: usize, seed: u64, max_side: usize) -> EdtReport {
    let mut r = rng(seed);
    let mut mismatched = 0;
    for _ in 0..n {
        let w = r.random_range(1..=max_side);
        let h = r.random_range(1..=max_side);
        let res = [0.05, 0.1, 0.25, 1.0][r.random_range(0..4)];
        let grid = random_grid(&mut r, w, h, res);
        let obstacle_ok = brute_force_obstacle_sdf(&grid)
            .map(|b| b == compute_obstacle_sdf(&grid))
            .unwrap_or(false);
        let clusters = extract_frontier_clusters(&grid, r.random_range(1..=DEFAULT_N_MIN));
        let frontier_ok = brute_force_frontier_sdf(&grid, &clusters)
            .map(|b| b == compute_frontier_sdf(&grid, &clusters))
            .unwrap_or(false);
        if !(obstacle_ok && frontier_ok) {
            mismatched += 1;
        }
    }
    EdtReport {
        grids: n,
        mismatched_grids: mismatched,
    }
}

#[derive(Debug, Clone)]
pub struct EikonalReport {
    pub grids: usize,
    pub cells_checked: usize,
    pub min_grid_fraction: f64,
    pub overall_fraction: f64,
}

impl EikonalReport {
    pub fn passed(&self, threshold: f64) -> bool {
        self.cells_checked > 0 && self.min_grid_fraction >= threshold
    }
}

/// Fraction of free cells at least `2r` from the obstacle boundary whose raw
/// central-difference gradient has norm in [0.9, 1.1].
pub fn eikonal_fraction(grid: &OccupancyGrid) -> (usize, usize) {
    let sdf = compute_obstacle_sdf(grid);
    let r = grid.resolution();
    let (mut total, mut good) = (0, 0);
    for iy in 1..grid.height().saturating_sub(1) {
        for ix in 1..grid.width().saturating_sub(1) {
            if grid.get(ix, iy) != CellState::Free || sdf.at(ix, iy) < 2.0 * r {
                continue;
            }
            total += 1;
            let n = sdf.cell_gradient(ix, iy).norm();
            if (0.9..=1.1).contains(&n) {
                good += 1;
            }
        }
    }
    (good, total)
}

pub fn eikonal_sweep(n: usize, seed: u64, side: usize) -> EikonalReport {
    let mut r = rng(seed);
    let mut min_fraction: f64 = 1.0;
    let (mut good, mut total) = (0, 0);
    for _ in 0..n {
        let grid = random_room_grid(&mut r, side, side, 0.1);
        let (g, t) = eikonal_fraction(&grid);
        if t > 0 {
            min_fraction = min_fraction.min(g as f64 / t as f64);
        }
        good += g;
        total += t;
    }
    EikonalReport {
        grids: n,
        cells_checked: total,
        min_grid_fraction: min_fraction,
        overall_fraction: if total > 0 { good as f64 / total as f64 } else { 0.0 },
    }
}

pub fn admissibility_reports() -> Vec<AdmissibilityReport> {
    Shaping::ALL
        .iter()
        .map(|f| check_admissibility(f, DEFAULT_ADMISSIBILITY_RANGE, DEFAULT_ADMISSIBILITY_SAMPLES))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_pairs_respect_angle_band() {
        let mut r = rng(3);
        for _ in 0..500 {
            let i = random_dual_instance(&mut r);
            let cos = i.c1.normal.dot(&i.c2.normal) / (i.c1.normal.norm() * i.c2.normal.norm());
            assert!(cos <= 10f64.to_radians().cos() + 1e-12);
            assert!(cos >= 170f64.to_radians().cos() - 1e-12);
        }
    }

    #[test]
    fn generated_parallel_instances_are_infeasible() {
        let mut r = rng(4);
        for _ in 0..200 {
            let (i, _) = random_parallel_infeasible_instance(&mut r);
            assert!(crate::filter::project_parallel(&i.u_des, &i.c1, &i.c2).is_none());
        }
    }

    #[test]
    fn small_sweeps_pass() {
        let cfg = OracleConfig::default();
        assert!(closed_form_sweep(200, 1, 1e-6, &cfg).passed());
        assert!(soft_sweep(20, 2, 1e-3, &cfg).passed());
        assert!(edt_sweep(10, 3, 24).passed());
    }
}
