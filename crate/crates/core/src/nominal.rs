//! Greedy frontier goal selection, a grid path planner and a
//! potential-field velocity tracker.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::grid::{FrontierClusterSet, SdfSample};
use crate::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum NominalError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfParams {
    /// Attractive gain, 1/s.
    pub k_att: f64,
    /// Repulsive gain, m^2/s.
    pub k_rep: f64,
    /// Repulsion influence radius, m.
    pub d0: f64,
    /// Output speed cap, m/s.
    pub v_nom_cap: f64,
}

impl Default for ApfParams {
    fn default() -> Self {
        Self {
            k_att: 0.8,
            k_rep: 0.05,
            d0: 1.0,
            v_nom_cap: 0.2,
        }
    }
}

impl ApfParams {
    pub fn validate(&self) -> Result<(), NominalError> {
        for (name, value) in [
            ("k_att", self.k_att),
            ("k_rep", self.k_rep),
            ("d0", self.d0),
            ("v_nom_cap", self.v_nom_cap),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(NominalError::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// True when the repulsion radius does not exceed the standoff, which
    /// leaves the filter to do all the obstacle work.
    pub fn repulsion_inside_standoff(&self, d_safe: f64) -> bool {
        self.d0 <= d_safe
    }
}

pub const DEFAULT_GOAL_REACHED_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal {
    pub position: Vec2,
    pub source_cluster_size: usize,
}

/// Nearest cluster centroid. Ties go to the larger cluster, then to the
/// earlier cluster in scan order.
pub fn select_goal(clusters: &FrontierClusterSet, pos: Vec2) -> Option<Goal> {
    select_goal_filtered(clusters, pos, |_| true)
}

/// As [`select_goal`], considering only clusters for which `allow` holds.
pub fn select_goal_filtered<F>(clusters: &FrontierClusterSet, pos: Vec2, mut allow: F) -> Option<Goal>
where
    F: FnMut(&Goal) -> bool,
{
    let mut best: Option<(f64, Goal)> = None;
    for cluster in clusters.iter() {
        let goal = Goal {
            position: cluster.centroid,
            source_cluster_size: cluster.size(),
        };
        if !allow(&goal) {
            continue;
        }
        let d = (goal.position - pos).norm();
        let better = match &best {
            None => true,
            Some((bd, bg)) => d < *bd || (d == *bd && goal.source_cluster_size > bg.source_cluster_size),
        };
        if better {
            best = Some((d, goal));
        }
    }
    best.map(|(_, g)| g)
}

/// Cost of an axis step; a diagonal step costs [`DIAGONAL_COST`].
pub const STRAIGHT_COST: u32 = 10;
pub const DIAGONAL_COST: u32 = 14;

/// Single-source shortest paths over the passable cells of a grid, with
/// 8-connected moves that never cut a blocked corner.
#[derive(Debug, Clone)]
pub struct PathTree {
    width: usize,
    height: usize,
    cost: Vec<u32>,
    parent: Vec<usize>,
}

const UNREACHED: u32 = u32::MAX;

fn moves() -> [(isize, isize, u32); 8] {
    [
        (1, 0, STRAIGHT_COST),
        (-1, 0, STRAIGHT_COST),
        (0, 1, STRAIGHT_COST),
        (0, -1, STRAIGHT_COST),
        (1, 1, DIAGONAL_COST),
        (1, -1, DIAGONAL_COST),
        (-1, 1, DIAGONAL_COST),
        (-1, -1, DIAGONAL_COST),
    ]
}

impl PathTree {
    /// Dijkstra from `source`, which is expanded even when not passable.
    pub fn build(passable: &[bool], width: usize, height: usize, source: usize) -> Self {
        assert_eq!(passable.len(), width * height);
        let mut cost = vec![UNREACHED; width * height];
        let mut parent = vec![usize::MAX; width * height];
        let mut heap = BinaryHeap::new();
        cost[source] = 0;
        parent[source] = source;
        heap.push(Reverse((0u32, source)));
        let open = |x: isize, y: isize| {
            x >= 0
                && y >= 0
                && (x as usize) < width
                && (y as usize) < height
                && passable[y as usize * width + x as usize]
        };
        while let Some(Reverse((c, i))) = heap.pop() {
            if c > cost[i] {
                continue;
            }
            let (x, y) = ((i % width) as isize, (i / width) as isize);
            for (dx, dy, step) in moves() {
                let (nx, ny) = (x + dx, y + dy);
                if !open(nx, ny) || (dx != 0 && dy != 0 && !(open(x + dx, y) && open(x, y + dy))) {
                    continue;
                }
                let j = ny as usize * width + nx as usize;
                let next = c + step;
                if next < cost[j] {
                    cost[j] = next;
                    parent[j] = i;
                    heap.push(Reverse((next, j)));
                }
            }
        }
        Self {
            width,
            height,
            cost,
            parent,
        }
    }

    pub fn cost(&self, cell: usize) -> Option<u32> {
        (self.cost[cell] != UNREACHED).then_some(self.cost[cell])
    }

    /// Cheapest way to step from a reached cell onto `target`, which need
    /// not be passable itself. Returns the total cost and the last reached
    /// cell before the target.
    pub fn cost_onto(&self, target: usize) -> Option<(u32, usize)> {
        let (x, y) = ((target % self.width) as isize, (target / self.width) as isize);
        let mut best: Option<(u32, usize)> = None;
        for (dx, dy, step) in moves() {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
                continue;
            }
            let j = ny as usize * self.width + nx as usize;
            if let Some(c) = self.cost(j) {
                if best.is_none_or(|(b, _)| c + step < b) {
                    best = Some((c + step, j));
                }
            }
        }
        best
    }

    /// Cells from the source to `cell` inclusive.
    pub fn path_to(&self, cell: usize) -> Option<Vec<usize>> {
        self.cost(cell)?;
        let mut path = vec![cell];
        let mut i = cell;
        while self.parent[i] != i {
            i = self.parent[i];
            path.push(i);
        }
        path.reverse();
        Some(path)
    }
}

/// First point along `path` at least `lookahead` from `pos`, or the last
/// point when none is that far.
pub fn lookahead_point(path: &[Vec2], pos: Vec2, lookahead: f64) -> Option<Vec2> {
    path.iter()
        .copied()
        .find(|p| (p - pos).norm() >= lookahead)
        .or(path.last().copied())
}

pub fn saturate(v: Vec2, cap: f64) -> Vec2 {
    let n = v.norm();
    if n > cap {
        v * (cap / n)
    } else {
        v
    }
}

/// Repulsive term `k_rep (1/phi - 1/d0) / phi^2 * grad`, zero outside the
/// influence radius. Inside an obstacle the direction is kept and the
/// magnitude is the speed cap.
pub fn repulsion(obs: &SdfSample, params: &ApfParams) -> Vec2 {
    let phi = obs.value;
    if phi >= params.d0 || obs.degenerate {
        return Vec2::zeros();
    }
    if phi <= 0.0 {
        return obs.gradient * params.v_nom_cap;
    }
    obs.gradient * (params.k_rep * (1.0 / phi - 1.0 / params.d0) / (phi * phi))
}

pub fn apf_velocity(pos: Vec2, goal: &Goal, obs: &SdfSample, params: &ApfParams) -> Vec2 {
    let attraction = saturate((goal.position - pos) * params.k_att, params.v_nom_cap);
    saturate(attraction + repulsion(obs, params), params.v_nom_cap)
}
