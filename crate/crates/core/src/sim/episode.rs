use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::{compute_metrics, EpisodeMetrics, MetricsContext};
use super::sensor::sense_and_update;
use super::trace::{write_trace_csv, TickRecord, TraceCase};
use super::world::{Scenario, World};
use super::SimError;
use crate::barrier::barrier_value;
use crate::config::RunConfig;
use crate::filter::{apply_filter, speed_ceiling, FilterConfig, FrontierInput};
use crate::grid::{
    compute_frontier_sdf, compute_obstacle_sdf, extract_frontier_clusters, uncertainty_density, CellState,
    FrontierCluster, FrontierClusterSet, OccupancyGrid, SignedDistanceField,
};
use crate::nominal::{apf_velocity, lookahead_point, select_goal, ApfParams, Goal, PathTree};
use crate::Vec2;

/// Waypoints within this distance of a retired waypoint are skipped.
const RETIRED_GOAL_RADIUS: f64 = 0.5;
/// A waypoint is retired when reached, or when the robot moves less than
/// `STALL_DISTANCE` over `STALL_TICKS` ticks while pursuing it.
const STALL_TICKS: usize = 50;
const STALL_DISTANCE: f64 = 0.1;
/// Distance along the planned path to the tracked point, m.
const LOOKAHEAD: f64 = 0.6;
const NEIGHBORS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Explicit Euler step of the single integrator.
pub fn step(position: Vec2, u: Vec2, dt: f64) -> Vec2 {
    position + u * dt
}

/// Steps one episode tick by tick.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: RunConfig,
    filter: FilterConfig,
    apf: ApfParams,
    world: World,
    belief: OccupancyGrid,
    position: Vec2,
    heading: f64,
    tick: usize,
    goal: Option<Goal>,
    waypoint: Option<Vec2>,
    target: Option<Vec2>,
    retired: Vec<Vec2>,
    recent: VecDeque<Vec2>,
    obstacle_sdf: Option<SignedDistanceField>,
    frontier_sdf: Option<SignedDistanceField>,
    finished: bool,
}

impl Simulator {
    pub fn new(config: &RunConfig, scenario: &Scenario) -> Result<Self, SimError> {
        config.validate()?;
        let world = World::new(scenario.grid.clone(), config.robot_radius)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let j = config.start_jitter;
        let jitter = if j > 0.0 {
            Vec2::new(rng.random_range(-j..=j), rng.random_range(-j..=j))
        } else {
            Vec2::zeros()
        };
        let position = scenario.start + jitter;
        if world.in_contact(position) {
            return Err(SimError::StartInContact {
                x: position.x,
                y: position.y,
            });
        }
        Ok(Self {
            config: config.clone(),
            filter: config.filter_config(),
            apf: config.apf_params(),
            belief: scenario.grid.blank_like(CellState::Unknown),
            world,
            position,
            heading: 0.0,
            tick: 0,
            goal: None,
            waypoint: None,
            target: None,
            retired: Vec::new(),
            recent: VecDeque::with_capacity(STALL_TICKS + 1),
            obstacle_sdf: None,
            frontier_sdf: None,
            finished: false,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn position(&self) -> Vec2 {
        self.position
    }

    pub fn belief(&self) -> &OccupancyGrid {
        &self.belief
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// Cluster chosen by [`select_goal`] on the last tick.
    pub fn goal(&self) -> Option<Goal> {
        self.goal
    }

    /// Frontier cell the planner aimed for on the last tick: the selected
    /// cluster's cheapest reachable unknown cell bordering known free space.
    pub fn waypoint(&self) -> Option<Vec2> {
        self.waypoint
    }

    /// Lookahead point on the planned path that the potential field tracked.
    pub fn target(&self) -> Option<Vec2> {
        self.target
    }

    /// Obstacle SDF of the belief as used on the most recent tick.
    pub fn obstacle_sdf(&self) -> Option<&SignedDistanceField> {
        self.obstacle_sdf.as_ref()
    }

    /// Frontier SDF of the most recent tick, if any cluster was significant.
    pub fn frontier_sdf(&self) -> Option<&SignedDistanceField> {
        self.frontier_sdf.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn is_retired(&self, p: Vec2) -> bool {
        self.retired.iter().any(|g| (g - p).norm() < RETIRED_GOAL_RADIUS)
    }

    /// Cells of `cluster` that touch a known-free cell and are not retired.
    fn open_frontier_cells<'a>(&'a self, cluster: &'a FrontierCluster) -> impl Iterator<Item = usize> + 'a {
        let w = self.belief.width();
        cluster.cells.iter().copied().filter(move |&i| {
            let (ix, iy) = ((i % w) as isize, (i / w) as isize);
            let touches_free = NEIGHBORS.iter().any(|(dx, dy)| {
                let (nx, ny) = (ix + dx, iy + dy);
                self.belief.in_bounds(nx, ny) && self.belief.get(nx as usize, ny as usize) == CellState::Free
            });
            touches_free && !self.is_retired(self.belief.cell_center(ix as usize, iy as usize))
        })
    }

    fn cell_point(&self, i: usize) -> Vec2 {
        let w = self.belief.width();
        self.belief.cell_center(i % w, i / w)
    }

    /// Retires the current waypoint when reached or stalled, then picks a
    /// cluster with [`select_goal`] among those with a reachable open
    /// frontier cell and plans a path to its cheapest such cell.
    fn update_goal(&mut self, clusters: &FrontierClusterSet, obstacle_sdf: &SignedDistanceField) {
        if let Some(wp) = self.waypoint {
            let reached = (wp - self.position).norm() < self.config.goal_reached_radius;
            let stalled = self.recent.len() > STALL_TICKS && (self.recent[0] - self.position).norm() < STALL_DISTANCE;
            if reached || stalled {
                self.retired.push(wp);
                self.recent.clear();
            }
        }

        let (w, h) = (self.belief.width(), self.belief.height());
        let clearance = self.config.robot_radius + 0.5 * self.belief.resolution();
        let passable: Vec<bool> = self
            .belief
            .cells()
            .iter()
            .zip(obstacle_sdf.values())
            .map(|(&c, &phi)| c == CellState::Free && phi >= clearance)
            .collect();
        let source = match self.belief.world_to_cell(self.position) {
            (x, y) if self.belief.in_bounds(x, y) => self.belief.index(x as usize, y as usize),
            _ => {
                self.goal = None;
                self.waypoint = None;
                self.target = None;
                return;
            }
        };
        let tree = PathTree::build(&passable, w, h, source);

        // Cheapest reachable open cell per cluster.
        let mut best_cells = Vec::new();
        let mut candidates = FrontierClusterSet::default();
        for cluster in clusters.iter() {
            let best = self
                .open_frontier_cells(cluster)
                .filter_map(|i| tree.cost_onto(i).map(|(c, via)| (c, i, via)))
                .min_by_key(|&(c, i, _)| (c, i));
            if let Some(b) = best {
                best_cells.push(b);
                candidates.clusters.push(cluster.clone());
            }
        }

        self.goal = select_goal(&candidates, self.position);
        let chosen = self
            .goal
            .and_then(|g| candidates.iter().position(|c| c.centroid == g.position))
            .map(|k| best_cells[k]);
        match chosen {
            Some((_, cell, via)) => {
                let mut path: Vec<Vec2> = tree
                    .path_to(via)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|i| self.cell_point(i))
                    .collect();
                let wp = self.cell_point(cell);
                path.push(wp);
                self.waypoint = Some(wp);
                self.target = lookahead_point(&path, self.position, LOOKAHEAD);
            }
            None => {
                self.waypoint = None;
                self.target = None;
            }
        }
    }

    /// Runs one tick. Returns `None` once the episode is over.
    pub fn tick(&mut self) -> Result<Option<TickRecord>, SimError> {
        if self.finished || self.tick >= self.config.ticks {
            self.finished = true;
            return Ok(None);
        }
        let cfg = &self.config;
        let pos = self.position;

        sense_and_update(self.world.truth(), &mut self.belief, pos, self.heading, &cfg.sensor());
        let obstacle_sdf = compute_obstacle_sdf(&self.belief);
        let clusters = extract_frontier_clusters(&self.belief, cfg.n_min);
        let frontier_sdf = compute_frontier_sdf(&self.belief, &clusters);
        let rho = uncertainty_density(&self.belief, pos, cfg.sensor_range);

        self.recent.push_back(pos);
        if self.recent.len() > STALL_TICKS + 1 {
            self.recent.pop_front();
        }
        self.update_goal(&clusters, &obstacle_sdf);

        let cfg = &self.config;
        let obs = obstacle_sdf.sample(pos);
        let frontier = frontier_sdf.as_ref().map(|f| FrontierInput {
            sample: f.sample(pos),
            rho,
        });
        let u_des = match (&self.goal, self.target) {
            (Some(g), Some(t)) => {
                let tracked = Goal { position: t, ..*g };
                apf_velocity(pos, &tracked, &obs, &self.apf)
            }
            _ => Vec2::zeros(),
        };

        let h2_bypass = frontier
            .as_ref()
            .map(|f| barrier_value(&self.filter.frontier, f.sample.value));
        let mut rec = TickRecord {
            tick: self.tick,
            t: self.tick as f64 * cfg.dt,
            position: pos,
            u_des,
            u_safe: Vec2::zeros(),
            h1: barrier_value(&self.filter.obstacle, obs.value),
            h2: h2_bypass,
            sdf_obs: obs.value,
            sdf_unk: frontier.as_ref().map(|f| f.sample.value),
            rho: frontier.as_ref().map(|f| f.rho),
            gamma2: None,
            case: TraceCase::Bypass,
            lambda1: 0.0,
            lambda2: 0.0,
            slack: 0.0,
            speed_clipped: false,
            intervention: false,
            next_position: pos,
            known_cells: self.belief.known_count(),
            contact: false,
        };

        if cfg.filter_enabled {
            let out = apply_filter(&u_des, &obs, frontier.as_ref(), &self.filter)?;
            rec.u_safe = out.u_safe;
            rec.h1 = out.h1;
            rec.h2 = out.h2;
            rec.gamma2 = out.gamma2;
            rec.case = TraceCase::Filter(out.case);
            rec.lambda1 = out.lambda1;
            rec.lambda2 = out.lambda2;
            rec.slack = out.slack;
            rec.speed_clipped = out.speed_clipped;
            rec.intervention = out.is_intervention(cfg.intervention_tol);
        } else {
            rec.u_safe = speed_ceiling(&u_des, cfg.v_max);
            rec.speed_clipped = u_des.norm() > cfg.v_max;
        }

        let next = step(pos, rec.u_safe, cfg.dt);
        if rec.u_safe.norm() > 1e-9 {
            self.heading = rec.u_safe.y.atan2(rec.u_safe.x);
        }
        rec.next_position = next;
        rec.contact = self.world.in_contact(next);
        self.position = next;
        self.obstacle_sdf = Some(obstacle_sdf);
        self.frontier_sdf = frontier_sdf;
        self.tick += 1;
        if rec.contact || self.tick >= self.config.ticks {
            self.finished = true;
        }
        Ok(Some(rec))
    }

    pub fn metrics_context(&self) -> MetricsContext {
        MetricsContext {
            resolution: self.belief.resolution(),
            dt: self.config.dt,
            d_safe: self.config.d_safe,
            d_stop: self.config.d_stop,
        }
    }
}

/// A finished episode.
#[derive(Debug, Clone)]
pub struct Episode {
    pub scenario: String,
    pub config: RunConfig,
    pub trace: Vec<TickRecord>,
    pub metrics: EpisodeMetrics,
}

pub fn run_episode(config: &RunConfig, scenario: &Scenario) -> Result<Episode, SimError> {
    let mut sim = Simulator::new(config, scenario)?;
    let mut trace = Vec::with_capacity(config.ticks);
    while let Some(rec) = sim.tick()? {
        trace.push(rec);
    }
    let metrics = compute_metrics(&trace, &sim.metrics_context());
    Ok(Episode {
        scenario: scenario.name.clone(),
        config: config.clone(),
        trace,
        metrics,
    })
}

pub fn mode_name(filter_enabled: bool) -> &'static str {
    if filter_enabled {
        "filtered"
    } else {
        "baseline"
    }
}

impl Episode {
    /// `<out_dir>/<scenario>_<seed>_<mode>`.
    pub fn output_dir(&self) -> PathBuf {
        self.config.out_dir.join(format!(
            "{}_{}_{}",
            self.scenario,
            self.config.seed,
            mode_name(self.config.filter_enabled)
        ))
    }

    /// Config echo followed by the metrics block.
    pub fn summary(&self) -> String {
        format!("# run summary\n{}{}", self.config, self.metrics.to_kv())
    }

    pub fn trace_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_trace_csv(&self.trace, &mut buf).expect("in-memory CSV write");
        buf
    }

    /// Writes `trace.csv` and `summary.txt` under [`Episode::output_dir`].
    pub fn write_outputs(&self) -> Result<PathBuf, SimError> {
        let dir = self.output_dir();
        let io = |path: &Path, e: std::io::Error| SimError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        let trace_path = dir.join("trace.csv");
        std::fs::File::create(&trace_path)
            .and_then(|mut f| f.write_all(&self.trace_csv()))
            .map_err(|e| io(&trace_path, e))?;
        let summary_path = dir.join("summary.txt");
        std::fs::write(&summary_path, self.summary()).map_err(|e| io(&summary_path, e))?;
        Ok(dir)
    }
}
