use std::path::Path;

use crate::grid::{CellState, OccupancyGrid};
use crate::Vec2;

use super::SimError;

pub const DEFAULT_ROBOT_RADIUS: f64 = 0.22;

/// Ground truth: a grid with only free and occupied cells.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    truth: OccupancyGrid,
    robot_radius: f64,
}

impl World {
    pub fn new(truth: OccupancyGrid, robot_radius: f64) -> Result<Self, SimError> {
        if truth.count(CellState::Unknown) > 0 {
            return Err(SimError::UnknownInWorld);
        }
        if !(robot_radius.is_finite() && robot_radius > 0.0) {
            return Err(SimError::RobotRadius(robot_radius));
        }
        Ok(Self { truth, robot_radius })
    }

    pub fn truth(&self) -> &OccupancyGrid {
        &self.truth
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    /// True when a disc of the robot radius at `p` overlaps an occupied cell
    /// square or leaves the mapped area.
    pub fn in_contact(&self, p: Vec2) -> bool {
        let (lo, hi) = self.truth.bounds();
        let rad = self.robot_radius;
        if p.x - rad < lo.x || p.y - rad < lo.y || p.x + rad > hi.x || p.y + rad > hi.y {
            return true;
        }
        let r = self.truth.resolution();
        let half = 0.5 * r;
        let (cx, cy) = self.truth.world_to_cell(p);
        let reach = (rad / r).ceil() as isize + 1;
        for iy in (cy - reach)..=(cy + reach) {
            for ix in (cx - reach)..=(cx + reach) {
                if !self.truth.in_bounds(ix, iy) {
                    continue;
                }
                let (ux, uy) = (ix as usize, iy as usize);
                if self.truth.get(ux, uy) != CellState::Occupied {
                    continue;
                }
                let c = self.truth.cell_center(ux, uy);
                let nearest = Vec2::new(p.x.clamp(c.x - half, c.x + half), p.y.clamp(c.y - half, c.y + half));
                if (nearest - p).norm() < rad {
                    return true;
                }
            }
        }
        false
    }
}

/// A ground-truth map plus the nominal start position.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: OccupancyGrid,
    pub start: Vec2,
}

pub const BUNDLED_SCENARIOS: [&str; 3] = ["corridor", "rooms", "open_hall"];

fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "corridor" => Some(include_str!("../../scenarios/corridor.txt")),
        "rooms" => Some(include_str!("../../scenarios/rooms.txt")),
        "open_hall" => Some(include_str!("../../scenarios/open_hall.txt")),
        _ => None,
    }
}

impl Scenario {
    /// Grid text followed by one `start_x start_y` line.
    pub fn parse(name: &str, text: &str) -> Result<Self, SimError> {
        let mut lines = text.lines();
        let grid = OccupancyGrid::read_from_lines(&mut lines)?;
        let start_line = lines
            .by_ref()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .ok_or(SimError::MissingStart)?;
        let coords: Vec<f64> = start_line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| SimError::BadStart(start_line.to_string()))?;
        let [x, y] = coords[..] else {
            return Err(SimError::BadStart(start_line.to_string()));
        };
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(SimError::TrailingContent(extra.to_string()));
        }
        if grid.count(CellState::Unknown) > 0 {
            return Err(SimError::UnknownInWorld);
        }
        Ok(Self {
            name: name.to_string(),
            grid,
            start: Vec2::new(x, y),
        })
    }

    pub fn bundled(name: &str) -> Option<Self> {
        bundled_text(name).map(|t| Self::parse(name, t).expect("bundled scenario parses"))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string());
        Self::parse(&name, &text)
    }

    /// A bundled scenario name, or else a file path.
    pub fn resolve(spec: &str) -> Result<Self, SimError> {
        match Self::bundled(spec) {
            Some(s) => Ok(s),
            None => Self::load(Path::new(spec)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_have_clear_starts() {
        for name in BUNDLED_SCENARIOS {
            let s = Scenario::bundled(name).unwrap();
            let world = World::new(s.grid.clone(), DEFAULT_ROBOT_RADIUS).unwrap();
            let sdf = crate::grid::compute_obstacle_sdf(&s.grid);
            assert!(!world.in_contact(s.start), "{name}");
            assert!(sdf.value_at(s.start) > 0.5, "{name}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Scenario::parse("x", "2 1 1.0\n..\n"),
            Err(SimError::MissingStart)
        ));
        assert!(matches!(
            Scenario::parse("x", "2 1 1.0\n..\n1\n"),
            Err(SimError::BadStart(_))
        ));
        assert!(matches!(
            Scenario::parse("x", "2 1 1.0\n?.\n1 1\n"),
            Err(SimError::UnknownInWorld)
        ));
        assert!(matches!(
            Scenario::parse("x", "2 1 1.0\n..\n1 1\nz\n"),
            Err(SimError::TrailingContent(_))
        ));
        let s = Scenario::parse("x", "2 1 1.0\n..\n\n0.5 0.25\n\n").unwrap();
        assert_eq!(s.start, Vec2::new(0.5, 0.25));
    }

    #[test]
    fn contact_against_cell_square() {
        let grid: OccupancyGrid = "5 5 1.0\n.....\n.....\n..#..\n.....\n.....\n".parse().unwrap();
        let world = World::new(grid, 0.22).unwrap();
        // Occupied square spans [2, 3]^2.
        assert!(!world.in_contact(Vec2::new(1.7, 2.5)));
        assert!(world.in_contact(Vec2::new(1.8, 2.5)));
        // Corner distance sqrt(2) * 0.16 ~ 0.226 > 0.22.
        assert!(!world.in_contact(Vec2::new(1.84, 1.84)));
        assert!(world.in_contact(Vec2::new(1.86, 1.86)));
        // Map edge.
        assert!(world.in_contact(Vec2::new(0.1, 2.5)));
    }
}
