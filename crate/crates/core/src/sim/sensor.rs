use crate::grid::{CellState, OccupancyGrid};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    /// Meters.
    pub range: f64,
    pub rays: usize,
    /// Degrees, centered on the heading.
    pub fov_deg: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            range: 3.0,
            rays: 180,
            fov_deg: 360.0,
        }
    }
}

impl SensorModel {
    /// Ray angles in radians. A full circle spaces rays `2 pi / n` apart;
    /// a partial field of view includes both edges.
    pub fn ray_angles(&self, heading: f64) -> Vec<f64> {
        let n = self.rays;
        if self.fov_deg >= 360.0 {
            (0..n)
                .map(|k| heading + std::f64::consts::TAU * k as f64 / n as f64)
                .collect()
        } else {
            let fov = self.fov_deg.to_radians();
            (0..n)
                .map(|k| heading - 0.5 * fov + fov * k as f64 / (n - 1) as f64)
                .collect()
        }
    }
}

/// Copies one ground-truth cell into the belief. Returns true when the cell
/// blocks the ray.
fn reveal(truth: &OccupancyGrid, belief: &mut OccupancyGrid, ix: usize, iy: usize) -> bool {
    let state = truth.get(ix, iy);
    if state == CellState::Unknown {
        return false;
    }
    belief.set(ix, iy, state);
    state == CellState::Occupied
}

/// Walks one ray cell by cell (Amanatides-Woo), revealing every cell entered
/// within `range` and stopping at the first occupied one.
pub fn cast_ray(truth: &OccupancyGrid, belief: &mut OccupancyGrid, pos: Vec2, angle: f64, range: f64) {
    let r = truth.resolution();
    let rel = (pos - truth.origin()) / r + Vec2::new(0.5, 0.5);
    let (mut ix, mut iy) = (rel.x.floor() as isize, rel.y.floor() as isize);
    if !truth.in_bounds(ix, iy) || reveal(truth, belief, ix as usize, iy as usize) {
        return;
    }
    let (dx, dy) = (angle.cos(), angle.sin());
    let limit = range / r;
    let axis = |p: f64, i: isize, d: f64| -> (isize, f64, f64) {
        if d > 0.0 {
            (1, ((i + 1) as f64 - p) / d, 1.0 / d)
        } else if d < 0.0 {
            (-1, (p - i as f64) / -d, -1.0 / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (sx, mut tx, ddx) = axis(rel.x, ix, dx);
    let (sy, mut ty, ddy) = axis(rel.y, iy, dy);
    loop {
        let t = if tx < ty {
            ix += sx;
            let t = tx;
            tx += ddx;
            t
        } else {
            iy += sy;
            let t = ty;
            ty += ddy;
            t
        };
        if t > limit || !truth.in_bounds(ix, iy) {
            return;
        }
        if reveal(truth, belief, ix as usize, iy as usize) {
            return;
        }
    }
}

/// One scan from `pos`. Known belief cells only ever take their true state,
/// so nothing known reverts to unknown.
pub fn sense_and_update(
    truth: &OccupancyGrid,
    belief: &mut OccupancyGrid,
    pos: Vec2,
    heading: f64,
    model: &SensorModel,
) {
    for angle in model.ray_angles(heading) {
        cast_ray(truth, belief, pos, angle, model.range);
    }
}
