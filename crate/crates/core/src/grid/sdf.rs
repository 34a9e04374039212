use super::{squared_edt, CellState, FrontierClusterSet, OccupancyGrid};
use crate::Vec2;

/// Raw gradient norms at or below this are treated as a flat plateau.
pub const GRADIENT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdfKind {
    /// Distance to mapped obstacles; negative inside occupied cells.
    Obstacle,
    /// Distance to significant unknown clusters; negative inside them.
    Frontier,
}

/// Signed distance (meters) sampled at every cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    kind: SdfKind,
    values: Vec<f64>,
}

/// Continuous-space evaluation of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfSample {
    pub value: f64,
    /// Unit length unless `degenerate`, in which case it is zero.
    pub gradient: Vec2,
    pub degenerate: bool,
}

/// Value used when the opposite-sign set is empty: the distance between the
/// two most distant cell centers (never less than one cell).
pub fn distance_cap(width: usize, height: usize, resolution: f64) -> f64 {
    let w = (width - 1) as f64;
    let h = (height - 1) as f64;
    (resolution * (w * w + h * h).sqrt()).max(resolution)
}

/// Signed field with `inside` cells negative: each cell holds the distance
/// from its center to the nearest cell center of the opposite class.
pub fn signed_distance_from_mask(
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    kind: SdfKind,
    inside: &[bool],
) -> SignedDistanceField {
    let cap = distance_cap(width, height, resolution);
    let outside: Vec<bool> = inside.iter().map(|&b| !b).collect();
    // Distance for outside cells comes from the inside sites and vice versa.
    let to_inside = squared_edt(width, height, inside);
    let to_outside = squared_edt(width, height, &outside);

    let values = (0..width * height)
        .map(|i| {
            if inside[i] {
                match &to_outside {
                    Some(d) => -resolution * (d[i] as f64).sqrt(),
                    None => -cap,
                }
            } else {
                match &to_inside {
                    Some(d) => resolution * (d[i] as f64).sqrt(),
                    None => cap,
                }
            }
        })
        .collect();

    SignedDistanceField {
        width,
        height,
        resolution,
        origin,
        kind,
        values,
    }
}

/// Obstacle SDF. Unknown cells count as non-obstacle.
pub fn compute_obstacle_sdf(grid: &OccupancyGrid) -> SignedDistanceField {
    let inside: Vec<bool> = grid.cells().iter().map(|&c| c == CellState::Occupied).collect();
    signed_distance_from_mask(
        grid.width(),
        grid.height(),
        grid.resolution(),
        grid.origin(),
        SdfKind::Obstacle,
        &inside,
    )
}

/// Frontier SDF with the cluster cells as the negative region, or `None` when
/// there is no significant cluster.
pub fn compute_frontier_sdf(grid: &OccupancyGrid, clusters: &FrontierClusterSet) -> Option<SignedDistanceField> {
    if clusters.is_empty() {
        return None;
    }
    let inside = clusters.mask(grid.width(), grid.height());
    Some(signed_distance_from_mask(
        grid.width(),
        grid.height(),
        grid.resolution(),
        grid.origin(),
        SdfKind::Frontier,
        &inside,
    ))
}

impl SignedDistanceField {
    /// Wraps precomputed cell values (row-major, meters).
    pub fn from_values(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Vec2,
        kind: SdfKind,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(values.len(), width * height, "value buffer does not match grid size");
        Self {
            width,
            height,
            resolution,
            origin,
            kind,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn kind(&self) -> SdfKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.width + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new(ix as f64, iy as f64) * self.resolution
    }

    /// Central-difference gradient at a cell, one-sided at the grid border.
    /// Not normalized.
    pub fn cell_gradient(&self, ix: usize, iy: usize) -> Vec2 {
        let gx = axis_difference(ix, self.width, self.resolution, |i| self.at(i, iy));
        let gy = axis_difference(iy, self.height, self.resolution, |j| self.at(ix, j));
        Vec2::new(gx, gy)
    }

    /// Continuous cell coordinates of `p`, clamped into the grid.
    fn continuous_index(&self, p: Vec2) -> (usize, usize, f64, usize, usize, f64) {
        let rel = (p - self.origin) / self.resolution;
        let (x0, x1, tx) = split_axis(rel.x, self.width);
        let (y0, y1, ty) = split_axis(rel.y, self.height);
        (x0, x1, tx, y0, y1, ty)
    }

    /// Bilinear interpolation of the cell values, plus the same blend of
    /// the four corner gradients before normalization.
    pub fn interpolate(&self, p: Vec2) -> (f64, Vec2) {
        let (x0, x1, tx, y0, y1, ty) = self.continuous_index(p);
        let w00 = (1.0 - tx) * (1.0 - ty);
        let w10 = tx * (1.0 - ty);
        let w01 = (1.0 - tx) * ty;
        let w11 = tx * ty;
        let value = w00 * self.at(x0, y0) + w10 * self.at(x1, y0) + w01 * self.at(x0, y1) + w11 * self.at(x1, y1);
        let grad = self.cell_gradient(x0, y0) * w00
            + self.cell_gradient(x1, y0) * w10
            + self.cell_gradient(x0, y1) * w01
            + self.cell_gradient(x1, y1) * w11;
        (value, grad)
    }

    /// Bilinear value only.
    pub fn value_at(&self, p: Vec2) -> f64 {
        let (x0, x1, tx, y0, y1, ty) = self.continuous_index(p);
        let a = self.at(x0, y0) * (1.0 - tx) + self.at(x1, y0) * tx;
        let b = self.at(x0, y1) * (1.0 - tx) + self.at(x1, y1) * tx;
        a * (1.0 - ty) + b * ty
    }

    /// Value and unit gradient at a world point. Points outside the grid are
    /// clamped onto the boundary cells.
    pub fn sample(&self, p: Vec2) -> SdfSample {
        let (value, raw) = self.interpolate(p);
        let norm = raw.norm();
        if norm > GRADIENT_EPS {
            SdfSample {
                value,
                gradient: raw / norm,
                degenerate: false,
            }
        } else {
            SdfSample {
                value,
                gradient: Vec2::zeros(),
                degenerate: true,
            }
        }
    }

    /// True when every cell whose center lies within `radius` of `p` is at
    /// least `radius` away from the sign boundary and has a raw gradient of
    /// near-unit norm pointing in a common direction. Used to keep
    /// finite-difference checks away from medial-axis kinks.
    pub fn is_smooth_near(&self, p: Vec2, radius: f64) -> bool {
        let rel = (p - self.origin) / self.resolution;
        let reach = (radius / self.resolution).ceil() as isize + 1;
        let cx = rel.x.round() as isize;
        let cy = rel.y.round() as isize;
        let mut reference: Option<Vec2> = None;
        for iy in (cy - reach)..=(cy + reach) {
            for ix in (cx - reach)..=(cx + reach) {
                if ix < 1 || iy < 1 || ix >= self.width as isize - 1 || iy >= self.height as isize - 1 {
                    return false;
                }
                let (ux, uy) = (ix as usize, iy as usize);
                if (self.cell_center(ux, uy) - p).norm() > radius + self.resolution {
                    continue;
                }
                if self.at(ux, uy).abs() < radius {
                    return false;
                }
                let g = self.cell_gradient(ux, uy);
                let n = g.norm();
                if !(0.9..=1.1).contains(&n) {
                    return false;
                }
                let dir = g / n;
                match reference {
                    None => reference = Some(dir),
                    Some(r) if r.dot(&dir) < 0.95 => return false,
                    Some(_) => {}
                }
            }
        }
        true
    }
}

fn axis_difference(i: usize, n: usize, r: f64, f: impl Fn(usize) -> f64) -> f64 {
    if n < 2 {
        0.0
    } else if i == 0 {
        (f(1) - f(0)) / r
    } else if i == n - 1 {
        (f(n - 1) - f(n - 2)) / r
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * r)
    }
}

fn split_axis(coord: f64, n: usize) -> (usize, usize, f64) {
    if n == 1 {
        return (0, 0, 0.0);
    }
    let c = coord.clamp(0.0, (n - 1) as f64);
    let i0 = (c.floor() as usize).min(n - 2);
    (i0, i0 + 1, c - i0 as f64)
}
