use std::collections::VecDeque;

use super::{CellState, OccupancyGrid};
use crate::Vec2;

/// One 8-connected component of unknown cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCluster {
    /// Row-major cell indices.
    pub cells: Vec<usize>,
    /// Mean of the member cell centers.
    pub centroid: Vec2,
}

impl FrontierCluster {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrontierClusterSet {
    pub clusters: Vec<FrontierCluster>,
}

impl FrontierClusterSet {
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FrontierCluster> {
        self.clusters.iter()
    }

    /// Row-major membership mask over a `width x height` grid.
    pub fn mask(&self, width: usize, height: usize) -> Vec<bool> {
        let mut mask = vec![false; width * height];
        for c in &self.clusters {
            for &i in &c.cells {
                mask[i] = true;
            }
        }
        mask
    }
}

/// Maximal 8-connected components of `Unknown` cells with at least `n_min`
/// members, in row-major order of their first cell.
pub fn extract_frontier_clusters(grid: &OccupancyGrid, n_min: usize) -> FrontierClusterSet {
    assert!(n_min >= 1, "n_min must be at least 1");
    let (w, h) = (grid.width(), grid.height());
    let cells = grid.cells();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let mut clusters = Vec::new();

    for start in 0..w * h {
        if seen[start] || cells[start] != CellState::Unknown {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx == 0 && dy == 0) || !grid.in_bounds(nx, ny) {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && cells[j] == CellState::Unknown {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if members.len() >= n_min {
            members.sort_unstable();
            let sum = members
                .iter()
                .fold(Vec2::zeros(), |acc, &i| acc + grid.cell_center(i % w, i / w));
            let centroid = sum / members.len() as f64;
            clusters.push(FrontierCluster {
                cells: members,
                centroid,
            });
        }
    }

    FrontierClusterSet { clusters }
}

/// Fraction of cells with centers inside the disc that are `Unknown`.
/// Zero when the disc contains no cell center.
pub fn uncertainty_density(grid: &OccupancyGrid, center: Vec2, radius: f64) -> f64 {
    assert!(radius > 0.0, "disc radius must be positive");
    let r = grid.resolution();
    let rel = (center - grid.origin()) / r;
    let reach = radius / r;
    let x_lo = ((rel.x - reach).ceil().max(0.0)) as usize;
    let y_lo = ((rel.y - reach).ceil().max(0.0)) as usize;
    let x_hi = (rel.x + reach).floor().min((grid.width() - 1) as f64);
    let y_hi = (rel.y + reach).floor().min((grid.height() - 1) as f64);
    if x_hi < 0.0 || y_hi < 0.0 {
        return 0.0;
    }
    let (x_hi, y_hi) = (x_hi as usize, y_hi as usize);

    let r2 = radius * radius;
    let mut total = 0usize;
    let mut unknown = 0usize;
    for iy in y_lo..=y_hi {
        for ix in x_lo..=x_hi {
            if (grid.cell_center(ix, iy) - center).norm_squared() <= r2 {
                total += 1;
                if grid.get(ix, iy) == CellState::Unknown {
                    unknown += 1;
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        unknown as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(text: &str) -> OccupancyGrid {
        text.parse().unwrap()
    }

    #[test]
    fn small_cluster_is_discarded() {
        let g = grid("5 5 1.0\n.....\n.???.\n.....\n.....\n.....\n");
        assert!(extract_frontier_clusters(&g, 4).is_empty());
        assert_eq!(extract_frontier_clusters(&g, 3).len(), 1);
    }

    #[test]
    fn full_block_is_one_cluster() {
        let g = OccupancyGrid::new(5, 5, 1.0, Vec2::zeros(), CellState::Unknown).unwrap();
        let set = extract_frontier_clusters(&g, 25);
        assert_eq!(set.len(), 1);
        assert_eq!(set.clusters[0].size(), 25);
        assert_eq!(set.clusters[0].centroid, Vec2::new(2.0, 2.0));
    }

    #[test]
    fn diagonal_neighbors_join() {
        let g = grid("3 3 1.0\n?..\n.?.\n...\n");
        let set = extract_frontier_clusters(&g, 2);
        assert_eq!(set.len(), 1);
        assert_eq!(set.clusters[0].cells, vec![0, 4]);
    }

    #[test]
    fn clusters_are_disjoint_and_ordered() {
        let g = grid("6 2 1.0\n??.#??\n??.#??\n");
        let set = extract_frontier_clusters(&g, 1);
        assert_eq!(set.len(), 2);
        assert_eq!(set.clusters[0].cells, vec![0, 1, 6, 7]);
        assert_eq!(set.clusters[1].cells, vec![4, 5, 10, 11]);
        let mask = set.mask(6, 2);
        assert_eq!(mask.iter().filter(|&&m| m).count(), 8);
    }

    #[test]
    fn density_extremes() {
        let unknown = OccupancyGrid::new(20, 20, 0.1, Vec2::zeros(), CellState::Unknown).unwrap();
        assert_eq!(uncertainty_density(&unknown, Vec2::new(1.0, 1.0), 0.5), 1.0);
        let free = unknown.blank_like(CellState::Free);
        assert_eq!(uncertainty_density(&free, Vec2::new(1.0, 1.0), 0.5), 0.0);
        // Disc entirely outside the grid.
        assert_eq!(uncertainty_density(&free, Vec2::new(-5.0, -5.0), 0.5), 0.0);
    }

    #[test]
    fn density_counts_cells_on_the_circle() {
        // Radius exactly one cell: center plus four edge neighbours.
        let mut g = OccupancyGrid::new(5, 5, 1.0, Vec2::zeros(), CellState::Free).unwrap();
        g.set(2, 3, CellState::Unknown);
        g.set(3, 3, CellState::Unknown);
        assert_eq!(uncertainty_density(&g, Vec2::new(2.0, 2.0), 1.0), 0.2);
    }
}
