//! Occupancy grids and the distance fields derived from them.
//!
//! Cell `(ix, iy)` has its center at `origin + resolution * (ix, iy)`. Row 0
//! is the minimum-y row, both in memory and in the text format.

mod edt;
mod frontier;
mod sdf;

pub use edt::squared_edt;
pub use frontier::{extract_frontier_clusters, uncertainty_density, FrontierCluster, FrontierClusterSet};
pub use sdf::{
    compute_frontier_sdf, compute_obstacle_sdf, distance_cap, signed_distance_from_mask, SdfKind, SdfSample,
    SignedDistanceField,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::Vec2;

/// Default minimum size of a significant unknown cluster.
pub const DEFAULT_N_MIN: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("grid resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("cell buffer has {got} entries, expected {expected}")]
    CellCount { expected: usize, got: usize },
    #[error("grid header must be `width height resolution`, got {0:?}")]
    BadHeader(String),
    #[error("grid row {row}: expected {expected} cells, got {got}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("grid row {row}: unknown cell symbol {symbol:?}")]
    BadSymbol { row: usize, symbol: char },
    #[error("grid text ended after {got} of {expected} rows")]
    MissingRows { expected: usize, got: usize },
    #[error("unexpected trailing content after grid: {0:?}")]
    TrailingContent(String),
}

/// State of a single occupancy cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    /// ROS-style occupancy code: -1 unknown, 0 free, 100 occupied.
    pub fn code(self) -> i8 {
        match self {
            CellState::Unknown => -1,
            CellState::Free => 0,
            CellState::Occupied => 100,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            -1 => Some(CellState::Unknown),
            0 => Some(CellState::Free),
            100 => Some(CellState::Occupied),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CellState::Unknown => '?',
            CellState::Free => '.',
            CellState::Occupied => '#',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '?' => Some(CellState::Unknown),
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Occupied),
            _ => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    /// A grid with every cell set to `fill`.
    pub fn new(width: usize, height: usize, resolution: f64, origin: Vec2, fill: CellState) -> Result<Self, GridError> {
        Self::from_cells(width, height, resolution, origin, vec![fill; width * height])
    }

    /// Builds a grid from a row-major cell buffer (row 0 = minimum y).
    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Vec2,
        cells: Vec<CellState>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::BadResolution(resolution));
        }
        if cells.len() != width * height {
            return Err(GridError::CellCount {
                expected: width * height,
                got: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// Same geometry, every cell set to `fill`.
    pub fn blank_like(&self, fill: CellState) -> Self {
        Self {
            cells: vec![fill; self.cells.len()],
            ..self.clone()
        }
    }

    /// Origin used by the text format: cell (0,0) spans `[0, r] x [0, r]`.
    pub fn default_origin(resolution: f64) -> Vec2 {
        Vec2::new(0.5 * resolution, 0.5 * resolution)
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

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.width && iy < self.height);
        iy * self.width + ix
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> CellState {
        self.cells[self.index(ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, state: CellState) {
        let i = self.index(ix, iy);
        self.cells[i] = state;
    }

    #[inline]
    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new(ix as f64, iy as f64) * self.resolution
    }

    /// Cell containing `p`, possibly outside the grid.
    pub fn world_to_cell(&self, p: Vec2) -> (isize, isize) {
        let rel = (p - self.origin) / self.resolution;
        ((rel.x + 0.5).floor() as isize, (rel.y + 0.5).floor() as isize)
    }

    /// Cell containing `p`, or `None` when `p` lies outside the grid.
    pub fn cell_at(&self, p: Vec2) -> Option<(usize, usize)> {
        let (ix, iy) = self.world_to_cell(p);
        self.in_bounds(ix, iy).then_some((ix as usize, iy as usize))
    }

    #[inline]
    pub fn in_bounds(&self, ix: isize, iy: isize) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    /// World-space extent covered by the cell squares: (min corner, max corner).
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let half = Vec2::new(0.5, 0.5) * self.resolution;
        let lo = self.origin - half;
        let hi = self.cell_center(self.width - 1, self.height - 1) + half;
        (lo, hi)
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_known()).count()
    }

    /// Reads one grid (header plus `height` rows) from a line iterator,
    /// leaving any following lines unconsumed.
    pub fn read_from_lines<'a, I>(lines: &mut I) -> Result<Self, GridError>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines
            .by_ref()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .ok_or_else(|| GridError::BadHeader(String::new()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || GridError::BadHeader(header.to_string());
        if parts.len() != 3 {
            return Err(bad_header());
        }
        let width: usize = parts[0].parse().map_err(|_| bad_header())?;
        let height: usize = parts[1].parse().map_err(|_| bad_header())?;
        let resolution: f64 = parts[2].parse().map_err(|_| bad_header())?;
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }

        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            let line = lines
                .next()
                .ok_or(GridError::MissingRows {
                    expected: height,
                    got: row,
                })?
                .trim_end_matches(['\r', '\n']);
            let mut n = 0;
            for c in line.chars() {
                let state = CellState::from_symbol(c).ok_or(GridError::BadSymbol { row, symbol: c })?;
                cells.push(state);
                n += 1;
            }
            if n != width {
                return Err(GridError::RowLength {
                    row,
                    expected: width,
                    got: n,
                });
            }
        }
        Self::from_cells(width, height, resolution, Self::default_origin(resolution), cells)
    }
}

impl FromStr for OccupancyGrid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let grid = Self::read_from_lines(&mut lines)?;
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(GridError::TrailingContent(extra.to_string()));
        }
        Ok(grid)
    }
}

impl fmt::Display for OccupancyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.width, self.height, self.resolution)?;
        for row in self.cells.chunks(self.width) {
            let line: String = row.iter().map(|c| c.symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
