//! Confidence-accumulating occupancy grid with angular-velocity gating and
//! threshold extraction.
//!
//! Cells count repeated lidar hits and saturate at a maximum confidence;
//! extraction keeps only cells observed at least `tau_conf` times, filtering
//! transient noise out of the final map.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::estimator::Pose;
use crate::sensors::LidarScan;
use crate::world::Bounds;

/// Mapping policy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    /// Mapping is suspended while |angular velocity| exceeds this, rad/s.
    pub omega_thresh: f64,
    /// Cells with confidence >= tau_conf are extracted as occupied.
    pub tau_conf: u8,
    /// Confidence added per lidar hit.
    pub increment: u8,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            omega_thresh: 0.05,
            tau_conf: 30,
            increment: 1,
        }
    }
}

/// Gate on rotational speed: mapping runs only while |omega| is at or below
/// the threshold, suppressing rotational smearing.
pub fn should_map(angular_velocity: f64, cfg: &MappingConfig) -> bool {
    angular_velocity.abs() <= cfg.omega_thresh
}

/// Cumulative-confidence occupancy matrix over the arena.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceGrid {
    cells: Vec<u8>,
    rows: usize,
    cols: usize,
    /// World coordinate of the (0, 0) cell corner (min x, min y).
    origin: (f64, f64),
    /// Meters per cell.
    resolution: f64,
    max_confidence: u8,
}

impl ConfidenceGrid {
    pub fn new(
        origin: (f64, f64),
        resolution: f64,
        rows: usize,
        cols: usize,
        max_confidence: u8,
    ) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        assert!(rows > 0 && cols > 0, "grid must be non-empty");
        Self {
            cells: vec![0; rows * cols],
            rows,
            cols,
            origin,
            resolution,
            max_confidence,
        }
    }

    /// Grid covering the full arena, 300 x 300 cells at the default 0.05 m
    /// resolution for the 15 m arena.
    pub fn covering(bounds: Bounds, resolution: f64, max_confidence: u8) -> Self {
        let cols = (bounds.width / resolution).round().max(1.0) as usize;
        let rows = (bounds.height / resolution).round().max(1.0) as usize;
        Self::new(
            (-0.5 * bounds.width, -0.5 * bounds.height),
            resolution,
            rows,
            cols,
            max_confidence,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn max_confidence(&self) -> u8 {
        self.max_confidence
    }

    pub fn confidence(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.resolution,
            self.origin.1 + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Project every present range from the estimated pose and bump the hit
    /// cells, saturating at the confidence ceiling. No-op while the angular
    /// velocity gate is closed.
    pub fn integrate_scan(
        &mut self,
        est_pose: Pose,
        scan: &LidarScan,
        cfg: &MappingConfig,
        angular_velocity: f64,
    ) {
        if !should_map(angular_velocity, cfg) {
            return;
        }
        for (angle, range) in scan.rays() {
            let Some(r) = range else { continue };
            let ray = est_pose.theta + angle;
            let point = (est_pose.x + r * ray.cos(), est_pose.y + r * ray.sin());
            if let Some((row, col)) = world_to_cell(point, self) {
                let cell = &mut self.cells[row * self.cols + col];
                *cell = cell.saturating_add(cfg.increment).min(self.max_confidence);
            }
        }
    }
}

/// Map a world point to its containing cell, or `None` outside the grid.
pub fn world_to_cell(point: (f64, f64), grid: &ConfidenceGrid) -> Option<(usize, usize)> {
    let col = ((point.0 - grid.origin.0) / grid.resolution).floor();
    let row = ((point.1 - grid.origin.1) / grid.resolution).floor();
    if row < 0.0 || col < 0.0 || row >= grid.rows as f64 || col >= grid.cols as f64 {
        return None;
    }
    Some((row as usize, col as usize))
}

/// Thresholded occupancy: the boolean extraction of a confidence grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrid {
    pub occupied: Vec<bool>,
    pub rows: usize,
    pub cols: usize,
    pub origin: (f64, f64),
    pub resolution: f64,
}

impl BinaryGrid {
    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.occupied[row * self.cols + col]
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows)
            .flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
            .filter(|&(r, c)| self.is_occupied(r, c))
    }
}

/// Keep only cells observed at least `tau_conf` times.
pub fn extract_occupancy(grid: &ConfidenceGrid, cfg: &MappingConfig) -> BinaryGrid {
    BinaryGrid {
        occupied: grid.cells.iter().map(|&c| c >= cfg.tau_conf).collect(),
        rows: grid.rows,
        cols: grid.cols,
        origin: grid.origin,
        resolution: grid.resolution,
    }
}

/// Write a binary grid as a P5 PGM (occupied = 0, free = 255, row 0 at the
/// max-y edge) plus a sidecar `<path>.txt` with the origin and resolution.
pub fn write_pgm(grid: &BinaryGrid, path: &Path) -> io::Result<()> {
    let mut data = Vec::with_capacity(grid.rows * grid.cols + 32);
    data.extend_from_slice(format!("P5\n{} {}\n255\n", grid.cols, grid.rows).as_bytes());
    for row in (0..grid.rows).rev() {
        for col in 0..grid.cols {
            data.push(if grid.is_occupied(row, col) { 0 } else { 255 });
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&data)?;

    let sidecar = path.with_extension("txt");
    std::fs::write(
        sidecar,
        format!(
            "origin {} {}\nresolution {}\n",
            grid.origin.0, grid.origin.1, grid.resolution
        ),
    )
}
