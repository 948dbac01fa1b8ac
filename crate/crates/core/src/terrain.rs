//! Regular height grid terrain: walkability from slope constraints, bilinear
//! height queries, and sampled line-of-sight.
//!
//! Heights live on lattice points spaced `cell_size` apart; row 0 is the
//! southernmost row, so index (0,0) is the southwest corner. The grid is
//! immutable after load and safe for concurrent reads.

use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Offsets for the 8 neighbours of a cell, (dcol, drow).
pub const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("cannot read terrain file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("terrain parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("query point ({x}, {z}) outside terrain extent")]
    OutOfExtent { x: f64, z: f64 },
    #[error("invalid slope threshold {0} (must be in (0, 90])")]
    BadSlopeMax(f64),
}

/// Regular height grid. `heights[row * ncols + col]`, row 0 southernmost.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_z: f64,
    heights: Vec<f64>,
}

impl TerrainGrid {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cell_size: f64,
        origin_x: f64,
        origin_z: f64,
        heights: Vec<f64>,
    ) -> Result<Self, TerrainError> {
        if ncols < 2 || nrows < 2 {
            return Err(TerrainError::Parse {
                line: 1,
                message: format!("grid must be at least 2x2, got {ncols}x{nrows}"),
            });
        }
        if !cell_size.is_finite() || cell_size <= 0.0 {
            return Err(TerrainError::Parse {
                line: 1,
                message: format!("cell_size must be a positive finite number, got {cell_size}"),
            });
        }
        if heights.len() != ncols * nrows {
            return Err(TerrainError::Parse {
                line: 1,
                message: format!(
                    "expected {} heights, got {}",
                    ncols * nrows,
                    heights.len()
                ),
            });
        }
        if let Some(h) = heights.iter().find(|h| !h.is_finite()) {
            return Err(TerrainError::Parse {
                line: 1,
                message: format!("non-finite height {h}"),
            });
        }
        Ok(Self {
            ncols,
            nrows,
            cell_size,
            origin_x,
            origin_z,
            heights,
        })
    }

    #[inline]
    pub fn height(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.ncols + col]
    }

    /// World-extent east-west span in meters.
    pub fn extent_x(&self) -> f64 {
        (self.ncols - 1) as f64 * self.cell_size
    }

    /// World-extent south-north span in meters.
    pub fn extent_z(&self) -> f64 {
        (self.nrows - 1) as f64 * self.cell_size
    }

    pub fn in_extent(&self, x: f64, z: f64) -> bool {
        let lx = x - self.origin_x;
        let lz = z - self.origin_z;
        lx >= 0.0 && lz >= 0.0 && lx <= self.extent_x() && lz <= self.extent_z()
    }

    /// Cell containing a world point: the nearest lattice node.
    /// Returns `None` outside the extent.
    pub fn cell_at(&self, x: f64, z: f64) -> Option<(usize, usize)> {
        if !self.in_extent(x, z) {
            return None;
        }
        let col = ((x - self.origin_x) / self.cell_size).round() as i64;
        let row = ((z - self.origin_z) / self.cell_size).round() as i64;
        let col = col.clamp(0, self.ncols as i64 - 1) as usize;
        let row = row.clamp(0, self.nrows as i64 - 1) as usize;
        Some((col, row))
    }

    /// World position of a cell's lattice node.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + col as f64 * self.cell_size,
            self.origin_z + row as f64 * self.cell_size,
        )
    }
}

/// Parse the text terrain format: header `ncols nrows cell_size origin_x origin_z`
/// followed by `nrows` lines of `ncols` heights, southernmost row first.
/// Lines starting with `#` are ignored.
pub fn load_terrain(path: &Path) -> Result<TerrainGrid, TerrainError> {
    let text = std::fs::read_to_string(path).map_err(|source| TerrainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_terrain(&text)
}

pub fn parse_terrain(text: &str) -> Result<TerrainGrid, TerrainError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(TerrainError::Parse {
        line: 1,
        message: "empty file".to_string(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(TerrainError::Parse {
            line: header_line,
            message: format!(
                "header must be `ncols nrows cell_size origin_x origin_z`, got {} fields",
                fields.len()
            ),
        });
    }
    let parse_num = |s: &str, what: &str| -> Result<f64, TerrainError> {
        s.parse::<f64>().map_err(|_| TerrainError::Parse {
            line: header_line,
            message: format!("cannot parse {what} `{s}`"),
        })
    };
    let ncols = parse_num(fields[0], "ncols")? as usize;
    let nrows = parse_num(fields[1], "nrows")? as usize;
    let cell_size = parse_num(fields[2], "cell_size")?;
    let origin_x = parse_num(fields[3], "origin_x")?;
    let origin_z = parse_num(fields[4], "origin_z")?;

    let mut heights = Vec::with_capacity(ncols * nrows);
    let mut rows_read = 0usize;
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        if rows_read == nrows {
            return Err(TerrainError::Parse {
                line: line_no,
                message: format!("expected {nrows} height rows, found extra data"),
            });
        }
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != ncols {
            return Err(TerrainError::Parse {
                line: line_no,
                message: format!("expected {ncols} heights per row, got {}", values.len()),
            });
        }
        for v in values {
            let h: f64 = v.parse().map_err(|_| TerrainError::Parse {
                line: line_no,
                message: format!("cannot parse height `{v}`"),
            })?;
            if !h.is_finite() {
                return Err(TerrainError::Parse {
                    line: line_no,
                    message: format!("non-finite height `{v}`"),
                });
            }
            heights.push(h);
        }
        rows_read += 1;
    }
    if rows_read != nrows {
        return Err(TerrainError::Parse {
            line: last_line,
            message: format!("expected {nrows} height rows, got {rows_read}"),
        });
    }
    TerrainGrid::new(ncols, nrows, cell_size, origin_x, origin_z, heights)
}

/// Per-cell walkability derived from a slope threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkMask {
    pub ncols: usize,
    pub nrows: usize,
    pub slope_max_deg: f64,
    walkable: Vec<bool>,
}

impl WalkMask {
    #[inline]
    pub fn walkable(&self, col: usize, row: usize) -> bool {
        self.walkable[row * self.ncols + col]
    }

    pub fn count_walkable(&self) -> usize {
        self.walkable.iter().filter(|w| **w).count()
    }
}

impl fmt::Display for WalkMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in (0..self.nrows).rev() {
            for col in 0..self.ncols {
                f.write_str(if self.walkable(col, row) { "." } else { "#" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Slope in degrees from cell `(col, row)` to its steepest existing neighbour.
pub fn max_neighbor_slope_deg(grid: &TerrainGrid, col: usize, row: usize) -> f64 {
    let h = grid.height(col, row);
    let mut max_deg = 0.0f64;
    for (dc, dr) in NEIGHBOR_OFFSETS {
        let nc = col as i32 + dc;
        let nr = row as i32 + dr;
        if nc < 0 || nr < 0 || nc >= grid.ncols as i32 || nr >= grid.nrows as i32 {
            continue;
        }
        let hn = grid.height(nc as usize, nr as usize);
        let dist = if dc != 0 && dr != 0 {
            std::f64::consts::SQRT_2 * grid.cell_size
        } else {
            grid.cell_size
        };
        let deg = ((h - hn).abs() / dist).atan().to_degrees();
        max_deg = max_deg.max(deg);
    }
    max_deg
}

/// A cell is walkable iff the steepest gradient to any of its 8 existing
/// neighbours stays within `slope_max_deg`.
pub fn walkable_mask(grid: &TerrainGrid, slope_max_deg: f64) -> Result<WalkMask, TerrainError> {
    if !(slope_max_deg > 0.0 && slope_max_deg <= 90.0) {
        return Err(TerrainError::BadSlopeMax(slope_max_deg));
    }
    let mut walkable = Vec::with_capacity(grid.ncols * grid.nrows);
    for row in 0..grid.nrows {
        for col in 0..grid.ncols {
            walkable.push(max_neighbor_slope_deg(grid, col, row) <= slope_max_deg);
        }
    }
    Ok(WalkMask {
        ncols: grid.ncols,
        nrows: grid.nrows,
        slope_max_deg,
        walkable,
    })
}

/// Bilinear interpolation of the 4 surrounding lattice heights; exact at
/// lattice nodes.
pub fn height_at(grid: &TerrainGrid, x: f64, z: f64) -> Result<f64, TerrainError> {
    if !grid.in_extent(x, z) {
        return Err(TerrainError::OutOfExtent { x, z });
    }
    let fx = (x - grid.origin_x) / grid.cell_size;
    let fz = (z - grid.origin_z) / grid.cell_size;
    let c0 = (fx.floor() as usize).min(grid.ncols - 2);
    let r0 = (fz.floor() as usize).min(grid.nrows - 2);
    let tx = fx - c0 as f64;
    let tz = fz - r0 as f64;
    let h00 = grid.height(c0, r0);
    let h10 = grid.height(c0 + 1, r0);
    let h01 = grid.height(c0, r0 + 1);
    let h11 = grid.height(c0 + 1, r0 + 1);
    Ok(h00 * (1.0 - tx) * (1.0 - tz)
        + h10 * tx * (1.0 - tz)
        + h01 * (1.0 - tx) * tz
        + h11 * tx * tz)
}

/// Sampled line-of-sight between two world points at `eye_height` above the
/// terrain. Samples at uniform parametric positions (step ≈ cell_size/4);
/// the uniform parametrisation makes the check symmetric in a and b.
pub fn line_of_sight(
    grid: &TerrainGrid,
    ax: f64,
    az: f64,
    bx: f64,
    bz: f64,
    eye_height: f64,
) -> Result<bool, TerrainError> {
    line_of_sight_sampled(grid, ax, az, bx, bz, eye_height, grid.cell_size / 4.0)
}

/// Line-of-sight with an explicit sample step; exposed so a denser sampling
/// can cross-check the default step.
pub fn line_of_sight_sampled(
    grid: &TerrainGrid,
    ax: f64,
    az: f64,
    bx: f64,
    bz: f64,
    eye_height: f64,
    step: f64,
) -> Result<bool, TerrainError> {
    let ha = height_at(grid, ax, az)?;
    let hb = height_at(grid, bx, bz)?;
    let len = ((bx - ax).powi(2) + (bz - az).powi(2)).sqrt();
    if len == 0.0 {
        return Ok(true);
    }
    let eye_a = ha + eye_height;
    let eye_b = hb + eye_height;
    let n = (len / step).ceil().max(1.0) as usize;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let x = ax + (bx - ax) * t;
        let z = az + (bz - az) * t;
        let terrain = height_at(grid, x, z)?;
        let sight = eye_a + (eye_b - eye_a) * t;
        if terrain >= sight {
            return Ok(false);
        }
    }
    Ok(true)
}
