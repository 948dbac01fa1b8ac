//! Fine-grained trajectory ingest, snapping onto the waypoint graph, and
//! agreement statistics between actual and graph-path movement.
//!
//! Snapping assigns every sample to its closest valid waypoint, then fills
//! skipped waypoints with Dijkstra so consecutive path nodes are always
//! graph-adjacent. Fidelity compares actual against waypoint distance both
//! stepwise (per sample interval) and round-wise (whole trajectory), and
//! reports the relative difference
//! |actual total - waypoint total| / actual total.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::pathfind::{shortest_path, CostMode, PathError};
use crate::waygraph::WaypointGraph;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("cannot read trajectory file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("trajectory parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("graph has no valid waypoints")]
    NoValidWaypoints,
    #[error("no graph path between assignments of samples {from_sample} and {to_sample}")]
    Disconnected {
        from_sample: usize,
        to_sample: usize,
    },
    #[error("fidelity needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("relative difference undefined: actual total distance is zero")]
    ZeroActualDistance,
    #[error("no loadable trajectory in corpus ({errors} files failed)")]
    EmptyCorpus { errors: usize },
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Expected sampling interval in seconds.
    pub nominal_dt: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>) -> Self {
        Trajectory {
            samples,
            nominal_dt: 0.5,
        }
    }

    /// Total actual distance: sum of 3-D segment lengths.
    pub fn total_distance(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| dist3(&w[0], &w[1]))
            .sum()
    }
}

fn dist3(a: &Sample, b: &Sample) -> f64 {
    ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + (b.z - a.z).powi(2)).sqrt()
}

/// Parse the trajectory CSV: header `t,x,y,z`, one sample per row, `#`
/// comment lines ignored, timestamps strictly increasing.
pub fn load_trajectory(path: &Path) -> Result<Trajectory, TrajError> {
    let text = std::fs::read_to_string(path).map_err(|source| TrajError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trajectory(&text)
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory, TrajError> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));
    let (header_row, header) = rows.next().ok_or(TrajError::Parse {
        row: 1,
        message: "empty file".to_string(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["t", "x", "y", "z"] {
        return Err(TrajError::Parse {
            row: header_row,
            message: format!("expected header `t,x,y,z`, got `{header}`"),
        });
    }
    let mut samples = Vec::new();
    for (row, line) in rows {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(TrajError::Parse {
                row,
                message: format!("expected 4 columns, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 4];
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| TrajError::Parse {
                row,
                message: format!("cannot parse `{f}`"),
            })?;
            if !v.is_finite() {
                return Err(TrajError::Parse {
                    row,
                    message: format!("non-finite value `{f}`"),
                });
            }
            vals[k] = v;
        }
        if let Some(last) = samples.last() {
            let last: &Sample = last;
            if vals[0] <= last.t {
                return Err(TrajError::Parse {
                    row,
                    message: format!(
                        "timestamps must be strictly increasing ({} after {})",
                        vals[0], last.t
                    ),
                });
            }
        }
        samples.push(Sample {
            t: vals[0],
            x: vals[1],
            y: vals[2],
            z: vals[3],
        });
    }
    Ok(Trajectory::new(samples))
}

/// Closest valid waypoint by 3-D Euclidean distance; ties go to the lowest
/// id.
pub fn nearest_waypoint(graph: &WaypointGraph, x: f64, y: f64, z: f64) -> Result<u32, TrajError> {
    let mut best: Option<(f64, u32)> = None;
    for n in graph.nodes() {
        if !n.valid {
            continue;
        }
        let d2 = (n.x - x).powi(2) + (n.y - y).powi(2) + (n.z - z).powi(2);
        // Strict < keeps the lowest id on ties (nodes scan in id order).
        if best.map(|(bd, _)| d2 < bd).unwrap_or(true) {
            best = Some((d2, n.id));
        }
    }
    best.map(|(_, id)| id).ok_or(TrajError::NoValidWaypoints)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnappedPath {
    /// Closest-waypoint assignment per sample.
    pub assignments: Vec<u32>,
    /// Dijkstra-completed waypoint sequence; consecutive nodes are adjacent
    /// via valid edges and consecutive repeats are collapsed.
    pub path: Vec<u32>,
    /// For sample k, the index into `path` where `assignments[k]` sits.
    pub segment_starts: Vec<usize>,
    pub mode: CostMode,
    /// Samples that fell outside the graph's bounding region (snapped
    /// anyway, counted for the report).
    pub out_of_range: usize,
}

/// Snap a trajectory onto the graph: nearest-waypoint assignment per sample,
/// then shortest-path fill-in between consecutive assignments.
pub fn snap(
    graph: &WaypointGraph,
    traj: &Trajectory,
    mode: CostMode,
) -> Result<SnappedPath, TrajError> {
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_z, mut max_z) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in graph.nodes() {
        if n.valid {
            min_x = min_x.min(n.x);
            max_x = max_x.max(n.x);
            min_z = min_z.min(n.z);
            max_z = max_z.max(n.z);
        }
    }
    let mut assignments = Vec::with_capacity(traj.samples.len());
    let mut out_of_range = 0usize;
    for s in &traj.samples {
        if s.x < min_x || s.x > max_x || s.z < min_z || s.z > max_z {
            out_of_range += 1;
        }
        assignments.push(nearest_waypoint(graph, s.x, s.y, s.z)?);
    }
    let mut path = Vec::new();
    let mut segment_starts = Vec::with_capacity(assignments.len());
    for (k, &node) in assignments.iter().enumerate() {
        if k == 0 {
            path.push(node);
            segment_starts.push(0);
            continue;
        }
        let prev = assignments[k - 1];
        if node == prev {
            segment_starts.push(path.len() - 1);
            continue;
        }
        let (segment, _) = shortest_path(graph, prev, node, mode).map_err(|e| match e {
            PathError::NoPath { .. } => TrajError::Disconnected {
                from_sample: k - 1,
                to_sample: k,
            },
            other => TrajError::Path(other),
        })?;
        // Drop the duplicated segment head.
        path.extend_from_slice(&segment[1..]);
        segment_starts.push(path.len() - 1);
    }
    Ok(SnappedPath {
        assignments,
        path,
        segment_starts,
        mode,
        out_of_range,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    /// (actual, waypoint) distance per sample interval, meters.
    pub stepwise: Vec<(f64, f64)>,
    /// (actual total, waypoint total) for the whole round, meters.
    pub roundwise: (f64, f64),
    /// Squared Pearson correlation of the stepwise series; `None` when
    /// either series has zero variance.
    pub r2_stepwise: Option<f64>,
    /// Mean of (waypoint - actual) stepwise, the Bland-Altman center line.
    pub mean_diff_stepwise: f64,
    /// Waypoint total minus actual total.
    pub mean_diff_roundwise: f64,
    /// |actual total - waypoint total| / actual total.
    pub relative_difference: f64,
    pub mode: CostMode,
    pub out_of_range_samples: usize,
}

/// Squared Pearson correlation; `None` when either series is constant.
pub fn r_squared(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_b = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in pairs {
        cov += (a - mean_a) * (b - mean_b);
        var_a += (a - mean_a).powi(2);
        var_b += (b - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    let r = cov / (var_a.sqrt() * var_b.sqrt());
    Some(r * r)
}

/// Euclidean length of the snapped sub-path covering sample interval k.
fn waypoint_step_distance(graph: &WaypointGraph, snapped: &SnappedPath, k: usize) -> f64 {
    let lo = snapped.segment_starts[k];
    let hi = snapped.segment_starts[k + 1];
    let mut total = 0.0;
    for w in snapped.path[lo..=hi].windows(2) {
        let (ax, ay, az) = graph.position(w[0]);
        let (bx, by, bz) = graph.position(w[1]);
        total += ((bx - ax).powi(2) + (by - ay).powi(2) + (bz - az).powi(2)).sqrt();
    }
    total
}

/// Agreement statistics between a trajectory and its snapped path. Waypoint
/// distances use Euclidean edge lengths regardless of the fill-in cost mode:
/// the comparison target is meters of movement.
pub fn fidelity(
    traj: &Trajectory,
    snapped: &SnappedPath,
    graph: &WaypointGraph,
) -> Result<FidelityReport, TrajError> {
    if traj.samples.len() < 2 {
        return Err(TrajError::TooFewSamples(traj.samples.len()));
    }
    let mut stepwise = Vec::with_capacity(traj.samples.len() - 1);
    for k in 0..traj.samples.len() - 1 {
        let actual = dist3(&traj.samples[k], &traj.samples[k + 1]);
        let waypoint = waypoint_step_distance(graph, snapped, k);
        stepwise.push((actual, waypoint));
    }
    let actual_total: f64 = stepwise.iter().map(|p| p.0).sum();
    let waypoint_total: f64 = stepwise.iter().map(|p| p.1).sum();
    if actual_total == 0.0 {
        return Err(TrajError::ZeroActualDistance);
    }
    let mean_diff_stepwise =
        stepwise.iter().map(|(a, w)| w - a).sum::<f64>() / stepwise.len() as f64;
    Ok(FidelityReport {
        r2_stepwise: r_squared(&stepwise),
        mean_diff_stepwise,
        mean_diff_roundwise: waypoint_total - actual_total,
        relative_difference: (actual_total - waypoint_total).abs() / actual_total,
        roundwise: (actual_total, waypoint_total),
        stepwise,
        mode: snapped.mode,
        out_of_range_samples: snapped.out_of_range,
    })
}

#[derive(Debug, Serialize)]
pub struct CorpusRecord {
    pub name: String,
    pub relative_difference: Option<f64>,
    pub roundwise: Option<(f64, f64)>,
    pub r2_stepwise: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CorpusReport {
    pub records: Vec<CorpusRecord>,
    pub files_ok: usize,
    pub files_errored: usize,
    /// Mean of per-trajectory relative differences.
    pub mean_relative_difference: f64,
    /// Population standard deviation of per-trajectory relative differences.
    pub std_relative_difference: f64,
    /// Pooled over all stepwise pairs of all trajectories.
    pub r2_stepwise_pooled: Option<f64>,
    /// Over the per-trajectory (actual total, waypoint total) pairs.
    pub r2_roundwise_pooled: Option<f64>,
    pub mode: CostMode,
}

/// Analyze a corpus of trajectory files. Files that fail to load or analyze
/// are recorded and skipped; aggregation is order-independent (sums before
/// ratios).
pub fn analyze_corpus(
    graph: &WaypointGraph,
    files: &[std::path::PathBuf],
    mode: CostMode,
) -> Result<CorpusReport, TrajError> {
    let mut records = Vec::with_capacity(files.len());
    let mut rels = Vec::new();
    let mut pooled_step = Vec::new();
    let mut pooled_round = Vec::new();
    let mut errored = 0usize;
    for file in files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.display().to_string());
        let result = load_trajectory(file)
            .and_then(|traj| snap(graph, &traj, mode).map(|s| (traj, s)))
            .and_then(|(traj, snapped)| fidelity(&traj, &snapped, graph));
        match result {
            Ok(report) => {
                rels.push(report.relative_difference);
                pooled_step.extend_from_slice(&report.stepwise);
                pooled_round.push(report.roundwise);
                records.push(CorpusRecord {
                    name,
                    relative_difference: Some(report.relative_difference),
                    roundwise: Some(report.roundwise),
                    r2_stepwise: report.r2_stepwise,
                    error: None,
                });
            }
            Err(e) => {
                errored += 1;
                records.push(CorpusRecord {
                    name,
                    relative_difference: None,
                    roundwise: None,
                    r2_stepwise: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if rels.is_empty() {
        return Err(TrajError::EmptyCorpus { errors: errored });
    }
    let n = rels.len() as f64;
    let mean = rels.iter().sum::<f64>() / n;
    let var = rels.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok(CorpusReport {
        files_ok: rels.len(),
        files_errored: errored,
        mean_relative_difference: mean,
        std_relative_difference: var.sqrt(),
        r2_stepwise_pooled: r_squared(&pooled_step),
        r2_roundwise_pooled: r_squared(&pooled_round),
        records,
        mode,
    })
}
