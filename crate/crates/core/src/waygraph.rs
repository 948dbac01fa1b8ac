//! Waypoint graph generation, edge validation, gap filling, and file I/O.
//!
//! Waypoints sit on a square lattice at `spacing` meters, anchored at the
//! seed point; lattice coordinate i grows east, j grows north. Generation is
//! a BFS flood fill from the seed: dequeuing a waypoint attempts to create
//! every absent lattice neighbour, and each newly created waypoint is linked
//! to all already-present neighbours. `fill_gaps` then sweeps the bounding
//! lattice south-to-north, west-to-east, seeding a fresh flood fill at every
//! walkable lattice position the first pass missed.
//!
//! Invalid waypoints and edges are retained with `valid = false`; action
//! masking hides them at movement time.
//!
//! Construction is single-threaded so node ids are reproducible; the
//! finished graph is immutable and safe for concurrent reads.

use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::terrain::{height_at, TerrainError, TerrainGrid, WalkMask};

pub const GRAPH_FORMAT_VERSION: u32 = 1;

/// The 8 compass directions, in BFS attempt order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

pub const DIRECTIONS: [Direction; 8] = [
    Direction::N,
    Direction::NE,
    Direction::E,
    Direction::SE,
    Direction::S,
    Direction::SW,
    Direction::W,
    Direction::NW,
];

impl Direction {
    /// Lattice offset (di east, dj north).
    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::N => (0, 1),
            Direction::NE => (1, 1),
            Direction::E => (1, 0),
            Direction::SE => (1, -1),
            Direction::S => (0, -1),
            Direction::SW => (-1, -1),
            Direction::W => (-1, 0),
            Direction::NW => (-1, 1),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::N => Direction::S,
            Direction::NE => Direction::SW,
            Direction::E => Direction::W,
            Direction::SE => Direction::NW,
            Direction::S => Direction::N,
            Direction::SW => Direction::NE,
            Direction::W => Direction::E,
            Direction::NW => Direction::SE,
        }
    }

    pub fn index(self) -> usize {
        DIRECTIONS.iter().position(|d| *d == self).unwrap()
    }

    pub fn from_offset(di: i32, dj: i32) -> Option<Direction> {
        DIRECTIONS.iter().copied().find(|d| d.offset() == (di, dj))
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::N => "N",
            Direction::NE => "NE",
            Direction::E => "E",
            Direction::SE => "SE",
            Direction::S => "S",
            Direction::SW => "SW",
            Direction::W => "W",
            Direction::NW => "NW",
        }
    }

    pub fn from_name(name: &str) -> Option<Direction> {
        DIRECTIONS.iter().copied().find(|d| d.name() == name)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("bad graph config: {0}")]
    Config(String),
    #[error("seed point ({x}, {z}) is not on a walkable cell")]
    Seed { x: f64, z: f64 },
    #[error("waypoints {a} and {b} are not lattice-adjacent")]
    NotAdjacent { a: u32, b: u32 },
    #[error("unknown waypoint id {0}")]
    UnknownNode(u32),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error("cannot access graph file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("graph load error: {0}")]
    Load(String),
}

/// Parameters controlling waypoint placement and edge validity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    /// Lattice spacing in meters.
    pub spacing: f64,
    /// Slope threshold used to derive the walkability mask.
    pub slope_max_deg: f64,
    /// Max allowed walkable-path length / straight-line length per edge.
    pub detour_max: f64,
    /// Max vertical separation across one edge, meters.
    pub vstep_max: f64,
    /// World (x, z) of lattice origin (0, 0).
    pub seed_x: f64,
    pub seed_z: f64,
}

impl GraphConfig {
    pub fn with_spacing(spacing: f64, seed_x: f64, seed_z: f64) -> Self {
        GraphConfig {
            spacing,
            slope_max_deg: 45.0,
            detour_max: 1.5,
            vstep_max: 0.5 * spacing,
            seed_x,
            seed_z,
        }
    }

    fn check(&self) -> Result<(), GraphError> {
        if self.spacing.is_nan() || self.spacing <= 0.0 {
            return Err(GraphError::Config(format!(
                "spacing must be > 0, got {}",
                self.spacing
            )));
        }
        if self.detour_max.is_nan() || self.detour_max <= 1.0 {
            return Err(GraphError::Config(format!(
                "detour_max must be > 1, got {}",
                self.detour_max
            )));
        }
        if self.vstep_max.is_nan() || self.vstep_max < 0.0 {
            return Err(GraphError::Config(format!(
                "vstep_max must be >= 0, got {}",
                self.vstep_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub id: u32,
    pub i: i32,
    pub j: i32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeReason {
    NoPath,
    Vertical,
    Detour,
}

impl EdgeReason {
    pub fn name(self) -> &'static str {
        match self {
            EdgeReason::NoPath => "no_path",
            EdgeReason::Vertical => "vertical",
            EdgeReason::Detour => "detour",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "no_path" => Some(EdgeReason::NoPath),
            "vertical" => Some(EdgeReason::Vertical),
            "detour" => Some(EdgeReason::Detour),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub dir: Direction,
    pub valid: bool,
    pub reason: Option<EdgeReason>,
    /// 3-D straight-line length between endpoint positions.
    pub euclid_len: f64,
    /// Grid-level shortest walkable path length; infinite when no path.
    pub walk_len: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointGraph {
    pub config: GraphConfig,
    nodes: Vec<Waypoint>,
    /// Per node, directed edge slots indexed by `Direction::index`.
    edges: Vec<[Option<Edge>; 8]>,
    lattice: HashMap<(i32, i32), u32>,
}

impl WaypointGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: u32) -> Result<&Waypoint, GraphError> {
        self.nodes
            .get(id as usize)
            .ok_or(GraphError::UnknownNode(id))
    }

    pub fn nodes(&self) -> &[Waypoint] {
        &self.nodes
    }

    pub fn node_at(&self, i: i32, j: i32) -> Option<u32> {
        self.lattice.get(&(i, j)).copied()
    }

    pub fn edge(&self, from: u32, dir: Direction) -> Option<&Edge> {
        self.edges.get(from as usize)?[dir.index()].as_ref()
    }

    /// Directed edges out of `from`, in direction order.
    pub fn edges_from(&self, from: u32) -> impl Iterator<Item = &Edge> {
        self.edges[from as usize].iter().flatten()
    }

    /// All directed edges, ordered by (from, direction).
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().flat_map(|slots| slots.iter().flatten())
    }

    pub fn valid_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.valid).count()
    }

    /// Position of a waypoint as (x, y, z).
    pub fn position(&self, id: u32) -> (f64, f64, f64) {
        let n = &self.nodes[id as usize];
        (n.x, n.y, n.z)
    }
}

struct Builder<'a> {
    grid: &'a TerrainGrid,
    mask: &'a WalkMask,
    cfg: &'a GraphConfig,
    nodes: Vec<Waypoint>,
    edges: Vec<[Option<Edge>; 8]>,
    lattice: HashMap<(i32, i32), u32>,
}

impl<'a> Builder<'a> {
    fn lattice_pos(&self, i: i32, j: i32) -> (f64, f64) {
        (
            self.cfg.seed_x + i as f64 * self.cfg.spacing,
            self.cfg.seed_z + j as f64 * self.cfg.spacing,
        )
    }

    /// Create the waypoint at (i, j), linking it to every lattice neighbour
    /// already present. Returns None when the position falls off the terrain.
    fn create(&mut self, i: i32, j: i32) -> Option<u32> {
        let (x, z) = self.lattice_pos(i, j);
        if !self.grid.in_extent(x, z) {
            return None;
        }
        let (col, row) = self.grid.cell_at(x, z).expect("in extent");
        let y = height_at(self.grid, x, z).expect("in extent");
        let id = self.nodes.len() as u32;
        let wp = Waypoint {
            id,
            i,
            j,
            x,
            y,
            z,
            valid: self.mask.walkable(col, row),
        };
        self.nodes.push(wp);
        self.edges.push([None; 8]);
        self.lattice.insert((i, j), id);
        for dir in DIRECTIONS {
            let (di, dj) = dir.offset();
            if let Some(&nid) = self.lattice.get(&(i + di, j + dj)) {
                let edge = validate_edge(self.grid, self.mask, &self.nodes[id as usize], &self.nodes[nid as usize], self.cfg)
                    .expect("lattice-adjacent by construction");
                let twin = Edge {
                    from: nid,
                    to: id,
                    dir: dir.opposite(),
                    ..edge
                };
                self.edges[id as usize][dir.index()] = Some(edge);
                self.edges[nid as usize][dir.opposite().index()] = Some(twin);
            }
        }
        Some(id)
    }

    /// BFS flood fill from an existing valid waypoint. Neighbours are
    /// attempted in fixed direction order with a FIFO queue.
    fn flood(&mut self, start: u32) {
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let (ui, uj) = {
                let n = &self.nodes[u as usize];
                (n.i, n.j)
            };
            for dir in DIRECTIONS {
                let (di, dj) = dir.offset();
                let key = (ui + di, uj + dj);
                if self.lattice.contains_key(&key) {
                    continue;
                }
                if let Some(id) = self.create(key.0, key.1) {
                    if self.nodes[id as usize].valid {
                        queue.push_back(id);
                    }
                }
            }
        }
    }

    fn finish(self) -> WaypointGraph {
        WaypointGraph {
            config: self.cfg.clone(),
            nodes: self.nodes,
            edges: self.edges,
            lattice: self.lattice,
        }
    }
}

/// Build the waypoint graph by BFS flood fill from the configured seed point.
pub fn generate(
    grid: &TerrainGrid,
    mask: &WalkMask,
    cfg: &GraphConfig,
) -> Result<WaypointGraph, GraphError> {
    cfg.check()?;
    if cfg.spacing < grid.cell_size / 4.0 {
        return Err(GraphError::Config(format!(
            "spacing {} below cell_size/4 = {} would alias the height grid",
            cfg.spacing,
            grid.cell_size / 4.0
        )));
    }
    let seed_cell = grid
        .cell_at(cfg.seed_x, cfg.seed_z)
        .filter(|&(c, r)| mask.walkable(c, r))
        .ok_or(GraphError::Seed {
            x: cfg.seed_x,
            z: cfg.seed_z,
        })?;
    let _ = seed_cell;
    let mut b = Builder {
        grid,
        mask,
        cfg,
        nodes: Vec::new(),
        edges: Vec::new(),
        lattice: HashMap::new(),
    };
    let seed_id = b.create(0, 0).expect("seed in extent");
    b.flood(seed_id);
    Ok(b.finish())
}

/// Sweep the bounding lattice south-to-north, west-to-east; every walkable
/// lattice position missing from the graph seeds a fresh flood fill.
/// Idempotent: a second application adds nothing.
pub fn fill_gaps(
    graph: WaypointGraph,
    grid: &TerrainGrid,
    mask: &WalkMask,
) -> WaypointGraph {
    let cfg = graph.config.clone();
    let mut b = Builder {
        grid,
        mask,
        cfg: &cfg,
        nodes: graph.nodes,
        edges: graph.edges,
        lattice: graph.lattice,
    };
    let (i_lo, i_hi) = lattice_range(cfg.seed_x, cfg.spacing, grid.origin_x, grid.extent_x());
    let (j_lo, j_hi) = lattice_range(cfg.seed_z, cfg.spacing, grid.origin_z, grid.extent_z());
    for j in j_lo..=j_hi {
        for i in i_lo..=i_hi {
            if b.lattice.contains_key(&(i, j)) {
                continue;
            }
            let (x, z) = b.lattice_pos(i, j);
            let walkable = grid
                .cell_at(x, z)
                .map(|(c, r)| mask.walkable(c, r))
                .unwrap_or(false);
            if !walkable {
                continue;
            }
            let id = b.create(i, j).expect("walkable implies in extent");
            b.flood(id);
        }
    }
    b.finish()
}

fn lattice_range(seed: f64, spacing: f64, origin: f64, extent: f64) -> (i32, i32) {
    let lo = ((origin - seed) / spacing).ceil() as i32;
    let hi = ((origin + extent - seed) / spacing).floor() as i32;
    (lo, hi)
}

/// Validate the edge between two lattice-adjacent waypoints. Checks, in
/// order: a walkable grid path exists, vertical separation within
/// `vstep_max`, and walkable-path length within `detour_max` times the
/// straight-line length.
pub fn validate_edge(
    grid: &TerrainGrid,
    mask: &WalkMask,
    a: &Waypoint,
    b: &Waypoint,
    cfg: &GraphConfig,
) -> Result<Edge, GraphError> {
    let (di, dj) = (b.i - a.i, b.j - a.j);
    let dir = Direction::from_offset(di, dj).ok_or(GraphError::NotAdjacent { a: a.id, b: b.id })?;
    let euclid_len =
        ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + (b.z - a.z).powi(2)).sqrt();
    let walk_len = walk_path_len(grid, mask, (a.x, a.z), (b.x, b.z));
    let (valid, reason) = if !walk_len.is_finite() {
        (false, Some(EdgeReason::NoPath))
    } else if (b.y - a.y).abs() > cfg.vstep_max {
        (false, Some(EdgeReason::Vertical))
    } else if walk_len / euclid_len > cfg.detour_max {
        (false, Some(EdgeReason::Detour))
    } else {
        (true, None)
    };
    Ok(Edge {
        from: a.id,
        to: b.id,
        dir,
        valid,
        reason,
        euclid_len,
        walk_len,
    })
}

/// Shortest 8-connected walkable-cell path length between the cells
/// containing two world points, searched within a corridor around the
/// endpoints. Diagonal steps cost sqrt(2) * cell_size. Infinite when no
/// path exists inside the corridor.
pub fn walk_path_len(
    grid: &TerrainGrid,
    mask: &WalkMask,
    a: (f64, f64),
    b: (f64, f64),
) -> f64 {
    let (Some(ca), Some(cb)) = (grid.cell_at(a.0, a.1), grid.cell_at(b.0, b.1)) else {
        return f64::INFINITY;
    };
    if !mask.walkable(ca.0, ca.1) || !mask.walkable(cb.0, cb.1) {
        return f64::INFINITY;
    }
    // Corridor: endpoint bounding box expanded by 3x the Chebyshev cell span.
    // Any path within the default detour budget stays well inside it.
    let span = ((ca.0 as i32 - cb.0 as i32).abs()).max((ca.1 as i32 - cb.1 as i32).abs());
    let margin = 3 * span.max(1);
    let c_lo = (ca.0.min(cb.0) as i32 - margin).max(0) as usize;
    let c_hi = ((ca.0.max(cb.0) as i32 + margin) as usize).min(grid.ncols - 1);
    let r_lo = (ca.1.min(cb.1) as i32 - margin).max(0) as usize;
    let r_hi = ((ca.1.max(cb.1) as i32 + margin) as usize).min(grid.nrows - 1);
    grid_dijkstra(grid, mask, ca, cb, (c_lo, r_lo), (c_hi, r_hi))
}

/// Unrestricted variant searching the whole grid; the independent check for
/// corridor-restricted results.
pub fn walk_path_len_full(
    grid: &TerrainGrid,
    mask: &WalkMask,
    a: (f64, f64),
    b: (f64, f64),
) -> f64 {
    let (Some(ca), Some(cb)) = (grid.cell_at(a.0, a.1), grid.cell_at(b.0, b.1)) else {
        return f64::INFINITY;
    };
    if !mask.walkable(ca.0, ca.1) || !mask.walkable(cb.0, cb.1) {
        return f64::INFINITY;
    }
    grid_dijkstra(grid, mask, ca, cb, (0, 0), (grid.ncols - 1, grid.nrows - 1))
}

fn grid_dijkstra(
    grid: &TerrainGrid,
    mask: &WalkMask,
    start: (usize, usize),
    goal: (usize, usize),
    lo: (usize, usize),
    hi: (usize, usize),
) -> f64 {
    let w = hi.0 - lo.0 + 1;
    let h = hi.1 - lo.1 + 1;
    let idx = |c: usize, r: usize| (r - lo.1) * w + (c - lo.0);
    let mut dist = vec![f64::INFINITY; w * h];
    let mut heap: BinaryHeap<(std::cmp::Reverse<OrdF64>, usize, usize)> = BinaryHeap::new();
    dist[idx(start.0, start.1)] = 0.0;
    heap.push((std::cmp::Reverse(OrdF64(0.0)), start.0, start.1));
    while let Some((std::cmp::Reverse(OrdF64(d)), c, r)) = heap.pop() {
        if (c, r) == goal {
            return d;
        }
        if d > dist[idx(c, r)] {
            continue;
        }
        for (dc, dr) in crate::terrain::NEIGHBOR_OFFSETS {
            let nc = c as i32 + dc;
            let nr = r as i32 + dr;
            if nc < lo.0 as i32 || nr < lo.1 as i32 || nc > hi.0 as i32 || nr > hi.1 as i32 {
                continue;
            }
            let (nc, nr) = (nc as usize, nr as usize);
            if !mask.walkable(nc, nr) {
                continue;
            }
            let step = if dc != 0 && dr != 0 {
                std::f64::consts::SQRT_2 * grid.cell_size
            } else {
                grid.cell_size
            };
            let nd = d + step;
            if nd < dist[idx(nc, nr)] {
                dist[idx(nc, nr)] = nd;
                heap.push((std::cmp::Reverse(OrdF64(nd)), nc, nr));
            }
        }
    }
    f64::INFINITY
}

/// Total-ordered f64 for heap keys; costs are never NaN.
#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).expect("no NaN costs")
    }
}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// --- serialization -------------------------------------------------------
//
// A versioned JSON document, written with fixed 6-decimal number formatting
// so identical graphs serialize to identical bytes.

#[derive(Deserialize)]
struct GraphFile {
    format_version: u32,
    config: GraphConfig,
    nodes: Vec<NodeRec>,
    edges: Vec<EdgeRec>,
}

#[derive(Deserialize)]
struct NodeRec {
    id: u32,
    i: i32,
    j: i32,
    x: f64,
    y: f64,
    z: f64,
    valid: bool,
}

#[derive(Deserialize)]
struct EdgeRec {
    from: u32,
    to: u32,
    dir: String,
    valid: bool,
    reason: Option<String>,
    euclid_len: f64,
    walk_len: Option<f64>,
}

pub fn graph_to_string(graph: &WaypointGraph) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format_version\": {},\n", GRAPH_FORMAT_VERSION));
    let c = &graph.config;
    out.push_str(&format!(
        "  \"config\": {{\"spacing\": {:.6}, \"slope_max_deg\": {:.6}, \"detour_max\": {:.6}, \"vstep_max\": {:.6}, \"seed_x\": {:.6}, \"seed_z\": {:.6}}},\n",
        c.spacing, c.slope_max_deg, c.detour_max, c.vstep_max, c.seed_x, c.seed_z
    ));
    out.push_str("  \"nodes\": [\n");
    for (k, n) in graph.nodes.iter().enumerate() {
        let sep = if k + 1 == graph.nodes.len() { "" } else { "," };
        out.push_str(&format!(
            "    {{\"id\": {}, \"i\": {}, \"j\": {}, \"x\": {:.6}, \"y\": {:.6}, \"z\": {:.6}, \"valid\": {}}}{sep}\n",
            n.id, n.i, n.j, n.x, n.y, n.z, n.valid
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"edges\": [\n");
    let edges: Vec<&Edge> = graph.all_edges().collect();
    for (k, e) in edges.iter().enumerate() {
        let sep = if k + 1 == edges.len() { "" } else { "," };
        let reason = match e.reason {
            Some(r) => format!("\"{}\"", r.name()),
            None => "null".to_string(),
        };
        let walk = if e.walk_len.is_finite() {
            format!("{:.6}", e.walk_len)
        } else {
            "null".to_string()
        };
        out.push_str(&format!(
            "    {{\"from\": {}, \"to\": {}, \"dir\": \"{}\", \"valid\": {}, \"reason\": {}, \"euclid_len\": {:.6}, \"walk_len\": {}}}{sep}\n",
            e.from, e.to, e.dir.name(), e.valid, reason, e.euclid_len, walk
        ));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn save_graph(graph: &WaypointGraph, path: &Path) -> Result<(), GraphError> {
    std::fs::write(path, graph_to_string(graph)).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<WaypointGraph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    graph_from_str(&text)
}

pub fn graph_from_str(text: &str) -> Result<WaypointGraph, GraphError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| GraphError::Load(format!("schema: {e}")))?;
    if file.format_version != GRAPH_FORMAT_VERSION {
        return Err(GraphError::Load(format!(
            "unsupported format_version {} (expected {})",
            file.format_version, GRAPH_FORMAT_VERSION
        )));
    }
    let mut nodes = Vec::with_capacity(file.nodes.len());
    let mut lattice = HashMap::new();
    for (k, n) in file.nodes.iter().enumerate() {
        if n.id as usize != k {
            return Err(GraphError::Load(format!(
                "node ids must be dense and ordered; found id {} at position {k}",
                n.id
            )));
        }
        if lattice.insert((n.i, n.j), n.id).is_some() {
            return Err(GraphError::Load(format!(
                "duplicate lattice position ({}, {})",
                n.i, n.j
            )));
        }
        nodes.push(Waypoint {
            id: n.id,
            i: n.i,
            j: n.j,
            x: n.x,
            y: n.y,
            z: n.z,
            valid: n.valid,
        });
    }
    let mut edges = vec![[None; 8]; nodes.len()];
    for e in &file.edges {
        let dir = Direction::from_name(&e.dir)
            .ok_or_else(|| GraphError::Load(format!("unknown direction `{}`", e.dir)))?;
        let reason = match &e.reason {
            Some(r) => Some(
                EdgeReason::from_name(r)
                    .ok_or_else(|| GraphError::Load(format!("unknown edge reason `{r}`")))?,
            ),
            None => None,
        };
        if e.from as usize >= nodes.len() || e.to as usize >= nodes.len() {
            return Err(GraphError::Load(format!(
                "edge references unknown node ({} -> {})",
                e.from, e.to
            )));
        }
        let slot: &mut Option<Edge> = &mut edges[e.from as usize][dir.index()];
        if slot.is_some() {
            return Err(GraphError::Load(format!(
                "duplicate edge {} -> {} dir {}",
                e.from, e.to, e.dir
            )));
        }
        *slot = Some(Edge {
            from: e.from,
            to: e.to,
            dir,
            valid: e.valid,
            reason,
            euclid_len: e.euclid_len,
            walk_len: e.walk_len.unwrap_or(f64::INFINITY),
        });
    }
    let graph = WaypointGraph {
        config: file.config,
        nodes,
        edges,
        lattice,
    };
    check_symmetry(&graph)?;
    Ok(graph)
}

fn check_symmetry(graph: &WaypointGraph) -> Result<(), GraphError> {
    for e in graph.all_edges() {
        let twin = graph.edge(e.to, e.dir.opposite()).ok_or_else(|| {
            GraphError::Load(format!(
                "edge {} -> {} has no reverse twin",
                e.from, e.to
            ))
        })?;
        if twin.to != e.from || twin.valid != e.valid {
            return Err(GraphError::Load(format!(
                "asymmetric adjacency between {} and {}",
                e.from, e.to
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{parse_terrain, walkable_mask};

    fn flat_grid(n: usize) -> TerrainGrid {
        TerrainGrid::new(n, n, 1.0, 0.0, 0.0, vec![0.0; n * n]).unwrap()
    }

    fn graph_3x3() -> (TerrainGrid, WalkMask, WaypointGraph) {
        let grid = flat_grid(3);
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 1.0);
        let g = generate(&grid, &mask, &cfg).unwrap();
        (grid, mask, g)
    }

    #[test]
    fn direction_round_trips() {
        for d in DIRECTIONS {
            assert_eq!(d.opposite().opposite(), d);
            let (di, dj) = d.offset();
            assert_eq!(Direction::from_offset(di, dj), Some(d));
            assert_eq!(Direction::from_name(d.name()), Some(d));
        }
    }

    #[test]
    fn flat_3x3_full_lattice() {
        let (_, _, g) = graph_3x3();
        assert_eq!(g.len(), 9);
        assert_eq!(g.valid_node_count(), 9);
        let directed: usize = g.all_edges().count();
        assert_eq!(directed, 40); // 20 undirected
        // Exhaustive pair enumeration: every lattice pair at Chebyshev
        // distance 1 must carry a valid edge, and nothing else.
        let mut expected = 0;
        for a in g.nodes() {
            for b in g.nodes() {
                if a.id == b.id {
                    continue;
                }
                let adjacent = (a.i - b.i).abs().max((a.j - b.j).abs()) == 1;
                if adjacent {
                    expected += 1;
                    let d = Direction::from_offset(b.i - a.i, b.j - a.j).unwrap();
                    let e = g.edge(a.id, d).expect("edge must exist");
                    assert!(e.valid);
                    assert_eq!(e.to, b.id);
                }
            }
        }
        assert_eq!(expected, 40);
    }

    #[test]
    fn seed_on_unwalkable_cell() {
        let grid = parse_terrain("3 3 1.0 0 0\n0 0 0\n0 9 0\n0 0 0\n").unwrap();
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 1.0);
        assert!(matches!(
            generate(&grid, &mask, &cfg),
            Err(GraphError::Seed { .. })
        ));
    }

    #[test]
    fn spacing_below_aliasing_limit() {
        let grid = flat_grid(3);
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(0.2, 1.0, 1.0);
        assert!(matches!(
            generate(&grid, &mask, &cfg),
            Err(GraphError::Config(_))
        ));
    }

    /// 9x9 map split by a full-width unwalkable band at x = 4.
    fn split_map() -> (TerrainGrid, WalkMask) {
        let mut heights = vec![0.0; 81];
        for row in 0..9 {
            heights[row * 9 + 4] = 50.0;
        }
        let grid = TerrainGrid::new(9, 9, 1.0, 0.0, 0.0, heights).unwrap();
        let mask = walkable_mask(&grid, 45.0).unwrap();
        (grid, mask)
    }

    #[test]
    fn generate_stops_at_unwalkable_band() {
        let (grid, mask) = split_map();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 4.0);
        let g = generate(&grid, &mask, &cfg).unwrap();
        // BFS reachability oracle: valid waypoints only west of the band.
        for n in g.nodes() {
            if n.valid {
                assert!(n.x < 3.5, "waypoint at x={} should not exist yet", n.x);
            }
        }
        // East half untouched.
        assert!(g.nodes().iter().all(|n| n.x < 4.5));
    }

    #[test]
    fn fill_gaps_adds_second_component() {
        let (grid, mask) = split_map();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 4.0);
        let g = generate(&grid, &mask, &cfg).unwrap();
        let filled = fill_gaps(g, &grid, &mask);
        // Census: every walkable lattice point carries a valid waypoint.
        let mut walkable_points = 0;
        for row in 0..9 {
            for col in 0..9 {
                if mask.walkable(col, row) {
                    walkable_points += 1;
                }
            }
        }
        assert_eq!(filled.valid_node_count(), walkable_points);
        // Idempotent.
        let n = filled.len();
        let again = fill_gaps(filled, &grid, &mask);
        assert_eq!(again.len(), n);
    }

    #[test]
    fn fill_gaps_noop_on_complete_graph() {
        let (grid, mask, g) = graph_3x3();
        let n = g.len();
        let filled = fill_gaps(g, &grid, &mask);
        assert_eq!(filled.len(), n);
    }

    #[test]
    fn edge_flat_ratio_one() {
        let (_, _, g) = graph_3x3();
        for e in g.all_edges() {
            assert!(e.valid);
            assert!((e.walk_len / e.euclid_len - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn edge_vertical_threshold() {
        // Gentle ramp: walkable everywhere, but one edge exceeds vstep_max.
        let mut heights = vec![0.0; 9];
        for col in 0..3 {
            heights[3 + col] = 0.0;
            heights[6 + col] = 0.61;
        }
        let grid = TerrainGrid::new(3, 3, 1.0, 0.0, 0.0, heights).unwrap();
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let mut cfg = GraphConfig::with_spacing(1.0, 1.0, 1.0);
        cfg.vstep_max = 0.5;
        cfg.detour_max = 10.0;
        let g = generate(&grid, &mask, &cfg).unwrap();
        let mid = g.node_at(0, 0).unwrap();
        let north = g.edge(mid, Direction::N).unwrap();
        assert!(!north.valid);
        assert_eq!(north.reason, Some(EdgeReason::Vertical));
    }

    #[test]
    fn edge_detour_through_u_corridor() {
        // Tall wall at column 4, rows 0..5. The slope rule also blocks the
        // cells flanking the wall, leaving a walkable corridor only over the
        // top rows: adjacent waypoints A=(2,3) B=(6,3) connect via a long
        // U-shaped path.
        let mut heights = vec![0.0; 81];
        for row in 0..6 {
            heights[row * 9 + 4] = 50.0;
        }
        let grid = TerrainGrid::new(9, 9, 1.0, 0.0, 0.0, heights).unwrap();
        let mask = walkable_mask(&grid, 45.0).unwrap();
        assert!(mask.walkable(2, 3) && mask.walkable(6, 3) && !mask.walkable(4, 3));
        let mut cfg = GraphConfig::with_spacing(4.0, 2.0, 3.0);
        cfg.detour_max = 1.5;
        cfg.vstep_max = 10.0;
        let a = Waypoint {
            id: 0,
            i: 0,
            j: 0,
            x: 2.0,
            y: 0.0,
            z: 3.0,
            valid: true,
        };
        let b = Waypoint {
            id: 1,
            i: 1,
            j: 0,
            x: 6.0,
            y: 0.0,
            z: 3.0,
            valid: true,
        };
        let e = validate_edge(&grid, &mask, &a, &b, &cfg).unwrap();
        assert!(!e.valid);
        assert_eq!(e.reason, Some(EdgeReason::Detour));
        // Full-grid Dijkstra oracle confirms the corridor-restricted length.
        let oracle = walk_path_len_full(&grid, &mask, (2.0, 3.0), (6.0, 3.0));
        assert!((e.walk_len - oracle).abs() < 1e-9);
        assert!(e.walk_len / e.euclid_len > 1.5);
    }

    #[test]
    fn validate_edge_rejects_non_adjacent() {
        let (grid, mask, g) = graph_3x3();
        let a = *g.node(0).unwrap();
        let mut c = *g.node(0).unwrap();
        c.i += 2;
        c.id = 99;
        assert!(matches!(
            validate_edge(&grid, &mask, &a, &c, &g.config),
            Err(GraphError::NotAdjacent { .. })
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let (_, _, g) = graph_3x3();
        let text = graph_to_string(&g);
        let g2 = graph_from_str(&text).unwrap();
        // Byte-identical through a round trip: the 6-decimal serialized form
        // is the canonical representation.
        assert_eq!(text, graph_to_string(&g2));
        assert_eq!(g.config, g2.config);
        assert_eq!(g.len(), g2.len());
        for (a, b) in g.nodes().iter().zip(g2.nodes()) {
            assert_eq!((a.id, a.i, a.j, a.valid), (b.id, b.i, b.j, b.valid));
        }
        for (a, b) in g.all_edges().zip(g2.all_edges()) {
            assert_eq!((a.from, a.to, a.dir, a.valid, a.reason), (b.from, b.to, b.dir, b.valid, b.reason));
        }
    }

    #[test]
    fn load_rejects_unknown_version() {
        let (_, _, g) = graph_3x3();
        let text = graph_to_string(&g).replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(matches!(graph_from_str(&text), Err(GraphError::Load(_))));
    }

    #[test]
    fn load_rejects_broken_symmetry() {
        let (_, _, g) = graph_3x3();
        let text = graph_to_string(&g);
        // Flip the validity of a single directed edge.
        let needle = "\"valid\": true, \"reason\": null";
        let pos = text
            .find("\"edges\"")
            .and_then(|p| text[p..].find(needle).map(|q| p + q))
            .unwrap();
        let mut broken = text.clone();
        broken.replace_range(
            pos..pos + needle.len(),
            "\"valid\": false, \"reason\": \"no_path\"",
        );
        assert!(matches!(graph_from_str(&broken), Err(GraphError::Load(_))));
    }

    #[test]
    fn adjacency_symmetry_and_dense_ids() {
        let (grid, mask) = split_map();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 4.0);
        let g = fill_gaps(generate(&grid, &mask, &cfg).unwrap(), &grid, &mask);
        for (k, n) in g.nodes().iter().enumerate() {
            assert_eq!(n.id as usize, k);
        }
        for e in g.all_edges() {
            let twin = g.edge(e.to, e.dir.opposite()).expect("twin");
            assert_eq!(twin.to, e.from);
            assert_eq!(twin.valid, e.valid);
            assert_eq!(twin.euclid_len, e.euclid_len);
        }
    }

    #[test]
    fn edge_monotone_in_thresholds() {
        let (grid, mask) = split_map();
        let cfg = GraphConfig::with_spacing(1.0, 1.0, 4.0);
        let g = fill_gaps(generate(&grid, &mask, &cfg).unwrap(), &grid, &mask);
        let mut loose = cfg.clone();
        loose.detour_max = cfg.detour_max * 2.0;
        loose.vstep_max = cfg.vstep_max + 1.0;
        for e in g.all_edges() {
            if e.valid {
                let a = g.node(e.from).unwrap();
                let b = g.node(e.to).unwrap();
                let re = validate_edge(&grid, &mask, a, b, &loose).unwrap();
                assert!(re.valid, "loosening thresholds invalidated {}->{}", e.from, e.to);
            }
        }
    }
}
