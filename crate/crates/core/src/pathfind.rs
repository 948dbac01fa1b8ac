//! Shortest paths, action masks, and discrete movement on the waypoint
//! graph. All functions are pure over an immutable graph.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::waygraph::{Direction, WaypointGraph, DIRECTIONS};

/// The discrete action space: stay plus the 8 compass directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Stay,
    Move(Direction),
}

impl Action {
    /// Codes 0..=8: 0 = stay, 1..=8 = N, NE, E, SE, S, SW, W, NW.
    pub fn code(self) -> u8 {
        match self {
            Action::Stay => 0,
            Action::Move(d) => d.index() as u8 + 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Action> {
        match code {
            0 => Some(Action::Stay),
            1..=8 => Some(Action::Move(DIRECTIONS[code as usize - 1])),
            _ => None,
        }
    }

    pub fn all() -> impl Iterator<Item = Action> {
        (0..9).map(|c| Action::from_code(c).unwrap())
    }
}

/// Edge weighting for shortest paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Every valid edge costs 1; diagonal edges are treated as equidistant.
    Unit,
    /// Valid edges cost their 3-D straight-line length.
    Euclid,
}

impl CostMode {
    pub fn name(self) -> &'static str {
        match self {
            CostMode::Unit => "unit",
            CostMode::Euclid => "euclid",
        }
    }

    pub fn from_name(name: &str) -> Option<CostMode> {
        match name {
            "unit" => Some(CostMode::Unit),
            "euclid" => Some(CostMode::Euclid),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PathError {
    #[error("unknown or invalid waypoint id {0}")]
    InvalidNode(u32),
    #[error("action {action:?} is masked at node {node}")]
    IllegalMove { node: u32, action: u8 },
    #[error("no path from {src} to {dst}")]
    NoPath { src: u32, dst: u32 },
}

fn require_valid(graph: &WaypointGraph, id: u32) -> Result<(), PathError> {
    match graph.node(id) {
        Ok(n) if n.valid => Ok(()),
        _ => Err(PathError::InvalidNode(id)),
    }
}

/// Per-action availability at a node: index 0 is stay (always true), indices
/// 1..=8 are true iff the edge in that direction exists, is valid, and leads
/// to a valid waypoint.
pub fn action_mask(graph: &WaypointGraph, node_id: u32) -> Result<[bool; 9], PathError> {
    require_valid(graph, node_id)?;
    let mut mask = [false; 9];
    mask[0] = true;
    for dir in DIRECTIONS {
        if let Some(e) = graph.edge(node_id, dir) {
            if e.valid && graph.node(e.to).map(|n| n.valid).unwrap_or(false) {
                mask[dir.index() + 1] = true;
            }
        }
    }
    Ok(mask)
}

/// Apply a discrete action. Masked actions are hard errors, never silent
/// no-ops; the skirmish layer is the place that forgives them.
pub fn apply_action(graph: &WaypointGraph, node_id: u32, action: Action) -> Result<u32, PathError> {
    let mask = action_mask(graph, node_id)?;
    if !mask[action.code() as usize] {
        return Err(PathError::IllegalMove {
            node: node_id,
            action: action.code(),
        });
    }
    match action {
        Action::Stay => Ok(node_id),
        Action::Move(dir) => Ok(graph.edge(node_id, dir).expect("unmasked edge").to),
    }
}

fn edge_cost(graph: &WaypointGraph, from: u32, dir: Direction, mode: CostMode) -> f64 {
    match mode {
        CostMode::Unit => 1.0,
        CostMode::Euclid => graph.edge(from, dir).expect("edge exists").euclid_len,
    }
}

/// Minimal distance from every node to `dst` over valid edges.
fn dijkstra_to(graph: &WaypointGraph, dst: u32, mode: CostMode) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    let mut heap: BinaryHeap<(std::cmp::Reverse<HeapKey>, u32)> = BinaryHeap::new();
    dist[dst as usize] = 0.0;
    heap.push((std::cmp::Reverse(HeapKey(0.0)), dst));
    while let Some((std::cmp::Reverse(HeapKey(d)), u)) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for dir in DIRECTIONS {
            let Some(e) = graph.edge(u, dir) else { continue };
            if !e.valid || !graph.node(e.to).map(|n| n.valid).unwrap_or(false) {
                continue;
            }
            let nd = d + edge_cost(graph, u, dir, mode);
            if nd < dist[e.to as usize] {
                dist[e.to as usize] = nd;
                heap.push((std::cmp::Reverse(HeapKey(nd)), e.to));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct HeapKey(f64);
impl Eq for HeapKey {}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).expect("no NaN costs")
    }
}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra shortest path over valid edges. Among equal-cost paths, returns
/// the lexicographically smallest node-id sequence, making results
/// reproducible byte-for-byte.
pub fn shortest_path(
    graph: &WaypointGraph,
    src: u32,
    dst: u32,
    mode: CostMode,
) -> Result<(Vec<u32>, f64), PathError> {
    require_valid(graph, src)?;
    require_valid(graph, dst)?;
    if src == dst {
        return Ok((vec![src], 0.0));
    }
    // Distances to dst, then a greedy front-to-back walk from src choosing
    // the smallest-id neighbour that lies on some optimal path. Equality is
    // exact: each node's distance was produced by relaxing one of these
    // same sums.
    let dist = dijkstra_to(graph, dst, mode);
    if !dist[src as usize].is_finite() {
        return Err(PathError::NoPath { src, dst });
    }
    let total = dist[src as usize];
    let mut path = vec![src];
    let mut current = src;
    while current != dst {
        let mut next: Option<u32> = None;
        for dir in DIRECTIONS {
            let Some(e) = graph.edge(current, dir) else {
                continue;
            };
            if !e.valid || !graph.node(e.to).map(|n| n.valid).unwrap_or(false) {
                continue;
            }
            let via = edge_cost(graph, current, dir, mode) + dist[e.to as usize];
            if via == dist[current as usize] {
                next = Some(match next {
                    Some(best) => best.min(e.to),
                    None => e.to,
                });
            }
        }
        current = next.expect("finite distance implies an optimal successor");
        path.push(current);
    }
    Ok((path, total))
}
