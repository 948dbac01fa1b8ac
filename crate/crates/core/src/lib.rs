//! Terrain-abstraction toolkit: validated waypoint navigation graphs over
//! gridded terrain, trajectory-to-graph snapping with agreement statistics,
//! and deterministic multi-agent skirmish tournaments with ELO tracking.
//!
//! Module layering (each depends only on those above it):
//!   [`terrain`]    — height grid, walkability mask, height/LOS queries
//!   [`waygraph`]   — waypoint graph generation, validation, gap fill, I/O
//!   [`pathfind`]   — Dijkstra, action masks, discrete movement
//!   [`trajectory`] — trajectory ingest, snapping, fidelity statistics
//!   [`skirmish`]   — combat episodes, tournaments, ELO, scripted policies

pub mod pathfind;
pub mod skirmish;
pub mod terrain;
pub mod trajectory;
pub mod waygraph;
