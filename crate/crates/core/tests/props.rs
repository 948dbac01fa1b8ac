//! Property-based invariants over randomized terrains and walks.

use proptest::prelude::*;

use waynav::pathfind::{action_mask, apply_action, Action, CostMode};
use waynav::terrain::{height_at, line_of_sight, walkable_mask, TerrainGrid};
use waynav::trajectory::{r_squared, snap, Sample, Trajectory};
use waynav::waygraph::{generate, graph_from_str, graph_to_string, GraphConfig, DIRECTIONS};

const N: usize = 6;

fn gentle_terrain() -> impl Strategy<Value = TerrainGrid> {
    // Heights small relative to cell size: every cell stays walkable at 45
    // degrees, so the lattice always covers the full grid.
    prop::collection::vec(0.0..0.4f64, N * N)
        .prop_map(|h| TerrainGrid::new(N, N, 1.0, 0.0, 0.0, h).unwrap())
}

fn rough_terrain() -> impl Strategy<Value = TerrainGrid> {
    prop::collection::vec(0.0..6.0f64, N * N)
        .prop_map(|h| TerrainGrid::new(N, N, 1.0, 0.0, 0.0, h).unwrap())
}

proptest! {
    #[test]
    fn los_is_symmetric(
        grid in rough_terrain(),
        ax in 0.0..5.0f64, az in 0.0..5.0f64,
        bx in 0.0..5.0f64, bz in 0.0..5.0f64,
        eye in 0.1..3.0f64,
    ) {
        let ab = line_of_sight(&grid, ax, az, bx, bz, eye).unwrap();
        let ba = line_of_sight(&grid, bx, bz, ax, az, eye).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn bilinear_height_stays_within_corner_range(
        grid in rough_terrain(),
        x in 0.0..5.0f64, z in 0.0..5.0f64,
    ) {
        let h = height_at(&grid, x, z).unwrap();
        let (i0, j0) = (x.floor() as usize, z.floor() as usize);
        let (i1, j1) = ((i0 + 1).min(N - 1), (j0 + 1).min(N - 1));
        let corners = [
            grid.height(i0, j0), grid.height(i1, j0),
            grid.height(i0, j1), grid.height(i1, j1),
        ];
        let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(h >= lo - 1e-12 && h <= hi + 1e-12);
    }

    #[test]
    fn graph_build_and_round_trip_are_byte_stable(grid in gentle_terrain()) {
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(1.0, 2.0, 2.0);
        let g1 = generate(&grid, &mask, &cfg).unwrap();
        let g2 = generate(&grid, &mask, &cfg).unwrap();
        let text = graph_to_string(&g1);
        prop_assert_eq!(&text, &graph_to_string(&g2));
        let reloaded = graph_from_str(&text).unwrap();
        prop_assert_eq!(&text, &graph_to_string(&reloaded));
    }

    #[test]
    fn edge_geometry_is_sane(grid in gentle_terrain()) {
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(1.0, 0.0, 0.0);
        let g = generate(&grid, &mask, &cfg).unwrap();
        for e in g.all_edges() {
            prop_assert!(e.euclid_len > 0.0);
            if e.valid {
                // The horizontal grid walk can never beat the straight
                // horizontal line, and must satisfy the detour bound.
                let a = g.node(e.from).unwrap();
                let b = g.node(e.to).unwrap();
                let horiz = ((b.x - a.x).powi(2) + (b.z - a.z).powi(2)).sqrt();
                prop_assert!(e.walk_len >= horiz - 1e-9);
                prop_assert!(e.walk_len / e.euclid_len <= cfg.detour_max + 1e-9);
            }
            let twin = g.edge(e.to, e.dir.opposite()).expect("twin edge");
            prop_assert_eq!(twin.valid, e.valid);
            prop_assert_eq!(twin.to, e.from);
        }
    }

    #[test]
    fn snap_recovers_a_waypoint_walk(
        grid in gentle_terrain(),
        start in 0u32..36,
        moves in prop::collection::vec(0usize..8, 1..12),
    ) {
        let mask = walkable_mask(&grid, 45.0).unwrap();
        let cfg = GraphConfig::with_spacing(1.0, 0.0, 0.0);
        let g = generate(&grid, &mask, &cfg).unwrap();
        prop_assume!((start as usize) < g.nodes().len());
        prop_assume!(g.node(start).unwrap().valid);

        let mut node = start;
        let mut visited = vec![node];
        for &m in &moves {
            let mask9 = action_mask(&g, node).unwrap();
            // First legal move at or after the random index; stay otherwise.
            let action = (0..8)
                .map(|k| Action::Move(DIRECTIONS[(m + k) % 8]))
                .find(|a| mask9[a.code() as usize])
                .unwrap_or(Action::Stay);
            node = apply_action(&g, node, action).unwrap();
            if *visited.last().unwrap() != node {
                visited.push(node);
            }
        }
        prop_assume!(visited.len() >= 2);

        let samples = visited
            .iter()
            .enumerate()
            .map(|(k, &id)| {
                let (x, y, z) = g.position(id);
                Sample { t: k as f64 * 0.5, x, y, z }
            })
            .collect();
        let traj = Trajectory::new(samples);
        let snapped = snap(&g, &traj, CostMode::Unit).unwrap();
        prop_assert_eq!(&snapped.path, &visited);
    }

    #[test]
    fn r_squared_is_bounded(
        pairs in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), 2..40),
    ) {
        if let Some(r2) = r_squared(&pairs) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r2));
        }
    }
}
