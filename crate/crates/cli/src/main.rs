//! Command-line front door: terrain -> graph -> analysis -> simulation.
//!
//! Exit codes: 0 success, 1 operational failure (bad file, failed check),
//! 2 usage error (unknown subcommand or flag). All outputs are written
//! atomically (temp file + rename) and identical invocations produce
//! identical bytes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use waynav::pathfind::CostMode;
use waynav::skirmish::policies::{GreedyAttacker, Hold, Patrol, StaticDefender};
use waynav::skirmish::rng::mix_episode_seed;
use waynav::skirmish::{
    load_scenario, run_episode, win_table_from_str, win_table_to_string, PairResult, Policy,
    ScenarioConfig, Team, WinTable,
};
use waynav::skirmish::elo::EloTable;
use waynav::terrain::{load_terrain, walkable_mask, TerrainGrid, WalkMask};
use waynav::trajectory::{analyze_corpus, fidelity, load_trajectory, snap, FidelityReport};
use waynav::waygraph::{
    fill_gaps, generate, graph_to_string, load_graph, validate_edge, GraphConfig, WaypointGraph,
};

#[derive(Parser)]
#[command(name = "waynav", version, about = "Waypoint graphs, trajectory fidelity, and skirmish tournaments over gridded terrain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a waypoint graph from a terrain file.
    BuildGraph {
        #[arg(long)]
        terrain: PathBuf,
        /// Waypoint lattice spacing, meters.
        #[arg(long)]
        spacing: f64,
        /// Maximum walkable slope, degrees.
        #[arg(long, default_value_t = 45.0)]
        slope_max: f64,
        /// Maximum walk/euclid length ratio for a valid edge.
        #[arg(long, default_value_t = 1.5)]
        detour_max: f64,
        /// Maximum vertical separation for a valid edge (default spacing/2).
        #[arg(long)]
        vstep_max: Option<f64>,
        /// Seed point; defaults to the first walkable lattice position
        /// scanning from the southwest corner.
        #[arg(long, requires = "seed_z")]
        seed_x: Option<f64>,
        #[arg(long, requires = "seed_x")]
        seed_z: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-derive every validity flag of a graph from terrain and report
    /// mismatches (exit 1 when any are found).
    ValidateGraph {
        #[arg(long)]
        terrain: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Snap one trajectory CSV onto a graph and write the fidelity report.
    Snap {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value = "unit")]
        cost: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze a directory of trajectory CSVs and write corpus statistics.
    Analyze {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        traj_dir: PathBuf,
        #[arg(long, default_value = "unit")]
        cost: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a skirmish tournament over all start-position pairs.
    Simulate {
        #[arg(long)]
        terrain: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes_per_pair: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a per-step transcript next to the results file.
        #[arg(long)]
        transcript: bool,
    },
    /// Aggregate win tables into an ELO rating report.
    EloReport {
        #[arg(long, num_args = 1.., required = true)]
        results: Vec<PathBuf>,
        #[arg(long, default_value_t = 16.0)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Write atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)
        .with_context(|| format!("cannot write temp file {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move temp file into place at {}", path.display()))?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildGraph {
            terrain,
            spacing,
            slope_max,
            detour_max,
            vstep_max,
            seed_x,
            seed_z,
            out,
        } => build_graph(
            &terrain, spacing, slope_max, detour_max, vstep_max, seed_x, seed_z, &out,
        ),
        Command::ValidateGraph { terrain, graph } => validate_graph(&terrain, &graph),
        Command::Snap {
            graph,
            traj,
            cost,
            out,
        } => snap_cmd(&graph, &traj, &cost, &out),
        Command::Analyze {
            graph,
            traj_dir,
            cost,
            out,
        } => analyze_cmd(&graph, &traj_dir, &cost, &out),
        Command::Simulate {
            terrain,
            graph,
            scenario,
            episodes_per_pair,
            seed,
            out,
            transcript,
        } => simulate_cmd(
            &terrain,
            &graph,
            &scenario,
            episodes_per_pair,
            seed,
            &out,
            transcript,
        ),
        Command::EloReport { results, k, out } => elo_report(&results, k, &out),
    }
}

fn load_terrain_checked(path: &Path) -> Result<TerrainGrid> {
    load_terrain(path).with_context(|| format!("terrain file {}", path.display()))
}

fn load_graph_checked(path: &Path) -> Result<WaypointGraph> {
    load_graph(path).with_context(|| format!("graph file {}", path.display()))
}

fn cost_mode(name: &str) -> Result<CostMode> {
    CostMode::from_name(name)
        .with_context(|| format!("--cost must be `unit` or `euclid`, got `{name}`"))
}

/// First walkable lattice position scanning south to north, west to east,
/// anchored at the grid origin.
fn default_seed(grid: &TerrainGrid, mask: &WalkMask, spacing: f64) -> Result<(f64, f64)> {
    let cols = (grid.extent_x() / spacing).floor() as usize;
    let rows = (grid.extent_z() / spacing).floor() as usize;
    for j in 0..=rows {
        for i in 0..=cols {
            let x = grid.origin_x + i as f64 * spacing;
            let z = grid.origin_z + j as f64 * spacing;
            if let Some((c, r)) = grid.cell_at(x, z) {
                if mask.walkable(c, r) {
                    return Ok((x, z));
                }
            }
        }
    }
    bail!("no walkable lattice position; pass --seed-x/--seed-z or lower --slope-max")
}

#[allow(clippy::too_many_arguments)]
fn build_graph(
    terrain: &Path,
    spacing: f64,
    slope_max: f64,
    detour_max: f64,
    vstep_max: Option<f64>,
    seed_x: Option<f64>,
    seed_z: Option<f64>,
    out: &Path,
) -> Result<()> {
    let grid = load_terrain_checked(terrain)?;
    let mask = walkable_mask(&grid, slope_max).context("--slope-max")?;
    let (sx, sz) = match (seed_x, seed_z) {
        (Some(x), Some(z)) => (x, z),
        _ => default_seed(&grid, &mask, spacing)?,
    };
    let cfg = GraphConfig {
        spacing,
        slope_max_deg: slope_max,
        detour_max,
        vstep_max: vstep_max.unwrap_or(spacing / 2.0),
        seed_x: sx,
        seed_z: sz,
    };
    let graph = generate(&grid, &mask, &cfg).context("graph generation")?;
    let graph = fill_gaps(graph, &grid, &mask);
    write_atomic(out, &graph_to_string(&graph))?;
    let edge_total = graph.all_edges().count() / 2;
    let edge_valid = graph.all_edges().filter(|e| e.valid).count() / 2;
    println!(
        "built graph: {} waypoints ({} valid), {} edges ({} valid) -> {}",
        graph.len(),
        graph.valid_node_count(),
        edge_total,
        edge_valid,
        out.display()
    );
    Ok(())
}

fn validate_graph(terrain: &Path, graph_path: &Path) -> Result<()> {
    let grid = load_terrain_checked(terrain)?;
    let graph = load_graph_checked(graph_path)?;
    let cfg = &graph.config;
    let mask = walkable_mask(&grid, cfg.slope_max_deg).context("graph slope_max_deg")?;
    let mut node_mismatches = 0usize;
    for n in graph.nodes() {
        let expected = grid
            .cell_at(n.x, n.z)
            .map(|(c, r)| mask.walkable(c, r))
            .unwrap_or(false);
        if expected != n.valid {
            node_mismatches += 1;
            println!(
                "node {} at ({:.3}, {:.3}): stored valid={}, derived valid={}",
                n.id, n.x, n.z, n.valid, expected
            );
        }
    }
    let mut edge_mismatches = 0usize;
    for e in graph.all_edges() {
        let a = graph.node(e.from)?;
        let b = graph.node(e.to)?;
        let derived = validate_edge(&grid, &mask, a, b, cfg)?;
        if derived.valid != e.valid || derived.reason != e.reason {
            edge_mismatches += 1;
            println!(
                "edge {} -> {}: stored ({}, {:?}), derived ({}, {:?})",
                e.from, e.to, e.valid, e.reason, derived.valid, derived.reason
            );
        }
    }
    println!(
        "checked {} nodes and {} directed edges: {} node mismatches, {} edge mismatches",
        graph.len(),
        graph.all_edges().count(),
        node_mismatches,
        edge_mismatches
    );
    if node_mismatches + edge_mismatches > 0 {
        bail!("graph does not match terrain derivation");
    }
    Ok(())
}

/// Snap output: the waypoint sequence plus the fidelity statistics.
#[derive(Serialize)]
struct SnapOutput {
    assignments: Vec<u32>,
    path: Vec<u32>,
    report: FidelityReport,
}

fn snap_cmd(graph_path: &Path, traj: &Path, cost: &str, out: &Path) -> Result<()> {
    let graph = load_graph_checked(graph_path)?;
    let mode = cost_mode(cost)?;
    let trajectory =
        load_trajectory(traj).with_context(|| format!("trajectory file {}", traj.display()))?;
    let snapped = snap(&graph, &trajectory, mode)?;
    let report = fidelity(&trajectory, &snapped, &graph)?;
    let output = SnapOutput {
        assignments: snapped.assignments,
        path: snapped.path,
        report,
    };
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    write_atomic(out, &text)?;
    println!(
        "snapped {} samples to {} waypoints, relative difference {:.5} -> {}",
        output.assignments.len(),
        output.path.len(),
        output.report.relative_difference,
        out.display()
    );
    Ok(())
}

fn analyze_cmd(graph_path: &Path, traj_dir: &Path, cost: &str, out: &Path) -> Result<()> {
    let graph = load_graph_checked(graph_path)?;
    let mode = cost_mode(cost)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(traj_dir)
        .with_context(|| format!("trajectory directory {}", traj_dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .csv files in {}", traj_dir.display());
    }
    let report = analyze_corpus(&graph, &files, mode)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_atomic(out, &text)?;
    println!(
        "analyzed {} trajectories ({} errored): mean relative difference {:.5} (std {:.5}) -> {}",
        report.files_ok,
        report.files_errored,
        report.mean_relative_difference,
        report.std_relative_difference,
        out.display()
    );
    Ok(())
}

fn resolve_policy<'a>(
    name: &str,
    graph: &'a WaypointGraph,
    cfg: &ScenarioConfig,
    team: Team,
) -> Result<Box<dyn Policy + 'a>> {
    match name {
        "greedy_attacker" => Ok(Box::new(GreedyAttacker::new(graph, cfg.target))),
        "static_defender" => {
            let posts = if cfg.defender_posts.is_empty() {
                match team {
                    Team::Blue => cfg.blue_starts.clone(),
                    Team::Red => cfg.red_starts.clone(),
                }
            } else {
                cfg.defender_posts.clone()
            };
            Ok(Box::new(StaticDefender::new(graph, posts)))
        }
        "patrol" => {
            if cfg.patrol_route.is_empty() {
                bail!("policy `patrol` needs a non-empty patrol_route in the scenario");
            }
            Ok(Box::new(Patrol::new(graph, cfg.patrol_route.clone())))
        }
        "hold" => Ok(Box::new(Hold)),
        other => bail!(
            "unknown policy `{other}` (expected greedy_attacker, static_defender, patrol or hold)"
        ),
    }
}

fn simulate_cmd(
    terrain: &Path,
    graph_path: &Path,
    scenario: &Path,
    episodes_per_pair: u32,
    seed: u64,
    out: &Path,
    transcript: bool,
) -> Result<()> {
    if episodes_per_pair < 1 {
        bail!("--episodes-per-pair must be >= 1");
    }
    let grid = load_terrain_checked(terrain)?;
    let graph = load_graph_checked(graph_path)?;
    let cfg = load_scenario(scenario)?;
    let blue = resolve_policy(&cfg.blue_policy, &graph, &cfg, Team::Blue)?;
    let red = resolve_policy(&cfg.red_policy, &graph, &cfg, Team::Red)?;

    let mut pairs = Vec::new();
    let mut blue_wins = 0u32;
    let mut red_wins = 0u32;
    let mut transcripts = transcript.then(String::new);
    for rep in 0..episodes_per_pair {
        // Repetition 0 uses the base seed directly, matching a plain
        // single-episode tournament.
        let rep_seed = seed.wrapping_add(rep as u64);
        for bi in 0..cfg.blue_starts.len() {
            for ri in 0..cfg.red_starts.len() {
                let episode_seed = mix_episode_seed(rep_seed, bi as u64, ri as u64);
                let mut episode_log = transcripts.as_ref().map(|_| String::new());
                let result = run_episode(
                    &grid,
                    &graph,
                    &cfg,
                    blue.as_ref(),
                    red.as_ref(),
                    bi,
                    ri,
                    episode_seed,
                    episode_log.as_mut(),
                )
                .with_context(|| format!("episode (blue {bi}, red {ri}, rep {rep})"))?;
                if let (Some(all), Some(log)) = (transcripts.as_mut(), episode_log) {
                    all.push_str(&format!("# episode rep {rep} blue {bi} red {ri}\n"));
                    all.push_str(&log);
                }
                match result.winner {
                    Team::Blue => blue_wins += 1,
                    Team::Red => red_wins += 1,
                }
                pairs.push(PairResult {
                    blue_start: bi,
                    red_start: ri,
                    winner: result.winner,
                    end_reason: result.end_reason,
                    steps: result.steps,
                });
            }
        }
    }
    let table = WinTable {
        blue_policy: blue.name().to_string(),
        red_policy: red.name().to_string(),
        base_seed: seed,
        pairs,
        blue_wins,
        red_wins,
    };
    write_atomic(out, &win_table_to_string(&table))?;
    if let Some(all) = transcripts {
        let mut tpath = out.as_os_str().to_owned();
        tpath.push(".transcript");
        write_atomic(Path::new(&tpath), &all)?;
    }
    println!(
        "{} episodes: blue {} red {} -> {}",
        table.pairs.len(),
        table.blue_wins,
        table.red_wins,
        out.display()
    );
    Ok(())
}

fn elo_report(results: &[PathBuf], k: f64, out: &Path) -> Result<()> {
    let mut elo = EloTable::new(k);
    for path in results {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("results file {}", path.display()))?;
        let table =
            win_table_from_str(&text).with_context(|| format!("results file {}", path.display()))?;
        elo.register(&table.blue_policy);
        elo.register(&table.red_policy);
        for pair in &table.pairs {
            let score = match pair.winner {
                Team::Blue => 1.0,
                Team::Red => 0.0,
            };
            elo.update(&table.blue_policy, &table.red_policy, score)?;
        }
    }
    let mut text = format!("# elo ratings v1\nk {k}\n# policy rating matches\n");
    for (name, entry) in elo.entries() {
        text.push_str(&format!("{} {:.3} {}\n", name, entry.rating, entry.matches));
    }
    write_atomic(out, &text)?;
    print!("{text}");
    Ok(())
}
