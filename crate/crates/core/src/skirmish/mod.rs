//! Deterministic multi-agent skirmish simulation with differing objectives:
//! Blue tries to reach a target point, Red defends it. Movement and fire
//! resolve simultaneously each step; every outcome is a pure function of
//! (config, seed, policies).

pub mod elo;
pub mod policies;
pub mod rng;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathfind::{action_mask, apply_action, Action, PathError};
use crate::terrain::{height_at, line_of_sight, TerrainError, TerrainGrid};
use crate::trajectory::nearest_waypoint;
use crate::waygraph::WaypointGraph;
use rng::{mix_episode_seed, StreamRng};

#[derive(Debug, Error)]
pub enum SkirmishError {
    #[error("bad scenario config: {0}")]
    Config(String),
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("policy `{policy}` fault: {message}")]
    PolicyFault { policy: String, message: String },
    #[error("start position {index} for {team:?} team has no valid waypoint or is off terrain")]
    BadStart { team: Team, index: usize },
    #[error("episode for pair (blue {blue_start}, red {red_start}) failed: {source}")]
    Pair {
        blue_start: usize,
        red_start: usize,
        #[source]
        source: Box<SkirmishError>,
    },
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Graph(#[from] crate::waygraph::GraphError),
    #[error(transparent)]
    Traj(#[from] crate::trajectory::TrajError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    Blue,
    Red,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Blue => Team::Red,
            Team::Red => Team::Blue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Team::Blue => "blue",
            Team::Red => "red",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveMode {
    Waypoint,
    Finegrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub blue_starts: Vec<(f64, f64)>,
    pub red_starts: Vec<(f64, f64)>,
    pub team_size: usize,
    /// Blue Target world point (x, z).
    pub target: (f64, f64),
    /// Horizontal radius within which a Blue agent wins.
    pub target_radius: f64,
    /// An agent stays alive while hits_taken <= hit_limit, so hit_limit = 5
    /// means elimination on the 6th hit.
    pub hit_limit: u32,
    pub max_steps: u32,
    pub fire_range: f64,
    /// Aim jitter, radians.
    pub aim_sigma: f64,
    /// Lateral miss tolerance at the target's distance, meters.
    pub target_radius_hit: f64,
    pub move_mode: MoveMode,
    /// Fine-grained movement speed, m/s.
    #[serde(default = "default_agent_speed")]
    pub agent_speed: f64,
    #[serde(default = "default_step_dt")]
    pub step_dt: f64,
    /// Eye height for line-of-sight checks.
    #[serde(default = "default_eye_height")]
    pub eye_height: f64,
    pub rng_seed: u64,
    /// Policy names resolved by the CLI; the library takes `Policy` values.
    #[serde(default = "default_blue_policy")]
    pub blue_policy: String,
    #[serde(default = "default_red_policy")]
    pub red_policy: String,
    /// Optional defender posts / patrol route (x, z); defaults derive from
    /// the start positions.
    #[serde(default)]
    pub defender_posts: Vec<(f64, f64)>,
    #[serde(default)]
    pub patrol_route: Vec<(f64, f64)>,
}

fn default_agent_speed() -> f64 {
    2.0
}
fn default_step_dt() -> f64 {
    0.5
}
fn default_eye_height() -> f64 {
    1.7
}
fn default_blue_policy() -> String {
    "greedy_attacker".to_string()
}
fn default_red_policy() -> String {
    "static_defender".to_string()
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<(), SkirmishError> {
        if self.blue_starts.is_empty() || self.red_starts.is_empty() {
            return Err(SkirmishError::Config(
                "both teams need at least one start position".into(),
            ));
        }
        if self.team_size < 1 {
            return Err(SkirmishError::Config("team_size must be >= 1".into()));
        }
        if self.hit_limit < 1 {
            return Err(SkirmishError::Config("hit_limit must be >= 1".into()));
        }
        if self.max_steps < 1 {
            return Err(SkirmishError::Config("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn load_scenario(path: &std::path::Path) -> Result<ScenarioConfig, SkirmishError> {
    let text = std::fs::read_to_string(path).map_err(|source| SkirmishError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| SkirmishError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    cfg.check()?;
    Ok(cfg)
}

/// Agent position: a graph node in waypoint mode, free (x, z) otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentPos {
    Node(u32),
    Free { x: f64, z: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub team: Team,
    pub pos: AgentPos,
    pub hits_taken: u32,
    pub hits_dealt: u32,
    pub alive: bool,
}

/// One agent's action for a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentAction {
    /// Waypoint mode: one of the 9 discrete actions.
    Discrete(Action),
    /// Fine-grained mode: movement sign along X and Z, each in {-1, 0, 1},
    /// scaled by agent_speed * step_dt.
    Continuous { dx: i8, dz: i8 },
}

#[derive(Debug, Clone)]
pub struct PolicyDecision {
    /// One action per own agent, aligned with the observation order. Entries
    /// for dead agents are ignored.
    pub actions: Vec<AgentAction>,
    /// Set when the policy could not pursue its objective and substituted
    /// stay (e.g. unreachable target); surfaced in the MatchResult.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct OwnAgentObs {
    pub index: usize,
    pub pos: AgentPos,
    pub x: f64,
    pub z: f64,
    pub hits_taken: u32,
    pub alive: bool,
}

#[derive(Debug, Clone)]
pub struct EnemyObs {
    pub index: usize,
    pub x: f64,
    pub z: f64,
    pub hits_taken: u32,
}

/// What one team senses each step: full own-team state plus summaries of
/// enemies visible to at least one living teammate.
#[derive(Debug, Clone)]
pub struct TeamObservation {
    pub team: Team,
    pub step: u32,
    pub target: (f64, f64),
    pub own: Vec<OwnAgentObs>,
    pub visible_enemies: Vec<EnemyObs>,
}

/// A pluggable per-team decision function. Must return one action per own
/// agent each step; stateless across steps (any memory must be derivable
/// from the observation and step index).
pub trait Policy {
    fn name(&self) -> &str;
    fn decide(
        &self,
        obs: &TeamObservation,
        masks: &[[bool; 9]],
        rng: &mut StreamRng,
    ) -> PolicyDecision;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    TargetReached,
    BlueEliminated,
    Timeout,
}

impl EndReason {
    pub fn name(self) -> &'static str {
        match self {
            EndReason::TargetReached => "target_reached",
            EndReason::BlueEliminated => "blue_eliminated",
            EndReason::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub team: Team,
    pub hits_dealt: u32,
    pub hits_taken: u32,
    pub alive_at_end: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub winner: Team,
    pub end_reason: EndReason,
    pub steps: u32,
    pub agents: Vec<AgentSummary>,
    pub blue_start: usize,
    pub red_start: usize,
    pub blue_fallbacks: u32,
    pub red_fallbacks: u32,
}

/// Jittered shot resolution: draw an angular error from Normal(0, aim_sigma)
/// and hit iff the lateral miss distance at the target range stays within
/// `target_radius_hit`. Range and line-of-sight gating is the caller's job.
pub fn resolve_shot(
    rng: &mut StreamRng,
    distance: f64,
    aim_sigma: f64,
    target_radius_hit: f64,
) -> bool {
    let theta = rng.normal(aim_sigma);
    distance * theta.tan().abs() <= target_radius_hit
}

struct Engine<'a> {
    terrain: &'a TerrainGrid,
    graph: &'a WaypointGraph,
    cfg: &'a ScenarioConfig,
    agents: Vec<AgentState>,
}

impl<'a> Engine<'a> {
    fn world_pos(&self, agent: &AgentState) -> (f64, f64) {
        match agent.pos {
            AgentPos::Node(id) => {
                let (x, _, z) = self.graph.position(id);
                (x, z)
            }
            AgentPos::Free { x, z } => (x, z),
        }
    }

    fn distance_3d(&self, a: &AgentState, b: &AgentState) -> f64 {
        let (ax, az) = self.world_pos(a);
        let (bx, bz) = self.world_pos(b);
        let ay = height_at(self.terrain, ax, az).unwrap_or(0.0);
        let by = height_at(self.terrain, bx, bz).unwrap_or(0.0);
        ((bx - ax).powi(2) + (by - ay).powi(2) + (bz - az).powi(2)).sqrt()
    }

    fn can_see(&self, a: &AgentState, b: &AgentState) -> bool {
        let (ax, az) = self.world_pos(a);
        let (bx, bz) = self.world_pos(b);
        line_of_sight(self.terrain, ax, az, bx, bz, self.cfg.eye_height).unwrap_or(false)
    }

    fn observation(&self, team: Team, step: u32) -> TeamObservation {
        let mut own = Vec::new();
        let mut visible_enemies = Vec::new();
        for (index, agent) in self.agents.iter().enumerate() {
            if agent.team == team {
                let (x, z) = self.world_pos(agent);
                own.push(OwnAgentObs {
                    index,
                    pos: agent.pos,
                    x,
                    z,
                    hits_taken: agent.hits_taken,
                    alive: agent.alive,
                });
            }
        }
        for (index, enemy) in self.agents.iter().enumerate() {
            if enemy.team == team || !enemy.alive {
                continue;
            }
            let seen = self
                .agents
                .iter()
                .any(|a| a.team == team && a.alive && self.can_see(a, enemy));
            if seen {
                let (x, z) = self.world_pos(enemy);
                visible_enemies.push(EnemyObs {
                    index,
                    x,
                    z,
                    hits_taken: enemy.hits_taken,
                });
            }
        }
        TeamObservation {
            team,
            step,
            target: self.cfg.target,
            own,
            visible_enemies,
        }
    }

    fn masks_for(&self, team: Team) -> Vec<[bool; 9]> {
        self.agents
            .iter()
            .filter(|a| a.team == team)
            .map(|a| match (self.cfg.move_mode, a.pos) {
                (MoveMode::Waypoint, AgentPos::Node(id)) => {
                    action_mask(self.graph, id).unwrap_or_else(|_| {
                        let mut m = [false; 9];
                        m[0] = true;
                        m
                    })
                }
                _ => [true; 9],
            })
            .collect()
    }

    /// Apply one team's decided actions to pre-step positions. Masked or
    /// illegal waypoint actions become stay (lenient at the game layer).
    fn moved_position(&self, agent: &AgentState, action: AgentAction) -> AgentPos {
        match (self.cfg.move_mode, agent.pos, action) {
            (MoveMode::Waypoint, AgentPos::Node(id), AgentAction::Discrete(a)) => {
                match apply_action(self.graph, id, a) {
                    Ok(next) => AgentPos::Node(next),
                    Err(_) => AgentPos::Node(id),
                }
            }
            (MoveMode::Finegrained, AgentPos::Free { x, z }, AgentAction::Continuous { dx, dz }) => {
                let step = self.cfg.agent_speed * self.cfg.step_dt;
                let nx = x + dx.clamp(-1, 1) as f64 * step;
                let nz = z + dz.clamp(-1, 1) as f64 * step;
                if self.terrain.in_extent(nx, nz) {
                    AgentPos::Free { x: nx, z: nz }
                } else {
                    AgentPos::Free { x, z }
                }
            }
            // Mismatched action kind for the mode: treated as malformed by
            // the caller before we get here; stay as a safety net.
            (_, pos, _) => pos,
        }
    }
}

fn validate_decision(
    policy_name: &str,
    decision: &PolicyDecision,
    expected: usize,
    mode: MoveMode,
) -> Result<(), SkirmishError> {
    if decision.actions.len() != expected {
        return Err(SkirmishError::PolicyFault {
            policy: policy_name.to_string(),
            message: format!(
                "returned {} actions for {} agents",
                decision.actions.len(),
                expected
            ),
        });
    }
    for (k, a) in decision.actions.iter().enumerate() {
        let ok = matches!(
            (mode, a),
            (MoveMode::Waypoint, AgentAction::Discrete(_))
                | (MoveMode::Finegrained, AgentAction::Continuous { .. })
        );
        if !ok {
            return Err(SkirmishError::PolicyFault {
                policy: policy_name.to_string(),
                message: format!("action {k} does not match move mode {mode:?}"),
            });
        }
    }
    Ok(())
}

/// Run one episode with the given start-position pair. Deterministic in
/// (terrain, graph, cfg, policies, episode_seed).
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    terrain: &TerrainGrid,
    graph: &WaypointGraph,
    cfg: &ScenarioConfig,
    blue: &dyn Policy,
    red: &dyn Policy,
    blue_start: usize,
    red_start: usize,
    episode_seed: u64,
    mut transcript: Option<&mut String>,
) -> Result<MatchResult, SkirmishError> {
    cfg.check()?;
    let root = StreamRng::from_seed(episode_seed);
    let mut agents = Vec::with_capacity(cfg.team_size * 2);
    for (team, starts, idx) in [
        (Team::Blue, &cfg.blue_starts, blue_start),
        (Team::Red, &cfg.red_starts, red_start),
    ] {
        let &(x, z) = starts
            .get(idx)
            .ok_or(SkirmishError::BadStart { team, index: idx })?;
        if !terrain.in_extent(x, z) {
            return Err(SkirmishError::BadStart { team, index: idx });
        }
        let pos = match cfg.move_mode {
            MoveMode::Waypoint => {
                let y = height_at(terrain, x, z)?;
                let node = nearest_waypoint(graph, x, y, z)
                    .map_err(|_| SkirmishError::BadStart { team, index: idx })?;
                AgentPos::Node(node)
            }
            MoveMode::Finegrained => AgentPos::Free { x, z },
        };
        for _ in 0..cfg.team_size {
            agents.push(AgentState {
                team,
                pos,
                hits_taken: 0,
                hits_dealt: 0,
                alive: true,
            });
        }
    }
    let mut engine = Engine {
        terrain,
        graph,
        cfg,
        agents,
    };
    let mut blue_fallbacks = 0u32;
    let mut red_fallbacks = 0u32;

    for step in 1..=cfg.max_steps {
        let step_rng = root.substream(step as u64);

        // 1. Both policies decide from pre-step observations.
        let mut decisions: Vec<PolicyDecision> = Vec::with_capacity(2);
        for (team, policy, tag) in [(Team::Blue, blue, 0u64), (Team::Red, red, 1u64)] {
            let obs = engine.observation(team, step);
            let masks = engine.masks_for(team);
            let mut rng = step_rng.substream(100 + tag);
            let decision = policy.decide(&obs, &masks, &mut rng);
            validate_decision(policy.name(), &decision, cfg.team_size, cfg.move_mode)?;
            if decision.fallback {
                match team {
                    Team::Blue => blue_fallbacks += 1,
                    Team::Red => red_fallbacks += 1,
                }
            }
            decisions.push(decision);
        }

        // 2. Simultaneous movement from pre-step positions.
        let mut new_positions: Vec<AgentPos> =
            engine.agents.iter().map(|a| a.pos).collect();
        for (team_idx, team) in [Team::Blue, Team::Red].into_iter().enumerate() {
            let mut member = 0usize;
            for (idx, agent) in engine.agents.iter().enumerate() {
                if agent.team != team {
                    continue;
                }
                if agent.alive {
                    let action = decisions[team_idx].actions[member];
                    new_positions[idx] = engine.moved_position(agent, action);
                }
                member += 1;
            }
        }
        for (agent, pos) in engine.agents.iter_mut().zip(new_positions) {
            agent.pos = pos;
        }

        // 3. Simultaneous fire: nearest living visible enemy within range;
        // ties by lowest agent index. Hits land after all draws.
        let mut pending_hits: Vec<(usize, usize)> = Vec::new();
        for shooter_idx in 0..engine.agents.len() {
            if !engine.agents[shooter_idx].alive {
                continue;
            }
            let shooter_team = engine.agents[shooter_idx].team;
            let mut target: Option<(f64, usize)> = None;
            for enemy_idx in 0..engine.agents.len() {
                let enemy = &engine.agents[enemy_idx];
                if enemy.team == shooter_team || !enemy.alive {
                    continue;
                }
                let d = engine.distance_3d(&engine.agents[shooter_idx], enemy);
                if d > cfg.fire_range {
                    continue;
                }
                if !engine.can_see(&engine.agents[shooter_idx], enemy) {
                    continue;
                }
                if target.map(|(bd, _)| d < bd).unwrap_or(true) {
                    target = Some((d, enemy_idx));
                }
            }
            if let Some((distance, enemy_idx)) = target {
                let mut shot_rng = step_rng.substream(200 + shooter_idx as u64);
                if resolve_shot(&mut shot_rng, distance, cfg.aim_sigma, cfg.target_radius_hit) {
                    pending_hits.push((shooter_idx, enemy_idx));
                }
            }
        }
        for &(shooter, victim) in &pending_hits {
            engine.agents[shooter].hits_dealt += 1;
            engine.agents[victim].hits_taken += 1;
        }
        for agent in &mut engine.agents {
            agent.alive = agent.hits_taken <= cfg.hit_limit;
        }

        if let Some(t) = transcript.as_deref_mut() {
            t.push_str(&format!("step {step}"));
            for (idx, a) in engine.agents.iter().enumerate() {
                let (x, z) = engine.world_pos(a);
                t.push_str(&format!(
                    " | {}{idx} ({x:.3},{z:.3}) hits={} alive={}",
                    a.team.name(),
                    a.hits_taken,
                    a.alive
                ));
            }
            for &(s, v) in &pending_hits {
                t.push_str(&format!(" | hit {s}->{v}"));
            }
            t.push('\n');
        }

        // 4. Termination, in order: target reached, blue wiped, timeout.
        let blue_reached = engine.agents.iter().any(|a| {
            if a.team != Team::Blue || !a.alive {
                return false;
            }
            let (x, z) = engine.world_pos(a);
            let (tx, tz) = cfg.target;
            ((x - tx).powi(2) + (z - tz).powi(2)).sqrt() <= cfg.target_radius
        });
        let finish = |winner, end_reason, steps, engine: &Engine| MatchResult {
            winner,
            end_reason,
            steps,
            agents: engine
                .agents
                .iter()
                .map(|a| AgentSummary {
                    team: a.team,
                    hits_dealt: a.hits_dealt,
                    hits_taken: a.hits_taken,
                    alive_at_end: a.alive,
                })
                .collect(),
            blue_start,
            red_start,
            blue_fallbacks,
            red_fallbacks,
        };
        if blue_reached {
            return Ok(finish(Team::Blue, EndReason::TargetReached, step, &engine));
        }
        if engine
            .agents
            .iter()
            .filter(|a| a.team == Team::Blue)
            .all(|a| !a.alive)
        {
            return Ok(finish(Team::Red, EndReason::BlueEliminated, step, &engine));
        }
        if step == cfg.max_steps {
            return Ok(finish(Team::Red, EndReason::Timeout, step, &engine));
        }
    }
    unreachable!("loop always terminates via the timeout branch");
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub blue_start: usize,
    pub red_start: usize,
    pub winner: Team,
    pub end_reason: EndReason,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinTable {
    pub blue_policy: String,
    pub red_policy: String,
    pub base_seed: u64,
    pub pairs: Vec<PairResult>,
    pub blue_wins: u32,
    pub red_wins: u32,
}

/// One episode per (blue start, red start) combination. Episode seeds mix
/// the base seed with the pair indices, so results are order-independent.
pub fn tournament(
    terrain: &TerrainGrid,
    graph: &WaypointGraph,
    cfg: &ScenarioConfig,
    blue: &dyn Policy,
    red: &dyn Policy,
    base_seed: u64,
) -> Result<WinTable, SkirmishError> {
    cfg.check()?;
    let mut pairs = Vec::with_capacity(cfg.blue_starts.len() * cfg.red_starts.len());
    let mut blue_wins = 0u32;
    let mut red_wins = 0u32;
    for bi in 0..cfg.blue_starts.len() {
        for ri in 0..cfg.red_starts.len() {
            let seed = mix_episode_seed(base_seed, bi as u64, ri as u64);
            let result = run_episode(terrain, graph, cfg, blue, red, bi, ri, seed, None)
                .map_err(|e| SkirmishError::Pair {
                    blue_start: bi,
                    red_start: ri,
                    source: Box::new(e),
                })?;
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
    Ok(WinTable {
        blue_policy: blue.name().to_string(),
        red_policy: red.name().to_string(),
        base_seed,
        pairs,
        blue_wins,
        red_wins,
    })
}

/// Deterministic text serialization of a win table: per-pair rows plus
/// totals.
pub fn win_table_to_string(table: &WinTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# skirmish results v1\nblue_policy {}\nred_policy {}\nbase_seed {}\n",
        table.blue_policy, table.red_policy, table.base_seed
    ));
    out.push_str("# blue_start red_start winner end_reason steps\n");
    for p in &table.pairs {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            p.blue_start,
            p.red_start,
            p.winner.name(),
            p.end_reason.name(),
            p.steps
        ));
    }
    out.push_str(&format!(
        "totals blue {} red {}\n",
        table.blue_wins, table.red_wins
    ));
    out
}

/// Parse the win table text format (for elo-report aggregation).
pub fn win_table_from_str(text: &str) -> Result<WinTable, SkirmishError> {
    let bad = |m: &str| SkirmishError::Parse {
        path: "<results>".to_string(),
        message: m.to_string(),
    };
    let mut blue_policy = None;
    let mut red_policy = None;
    let mut base_seed = 0u64;
    let mut pairs = Vec::new();
    let mut blue_wins = 0u32;
    let mut red_wins = 0u32;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["blue_policy", name] => blue_policy = Some(name.to_string()),
            ["red_policy", name] => red_policy = Some(name.to_string()),
            ["base_seed", seed] => {
                base_seed = seed.parse().map_err(|_| bad("bad base_seed"))?;
            }
            ["totals", "blue", b, "red", r] => {
                blue_wins = b.parse().map_err(|_| bad("bad totals"))?;
                red_wins = r.parse().map_err(|_| bad("bad totals"))?;
            }
            [bs, rs, winner, reason, steps] => {
                let winner = match *winner {
                    "blue" => Team::Blue,
                    "red" => Team::Red,
                    other => return Err(bad(&format!("unknown winner `{other}`"))),
                };
                let end_reason = match *reason {
                    "target_reached" => EndReason::TargetReached,
                    "blue_eliminated" => EndReason::BlueEliminated,
                    "timeout" => EndReason::Timeout,
                    other => return Err(bad(&format!("unknown end reason `{other}`"))),
                };
                pairs.push(PairResult {
                    blue_start: bs.parse().map_err(|_| bad("bad pair row"))?,
                    red_start: rs.parse().map_err(|_| bad("bad pair row"))?,
                    winner,
                    end_reason,
                    steps: steps.parse().map_err(|_| bad("bad pair row"))?,
                });
            }
            _ => return Err(bad(&format!("unrecognized line `{line}`"))),
        }
    }
    Ok(WinTable {
        blue_policy: blue_policy.ok_or_else(|| bad("missing blue_policy"))?,
        red_policy: red_policy.ok_or_else(|| bad("missing red_policy"))?,
        base_seed,
        pairs,
        blue_wins,
        red_wins,
    })
}
