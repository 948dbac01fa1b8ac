//! Scripted policies: deterministic stand-ins for trained agents.

use crate::pathfind::{shortest_path, Action, CostMode};
use crate::waygraph::{Direction, WaypointGraph};

use super::{AgentAction, AgentPos, Policy, PolicyDecision, TeamObservation};
use super::rng::StreamRng;

/// Valid waypoint closest to (x, z), ignoring elevation.
fn nearest_node_xz(graph: &WaypointGraph, x: f64, z: f64) -> Option<u32> {
    graph
        .nodes()
        .iter()
        .filter(|n| n.valid)
        .min_by(|a, b| {
            let da = (a.x - x).powi(2) + (a.z - z).powi(2);
            let db = (b.x - x).powi(2) + (b.z - z).powi(2);
            da.partial_cmp(&db).unwrap().then(a.id.cmp(&b.id))
        })
        .map(|n| n.id)
}

/// First move of the shortest path toward `goal`, or stay (flagged) when
/// unreachable.
fn step_toward(graph: &WaypointGraph, from: u32, goal: u32) -> (AgentAction, bool) {
    if from == goal {
        return (AgentAction::Discrete(Action::Stay), false);
    }
    match shortest_path(graph, from, goal, CostMode::Unit) {
        Ok((path, _)) if path.len() >= 2 => {
            let a = graph.node(from).expect("own node");
            let b = graph.node(path[1]).expect("path node");
            match Direction::from_offset(b.i - a.i, b.j - a.j) {
                Some(dir) => (AgentAction::Discrete(Action::Move(dir)), false),
                None => (AgentAction::Discrete(Action::Stay), true),
            }
        }
        _ => (AgentAction::Discrete(Action::Stay), true),
    }
}

fn sign_step(delta: f64) -> i8 {
    if delta > 1e-9 {
        1
    } else if delta < -1e-9 {
        -1
    } else {
        0
    }
}

fn toward_point(pos: &AgentPos, graph: &WaypointGraph, x: f64, z: f64) -> (AgentAction, bool) {
    match *pos {
        AgentPos::Node(id) => match nearest_node_xz(graph, x, z) {
            Some(goal) => step_toward(graph, id, goal),
            None => (AgentAction::Discrete(Action::Stay), true),
        },
        AgentPos::Free { x: ax, z: az } => (
            AgentAction::Continuous {
                dx: sign_step(x - ax),
                dz: sign_step(z - az),
            },
            false,
        ),
    }
}

/// Rushes every agent along the shortest path toward the target point,
/// recomputing each step so blocked routes re-plan automatically.
pub struct GreedyAttacker<'a> {
    graph: &'a WaypointGraph,
    target: (f64, f64),
}

impl<'a> GreedyAttacker<'a> {
    pub fn new(graph: &'a WaypointGraph, target: (f64, f64)) -> Self {
        GreedyAttacker { graph, target }
    }
}

impl Policy for GreedyAttacker<'_> {
    fn name(&self) -> &str {
        "greedy_attacker"
    }

    fn decide(
        &self,
        obs: &TeamObservation,
        _masks: &[[bool; 9]],
        _rng: &mut StreamRng,
    ) -> PolicyDecision {
        let mut fallback = false;
        let actions = obs
            .own
            .iter()
            .map(|agent| {
                let (action, fell) =
                    toward_point(&agent.pos, self.graph, self.target.0, self.target.1);
                fallback |= fell && agent.alive;
                action
            })
            .collect();
        PolicyDecision { actions, fallback }
    }
}

/// Holds assigned posts: agent k walks to post k (mod posts) and stays
/// there. Firing is engine-automatic, so holding position is all the policy
/// does.
pub struct StaticDefender<'a> {
    graph: &'a WaypointGraph,
    posts: Vec<(f64, f64)>,
}

impl<'a> StaticDefender<'a> {
    pub fn new(graph: &'a WaypointGraph, posts: Vec<(f64, f64)>) -> Self {
        StaticDefender { graph, posts }
    }
}

impl Policy for StaticDefender<'_> {
    fn name(&self) -> &str {
        "static_defender"
    }

    fn decide(
        &self,
        obs: &TeamObservation,
        _masks: &[[bool; 9]],
        _rng: &mut StreamRng,
    ) -> PolicyDecision {
        let mut fallback = false;
        let actions = obs
            .own
            .iter()
            .enumerate()
            .map(|(k, agent)| {
                if self.posts.is_empty() {
                    return AgentAction::Discrete(Action::Stay);
                }
                let (px, pz) = self.posts[k % self.posts.len()];
                let (action, fell) = toward_point(&agent.pos, self.graph, px, pz);
                fallback |= fell && agent.alive;
                action
            })
            .collect();
        PolicyDecision { actions, fallback }
    }
}

/// Cycles a waypoint route: an agent standing on route node k moves toward
/// node k+1 (wrapping); off-route agents head for the first route node.
pub struct Patrol<'a> {
    graph: &'a WaypointGraph,
    route: Vec<(f64, f64)>,
}

impl<'a> Patrol<'a> {
    pub fn new(graph: &'a WaypointGraph, route: Vec<(f64, f64)>) -> Self {
        Patrol { graph, route }
    }

    fn route_nodes(&self) -> Vec<u32> {
        self.route
            .iter()
            .filter_map(|&(x, z)| nearest_node_xz(self.graph, x, z))
            .collect()
    }
}

impl Policy for Patrol<'_> {
    fn name(&self) -> &str {
        "patrol"
    }

    fn decide(
        &self,
        obs: &TeamObservation,
        _masks: &[[bool; 9]],
        _rng: &mut StreamRng,
    ) -> PolicyDecision {
        let nodes = self.route_nodes();
        let mut fallback = false;
        let actions = obs
            .own
            .iter()
            .map(|agent| {
                if nodes.is_empty() {
                    fallback |= agent.alive;
                    return match agent.pos {
                        AgentPos::Node(_) => AgentAction::Discrete(Action::Stay),
                        AgentPos::Free { .. } => AgentAction::Continuous { dx: 0, dz: 0 },
                    };
                }
                match agent.pos {
                    AgentPos::Node(id) => {
                        let goal = match nodes.iter().position(|&n| n == id) {
                            Some(k) => nodes[(k + 1) % nodes.len()],
                            None => nodes[0],
                        };
                        let (action, fell) = step_toward(self.graph, id, goal);
                        fallback |= fell && agent.alive;
                        action
                    }
                    AgentPos::Free { x, z } => {
                        let (px, pz) = self.route[obs.step as usize % self.route.len()];
                        AgentAction::Continuous {
                            dx: sign_step(px - x),
                            dz: sign_step(pz - z),
                        }
                    }
                }
            })
            .collect();
        PolicyDecision { actions, fallback }
    }
}

/// Stays put forever; the immobile baseline.
pub struct Hold;

impl Policy for Hold {
    fn name(&self) -> &str {
        "hold"
    }

    fn decide(
        &self,
        obs: &TeamObservation,
        _masks: &[[bool; 9]],
        _rng: &mut StreamRng,
    ) -> PolicyDecision {
        let actions = obs
            .own
            .iter()
            .map(|agent| match agent.pos {
                AgentPos::Node(_) => AgentAction::Discrete(Action::Stay),
                AgentPos::Free { .. } => AgentAction::Continuous { dx: 0, dz: 0 },
            })
            .collect();
        PolicyDecision {
            actions,
            fallback: false,
        }
    }
}
