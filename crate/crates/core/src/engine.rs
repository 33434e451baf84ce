//! Synchronous simulation loop.
//!
//! Each step freezes a snapshot of every agent, lets every unfinished agent
//! decide on a velocity from that snapshot alone, then commits all moves at
//! once. Decisions are independent of evaluation order, so the decision
//! phase can be fanned out through an [`Executor`] without changing the
//! result.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cell::{
    build_cell, neighbor_cutoff, AgentId, AgentSnapshot, LacError, LacParams, OVERLAP_SLACK,
};
use crate::geom::Vec2;
use crate::policy::{
    bvc_select, learn_step, select_index, LearnParams, LearnerState, PenaltyParams, PolicyKind,
};
use crate::scenario::{Scenario, ScenarioError, ScenarioKind, ScenarioSpec};
use crate::spatial::KdTree;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("step {step}: agents {a} and {b} overlap (center distance {distance}, minimum {min_distance})")]
    Overlap {
        step: u64,
        a: AgentId,
        b: AgentId,
        distance: f64,
        min_distance: f64,
    },
    #[error("step {step}: {source}")]
    Decision { step: u64, source: LacError },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub lac: LacParams,
    pub penalty: PenaltyParams,
    pub learn: LearnParams,
    pub policy: PolicyKind,
    /// Distance to the target (world units) at which an agent counts as arrived.
    pub arrival_tol: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lac: LacParams::default(),
            penalty: PenaltyParams::default(),
            learn: LearnParams::default(),
            policy: PolicyKind::LacNav,
            arrival_tol: 1e-6,
            max_steps: 60_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Default mixing factor for LAC-Learn per benchmark layout.
    pub fn gamma_for(kind: ScenarioKind) -> f64 {
        match kind {
            ScenarioKind::Crowd => 0.95,
            _ => 0.75,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field: &str, reason: &str| SimError::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        };
        if let Err(LacError::InvalidParam { field, reason }) = self.lac.validate() {
            return Err(bad(&format!("lac.{field}"), reason));
        }
        self.penalty.validate().map_err(|reason| bad("penalty.zeta", reason))?;
        self.learn
            .validate(self.lac.n_actions)
            .map_err(|(field, reason)| bad(&format!("learn.{field}"), reason))?;
        if !(self.arrival_tol.is_finite() && self.arrival_tol > 0.0) {
            return Err(bad("arrival_tol", "must be finite and > 0"));
        }
        if self.max_steps == 0 {
            return Err(bad("max_steps", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: AgentId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub target: Vec2,
    pub arrived: bool,
    /// Present only under LAC-Learn.
    pub learner: Option<LearnerState>,
    pub trajectory_length: f64,
    pub arrival_step: Option<u64>,
}

/// One agent's row in a [`StepRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: AgentId,
    /// Position after the step.
    pub position: Vec2,
    /// Velocity the agent moved at during the step.
    pub velocity: Vec2,
    pub action: Option<usize>,
}

/// State of every agent after one step, in ascending id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub agents: Vec<AgentRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    StepCap,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::StepCap => "step_cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub delta: f64,
    pub r: f64,
    pub v_max: f64,
    pub arrival_tol: f64,
    pub seed: u64,
    pub policy: PolicyKind,
    pub scenario: ScenarioKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: AgentId,
    pub group: u32,
    pub start: Vec2,
    pub target: Vec2,
    pub arrival_step: Option<u64>,
    pub path_length: f64,
}

/// Everything a run produced. `steps[0]` holds the initial state when the
/// run was recorded; summary-only runs leave `steps` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub meta: TraceMeta,
    pub agents: Vec<AgentInfo>,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
}

/// Runs a closure over every agent, possibly in parallel. Implementations
/// must return results in agent order.
pub trait Executor {
    fn map_agents<T, F>(&self, agents: &mut [AgentState], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut AgentState) -> T + Sync + Send;
}

/// Evaluates agents one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_agents<T, F>(&self, agents: &mut [AgentState], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut AgentState) -> T + Sync + Send,
    {
        agents.iter_mut().map(f).collect()
    }
}

/// Every agent other than `index` whose center lies within `radius`
/// (closed ball), in ascending id order.
pub fn neighbor_query(
    snapshot: &[AgentSnapshot],
    tree: &KdTree,
    index: usize,
    radius: f64,
) -> Vec<AgentSnapshot> {
    tree.within(snapshot[index].position, radius)
        .into_iter()
        .filter(|&j| j != index)
        .map(|j| snapshot[j])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Decision {
    velocity: Vec2,
    action: Option<usize>,
}

struct DecisionContext<'a> {
    snapshot: &'a [AgentSnapshot],
    tree: &'a KdTree,
    config: &'a SimConfig,
    cutoff: f64,
}

impl DecisionContext<'_> {
    fn decide(&self, agent: &mut AgentState) -> Result<Option<Decision>, LacError> {
        if agent.arrived {
            return Ok(None);
        }
        let index = agent.id as usize;
        let me = &self.snapshot[index];
        let neighbors = neighbor_query(self.snapshot, self.tree, index, self.cutoff);
        let cfg = self.config;
        let decision = match cfg.policy {
            PolicyKind::LacNav => {
                let cell = build_cell(me, agent.target, &neighbors, &cfg.lac)?;
                let k = select_index(&cell, &cfg.penalty);
                Decision {
                    velocity: cell.actions[k],
                    action: Some(k),
                }
            }
            PolicyKind::LacLearn => {
                let cell = build_cell(me, agent.target, &neighbors, &cfg.lac)?;
                let learner = agent.learner.get_or_insert_with(|| {
                    LearnerState::new(cfg.lac.n_actions, cfg.seed, u64::from(agent.id))
                });
                let (velocity, k) = learn_step(learner, &cell, &cfg.learn, &cfg.penalty);
                Decision {
                    velocity,
                    action: Some(k),
                }
            }
            PolicyKind::Bvc => Decision {
                velocity: bvc_select(me, agent.target, &neighbors, &cfg.lac)?,
                action: None,
            },
        };
        Ok(Some(decision))
    }
}

/// First pair closer than `2r - OVERLAP_SLACK`, as `(a, b, distance)`.
fn first_overlap(positions: &[Vec2], r: f64) -> Option<(usize, usize, f64)> {
    let limit = 2.0 * r - OVERLAP_SLACK;
    let tree = KdTree::new(positions.to_vec());
    positions.iter().enumerate().find_map(|(i, &p)| {
        tree.within(p, limit)
            .into_iter()
            .filter(|&j| j > i)
            .map(|j| (i, j, p.distance(positions[j])))
            .find(|&(_, _, d)| d < limit)
    })
}

/// A world of agents advancing in lockstep.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    agents: Vec<AgentState>,
    groups: Vec<u32>,
    starts: Vec<Vec2>,
    kind: ScenarioKind,
    step: u64,
    cutoff: f64,
}

impl Simulation {
    pub fn new(config: SimConfig, scenario: &Scenario) -> Result<Self, SimError> {
        config.validate()?;
        let starts: Vec<Vec2> = scenario.agents.iter().map(|e| e.start).collect();
        if let Some((a, b, distance)) = first_overlap(&starts, config.lac.r) {
            return Err(SimError::Overlap {
                step: 0,
                a: a as AgentId,
                b: b as AgentId,
                distance,
                min_distance: 2.0 * config.lac.r,
            });
        }
        let agents = scenario
            .agents
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let arrived = e.start.distance(e.target) <= config.arrival_tol;
                AgentState {
                    id: i as AgentId,
                    position: e.start,
                    velocity: Vec2::ZERO,
                    target: e.target,
                    arrived,
                    learner: None,
                    trajectory_length: 0.0,
                    arrival_step: arrived.then_some(0),
                }
            })
            .collect();
        Ok(Simulation {
            cutoff: neighbor_cutoff(&config.lac),
            config,
            agents,
            groups: scenario.groups.clone(),
            starts,
            kind: scenario.kind,
            step: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    /// Number of steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn all_arrived(&self) -> bool {
        self.agents.iter().all(|a| a.arrived)
    }

    pub fn snapshot(&self) -> Vec<AgentSnapshot> {
        self.agents
            .iter()
            .map(|a| AgentSnapshot {
                id: a.id,
                position: a.position,
                velocity: a.velocity,
                radius: self.config.lac.r,
            })
            .collect()
    }

    /// The current state as a step record (used for step 0).
    pub fn record(&self) -> StepRecord {
        StepRecord {
            step: self.step,
            agents: self
                .agents
                .iter()
                .map(|a| AgentRecord {
                    id: a.id,
                    position: a.position,
                    velocity: a.velocity,
                    action: None,
                })
                .collect(),
        }
    }

    pub fn step(&mut self) -> Result<StepRecord, SimError> {
        self.step_with(&Sequential)
    }

    pub fn step_with<E: Executor>(&mut self, exec: &E) -> Result<StepRecord, SimError> {
        let step = self.step + 1;
        let snapshot = self.snapshot();
        let tree = KdTree::new(snapshot.iter().map(|s| s.position).collect());
        let ctx = DecisionContext {
            snapshot: &snapshot,
            tree: &tree,
            config: &self.config,
            cutoff: self.cutoff,
        };
        let decisions = exec.map_agents(&mut self.agents, |agent| ctx.decide(agent));

        let delta = self.config.lac.delta;
        let mut records = Vec::with_capacity(self.agents.len());
        for (agent, decision) in self.agents.iter_mut().zip(decisions) {
            let decision = decision.map_err(|source| SimError::Decision { step, source })?;
            let Some(Decision { velocity, action }) = decision else {
                records.push(AgentRecord {
                    id: agent.id,
                    position: agent.position,
                    velocity: Vec2::ZERO,
                    action: None,
                });
                continue;
            };
            let old = agent.position;
            agent.position = old + velocity * delta;
            agent.velocity = velocity;
            agent.trajectory_length += agent.position.distance(old);
            if agent.position.distance(agent.target) <= self.config.arrival_tol {
                agent.arrived = true;
                agent.arrival_step = Some(step);
                agent.velocity = Vec2::ZERO;
            }
            records.push(AgentRecord {
                id: agent.id,
                position: agent.position,
                velocity,
                action,
            });
        }
        self.step = step;

        let positions: Vec<Vec2> = self.agents.iter().map(|a| a.position).collect();
        if let Some((a, b, distance)) = first_overlap(&positions, self.config.lac.r) {
            return Err(SimError::Overlap {
                step,
                a: a as AgentId,
                b: b as AgentId,
                distance,
                min_distance: 2.0 * self.config.lac.r,
            });
        }
        Ok(StepRecord {
            step,
            agents: records,
        })
    }

    /// Summary of every agent so far.
    pub fn agent_info(&self) -> Vec<AgentInfo> {
        self.agents
            .iter()
            .map(|a| AgentInfo {
                id: a.id,
                group: self.groups.get(a.id as usize).copied().unwrap_or(0),
                start: self.starts[a.id as usize],
                target: a.target,
                arrival_step: a.arrival_step,
                path_length: a.trajectory_length,
            })
            .collect()
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            delta: self.config.lac.delta,
            r: self.config.lac.r,
            v_max: self.config.lac.v_max,
            arrival_tol: self.config.arrival_tol,
            seed: self.config.seed,
            policy: self.config.policy,
            scenario: self.kind,
        }
    }
}

/// Whether a run keeps every step or only the per-agent summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    Full,
    Summary,
}

pub fn run(config: &SimConfig, scenario: &ScenarioSpec) -> Result<SimTrace, SimError> {
    run_with(config, scenario, &Sequential, Recording::Full)
}

/// Steps until every agent has arrived or `max_steps` is reached.
pub fn run_with<E: Executor>(
    config: &SimConfig,
    scenario: &ScenarioSpec,
    exec: &E,
    recording: Recording,
) -> Result<SimTrace, SimError> {
    config.validate()?;
    let layout = scenario.generate(config.lac.r)?;
    let mut sim = Simulation::new(*config, &layout)?;
    let mut steps = Vec::new();
    if recording == Recording::Full {
        steps.push(sim.record());
    }
    while !sim.all_arrived() && sim.step_count() < config.max_steps {
        let rec = sim.step_with(exec)?;
        if recording == Recording::Full {
            steps.push(rec);
        }
    }
    let termination = if sim.all_arrived() {
        Termination::Completed
    } else {
        Termination::StepCap
    };
    Ok(SimTrace {
        meta: sim.meta(),
        agents: sim.agent_info(),
        steps,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Endpoints;

    fn custom(pairs: &[((f64, f64), (f64, f64))]) -> Scenario {
        Scenario {
            kind: ScenarioKind::Custom,
            agents: pairs
                .iter()
                .map(|&((sx, sy), (tx, ty))| Endpoints {
                    start: Vec2::new(sx, sy),
                    target: Vec2::new(tx, ty),
                })
                .collect(),
            groups: (0..pairs.len() as u32).collect(),
        }
    }

    #[test]
    fn lone_agent_moves_full_speed_then_lands() {
        for policy in PolicyKind::ALL {
            let cfg = SimConfig { policy, ..Default::default() };
            let mut sim = Simulation::new(cfg, &custom(&[((0.0, 0.0), (0.8, 0.0))])).unwrap();
            let rec = sim.step().unwrap();
            assert!((rec.agents[0].position - Vec2::new(0.5, 0.0)).norm() < 1e-12, "{policy}");
            assert!(!sim.all_arrived());
            let rec = sim.step().unwrap();
            assert!((rec.agents[0].position - Vec2::new(0.8, 0.0)).norm() < 1e-12);
            assert!(sim.all_arrived());
            assert_eq!(sim.agents()[0].arrival_step, Some(2));
            assert_eq!(sim.agents()[0].velocity, Vec2::ZERO);
        }
    }

    #[test]
    fn touching_agents_cannot_push_through() {
        for policy in PolicyKind::ALL {
            let cfg = SimConfig { policy, ..Default::default() };
            let mut sim =
                Simulation::new(cfg, &custom(&[((0.0, 0.0), (100.0, 0.0)), ((20.0, 0.0), (-80.0, 0.0))]))
                    .unwrap();
            for _ in 0..50 {
                let rec = sim.step().unwrap();
                let d = rec.agents[0].position.distance(rec.agents[1].position);
                assert!(d >= 20.0 - OVERLAP_SLACK, "{policy}: {d}");
            }
        }
    }

    #[test]
    fn touching_agents_have_zero_length_toward_action() {
        let cfg = SimConfig::default();
        let sim = Simulation::new(cfg, &custom(&[((0.0, 0.0), (100.0, 0.0)), ((20.0, 0.0), (-80.0, 0.0))]))
            .unwrap();
        let snap = sim.snapshot();
        let cell = build_cell(&snap[0], Vec2::new(100.0, 0.0), &snap[1..], &cfg.lac).unwrap();
        assert_eq!(cell.actions[0].norm(), 0.0);
    }

    #[test]
    fn arrived_agents_are_absorbing_obstacles() {
        let cfg = SimConfig::default();
        let mut sim = Simulation::new(
            cfg,
            &custom(&[((0.0, 0.0), (0.2, 0.0)), ((-100.0, 30.0), (100.0, 30.0))]),
        )
        .unwrap();
        sim.step().unwrap();
        assert!(sim.agents()[0].arrived);
        let parked = sim.agents()[0].position;
        for _ in 0..600 {
            if sim.all_arrived() {
                break;
            }
            let rec = sim.step().unwrap();
            assert_eq!(rec.agents[0].position, parked);
            assert_eq!(rec.agents[0].velocity, Vec2::ZERO);
            assert_eq!(rec.agents[0].action, None);
        }
        assert!(sim.all_arrived());
    }

    #[test]
    fn straight_run_takes_distance_over_speed() {
        let spec = ScenarioSpec::custom(alloc::vec![Endpoints {
            start: Vec2::ZERO,
            target: Vec2::new(500.0, 0.0),
        }]);
        let trace = run(&SimConfig::default(), &spec).unwrap();
        assert_eq!(trace.termination, Termination::Completed);
        assert_eq!(trace.agents[0].arrival_step, Some(1000));
        assert_eq!(trace.steps.len(), 1001);
        assert_eq!(trace.steps[0].step, 0);
    }

    #[test]
    fn tiny_cap_hits_step_cap() {
        let cfg = SimConfig { max_steps: 1, ..Default::default() };
        let trace = run(&cfg, &ScenarioSpec::circle(4, 10.0)).unwrap();
        assert_eq!(trace.termination, Termination::StepCap);
        assert!(trace.agents.iter().all(|a| a.arrival_step.is_none()));
    }

    #[test]
    fn completed_runs_set_every_arrival() {
        for policy in PolicyKind::ALL {
            let cfg = SimConfig { policy, ..Default::default() };
            let trace = run(&cfg, &ScenarioSpec::reflection(1, 10.0)).unwrap();
            assert_eq!(trace.termination, Termination::Completed, "{policy}");
            assert!(trace.agents.iter().all(|a| a.arrival_step.is_some()));
        }
    }

    #[test]
    fn start_at_target_arrives_at_step_zero() {
        let trace = run(
            &SimConfig::default(),
            &ScenarioSpec::custom(alloc::vec![Endpoints { start: Vec2::ZERO, target: Vec2::ZERO }]),
        )
        .unwrap();
        assert_eq!(trace.agents[0].arrival_step, Some(0));
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn overlapping_starts_are_rejected() {
        let err = Simulation::new(SimConfig::default(), &custom(&[((0.0, 0.0), (1.0, 0.0)), ((5.0, 0.0), (9.0, 0.0))]))
            .unwrap_err();
        assert!(matches!(err, SimError::Overlap { step: 0, a: 0, b: 1, .. }));
    }

    #[test]
    fn invalid_config_names_the_field() {
        let mut cfg = SimConfig::default();
        cfg.lac.lambda = 1.5;
        match cfg.validate() {
            Err(SimError::InvalidConfig { field, .. }) => assert_eq!(field, "lac.lambda"),
            other => panic!("{other:?}"),
        }
        cfg.lac.lambda = 0.5;
        cfg.learn.window = 4;
        assert!(matches!(cfg.validate(), Err(SimError::InvalidConfig { field, .. }) if field == "learn.window"));
    }

    #[test]
    fn neighbor_query_matches_brute_force() {
        let pts = [(0.0, 0.0), (10.0, 21.0), (-22.0, 0.0), (0.0, 25.0), (25.1, 0.0), (40.0, 40.0)];
        let snapshot: Vec<AgentSnapshot> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| AgentSnapshot {
                id: i as AgentId,
                position: Vec2::new(x, y),
                velocity: Vec2::ZERO,
                radius: 10.0,
            })
            .collect();
        let tree = KdTree::new(snapshot.iter().map(|s| s.position).collect());
        let got: Vec<AgentId> = neighbor_query(&snapshot, &tree, 0, 25.0).iter().map(|s| s.id).collect();
        assert_eq!(got, alloc::vec![1, 2, 3]);
        let lone = &snapshot[..1];
        let tree = KdTree::new(alloc::vec![lone[0].position]);
        assert!(neighbor_query(lone, &tree, 0, 25.0).is_empty());
    }
}
