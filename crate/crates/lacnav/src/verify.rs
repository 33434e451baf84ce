//! Offline re-check of a trace's physical invariants.
//!
//! Row values carry 9 significant digits, so every comparison allows the
//! rendering error of the numbers involved on top of the engine tolerance.

use lacnav_core::cell::OVERLAP_SLACK;
use lacnav_core::engine::AgentRecord;
use lacnav_core::spatial::KdTree;
use lacnav_core::{SimTrace, Termination, Vec2};

use crate::trace::ROW_QUANTUM;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Overlap {
        step: u64,
        a: u32,
        b: u32,
        distance: f64,
        min_distance: f64,
    },
    Displacement {
        step: u64,
        agent: u32,
        error: f64,
    },
    NotAbsorbed {
        step: u64,
        agent: u32,
    },
    ArrivalOffTarget {
        step: u64,
        agent: u32,
        distance: f64,
    },
    Unfinished {
        agent: u32,
    },
}

impl Violation {
    pub fn step(&self) -> Option<u64> {
        match *self {
            Violation::Overlap { step, .. }
            | Violation::Displacement { step, .. }
            | Violation::NotAbsorbed { step, .. }
            | Violation::ArrivalOffTarget { step, .. } => Some(step),
            Violation::Unfinished { .. } => None,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Overlap {
                step,
                a,
                b,
                distance,
                min_distance,
            } => write!(
                f,
                "step {step}: agents {a} and {b} overlap (distance {distance:.9} < {min_distance:.9})"
            ),
            Violation::Displacement { step, agent, error } => write!(
                f,
                "step {step}: agent {agent} moved {error:.3e} away from delta * velocity"
            ),
            Violation::NotAbsorbed { step, agent } => {
                write!(f, "step {step}: agent {agent} moved after arriving")
            }
            Violation::ArrivalOffTarget { step, agent, distance } => write!(
                f,
                "step {step}: agent {agent} marked arrived {distance:.3e} from its target"
            ),
            Violation::Unfinished { agent } => {
                write!(f, "trace says completed but agent {agent} never arrived")
            }
        }
    }
}

fn quantum(v: Vec2) -> f64 {
    ROW_QUANTUM * (v.x.abs() + v.y.abs()) + 1e-12
}

fn check_overlap(step: u64, agents: &[AgentRecord], r: f64) -> Option<Violation> {
    let min_distance = 2.0 * r - OVERLAP_SLACK;
    let positions: Vec<Vec2> = agents.iter().map(|a| a.position).collect();
    let tree = KdTree::new(positions.clone());
    positions.iter().enumerate().find_map(|(i, &p)| {
        tree.within(p, min_distance)
            .into_iter()
            .filter(|&j| j > i)
            .map(|j| (j, p.distance(positions[j])))
            .find(|&(j, d)| d + quantum(p) + quantum(positions[j]) < min_distance)
            .map(|(j, distance)| Violation::Overlap {
                step,
                a: agents[i].id,
                b: agents[j].id,
                distance,
                min_distance,
            })
    })
}

/// The first violated invariant, in step order, or `None` if the trace holds.
pub fn verify(trace: &SimTrace) -> Option<Violation> {
    let delta = trace.meta.delta;
    let r = trace.meta.r;
    for (t, step) in trace.steps.iter().enumerate() {
        if let Some(v) = check_overlap(step.step, &step.agents, r) {
            return Some(v);
        }
        if t == 0 {
            continue;
        }
        let prev = &trace.steps[t - 1];
        for (a, before) in step.agents.iter().zip(&prev.agents) {
            let info = &trace.agents[a.id as usize];
            let arrived_before = info.arrival_step.is_some_and(|s| s < step.step);
            if arrived_before {
                if a.position != before.position || a.velocity != Vec2::ZERO || a.action.is_some() {
                    return Some(Violation::NotAbsorbed {
                        step: step.step,
                        agent: a.id,
                    });
                }
                continue;
            }
            let moved = a.position - before.position;
            let error = (moved - a.velocity * delta).norm();
            let allowed = quantum(a.position) + quantum(before.position) + delta * quantum(a.velocity);
            if error > allowed {
                return Some(Violation::Displacement {
                    step: step.step,
                    agent: a.id,
                    error,
                });
            }
            if info.arrival_step == Some(step.step) {
                let distance = a.position.distance(info.target);
                if distance > trace.meta.arrival_tol + quantum(a.position) + quantum(info.target) {
                    return Some(Violation::ArrivalOffTarget {
                        step: step.step,
                        agent: a.id,
                        distance,
                    });
                }
            }
        }
    }
    if trace.termination == Termination::Completed {
        if let Some(a) = trace.agents.iter().find(|a| a.arrival_step.is_none()) {
            return Some(Violation::Unfinished { agent: a.id });
        }
    }
    None
}
