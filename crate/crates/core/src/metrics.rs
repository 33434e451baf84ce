//! Evaluation measures computed from a finished run.
//!
//! Detour ratios average over agents that arrived and had somewhere to go;
//! agents whose start equals their target have no defined ratio and are
//! skipped, and unfinished agents are counted separately. With no agent to
//! average over, both ratios read 1.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cell::AgentId;
use crate::engine::{AgentInfo, SimTrace, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub id: AgentId,
    pub arrival_time_s: Option<f64>,
    pub path_length: f64,
    pub straight_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub termination: Termination,
    pub completion_time_s: Option<f64>,
    /// Average detour-distance ratio.
    pub addr: f64,
    /// Average detour-time ratio.
    pub adtr: f64,
    pub ctime_p90_s: Option<f64>,
    pub unfinished: usize,
    pub per_agent: Vec<AgentMetrics>,
}

fn straight(a: &AgentInfo) -> f64 {
    a.start.distance(a.target)
}

fn arrival_time(trace: &SimTrace, a: &AgentInfo) -> Option<f64> {
    a.arrival_step.map(|s| s as f64 * trace.meta.delta)
}

/// Time at which the last agent arrived; `None` if any agent never did.
pub fn completion_time(trace: &SimTrace) -> Option<f64> {
    trace
        .agents
        .iter()
        .map(|a| arrival_time(trace, a))
        .try_fold(0.0f64, |acc, t| t.map(|t| acc.max(t)))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

fn ratio_agents(trace: &SimTrace) -> impl Iterator<Item = &AgentInfo> {
    trace
        .agents
        .iter()
        .filter(|a| a.arrival_step.is_some() && straight(a) > 0.0)
}

/// Mean of path length over straight-line distance.
pub fn avg_detour_distance_ratio(trace: &SimTrace) -> f64 {
    mean(ratio_agents(trace).map(|a| a.path_length / straight(a)))
}

/// Mean of travel time over the straight-line time at maximum speed.
pub fn avg_detour_time_ratio(trace: &SimTrace) -> f64 {
    let v_max = trace.meta.v_max;
    mean(ratio_agents(trace).map(|a| {
        let t = arrival_time(trace, a).unwrap_or_default();
        t / (straight(a) / v_max)
    }))
}

/// Arrival time of the `⌈0.9 n⌉`-th agent to arrive.
pub fn completion_time_p90(trace: &SimTrace) -> Option<f64> {
    let n = trace.agents.len();
    let needed = (9 * n).div_ceil(10);
    let mut times: Vec<f64> = trace.agents.iter().filter_map(|a| arrival_time(trace, a)).collect();
    if needed == 0 || times.len() < needed {
        return None;
    }
    times.sort_by(f64::total_cmp);
    Some(times[needed - 1])
}

pub fn evaluate(trace: &SimTrace) -> RunResult {
    RunResult {
        termination: trace.termination,
        completion_time_s: completion_time(trace),
        addr: avg_detour_distance_ratio(trace),
        adtr: avg_detour_time_ratio(trace),
        ctime_p90_s: completion_time_p90(trace),
        unfinished: trace.agents.iter().filter(|a| a.arrival_step.is_none()).count(),
        per_agent: trace
            .agents
            .iter()
            .map(|a| AgentMetrics {
                id: a.id,
                arrival_time_s: arrival_time(trace, a),
                path_length: a.path_length,
                straight_distance: straight(a),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::TraceMeta;
    use crate::geom::Vec2;
    use crate::policy::PolicyKind;
    use crate::scenario::ScenarioKind;

    fn trace(agents: &[(f64, Option<u64>, f64)]) -> SimTrace {
        SimTrace {
            meta: TraceMeta {
                delta: 0.01,
                r: 10.0,
                v_max: 50.0,
                arrival_tol: 1e-6,
                seed: 0,
                policy: PolicyKind::LacNav,
                scenario: ScenarioKind::Custom,
            },
            agents: agents
                .iter()
                .enumerate()
                .map(|(i, &(dist, arrival_step, path_length))| AgentInfo {
                    id: i as AgentId,
                    group: 0,
                    start: Vec2::new(0.0, 100.0 * i as f64),
                    target: Vec2::new(dist, 100.0 * i as f64),
                    arrival_step,
                    path_length,
                })
                .collect(),
            steps: Vec::new(),
            termination: Termination::Completed,
        }
    }

    #[test]
    fn completion_time_examples() {
        assert_eq!(completion_time(&trace(&[(500.0, Some(1000), 500.0)])), Some(10.0));
        assert_eq!(completion_time(&trace(&[(500.0, Some(1000), 500.0), (5.0, None, 1.0)])), None);
        assert_eq!(completion_time(&trace(&[(0.0, Some(0), 0.0)])), Some(0.0));
    }

    #[test]
    fn detour_distance_examples() {
        assert_eq!(avg_detour_distance_ratio(&trace(&[(500.0, Some(1000), 500.0)])), 1.0);
        // two legs of a right isosceles triangle over its hypotenuse
        let leg = 100.0 / 2f64.sqrt();
        let r = avg_detour_distance_ratio(&trace(&[(leg * 2f64.sqrt(), Some(400), 2.0 * leg)]));
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r = avg_detour_distance_ratio(&trace(&[(100.0, Some(200), 100.0), (100.0, Some(300), 150.0)]));
        assert!((r - 1.25).abs() < 1e-12);
    }

    #[test]
    fn detour_time_examples() {
        assert!((avg_detour_time_ratio(&trace(&[(500.0, Some(1000), 500.0)])) - 1.0).abs() < 1e-12);
        // idle 10 s, then 500 units at full speed
        assert!((avg_detour_time_ratio(&trace(&[(500.0, Some(2000), 500.0)])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_and_unfinished_agents_are_excluded() {
        let t = trace(&[(0.0, Some(0), 0.0), (100.0, Some(300), 150.0), (100.0, None, 30.0)]);
        assert!((avg_detour_distance_ratio(&t) - 1.5).abs() < 1e-12);
        assert!((avg_detour_time_ratio(&t) - 1.5).abs() < 1e-12);
        assert_eq!(evaluate(&t).unfinished, 1);
    }

    #[test]
    fn p90_examples() {
        let agents: Vec<_> = (1..=10).map(|s| (10.0, Some(s * 100), 10.0)).collect();
        assert_eq!(completion_time_p90(&trace(&agents)), Some(9.0));
        assert_eq!(completion_time_p90(&trace(&[(10.0, Some(250), 10.0)])), Some(2.5));
        let mut agents = agents;
        agents[0].1 = None;
        agents[1].1 = None;
        assert_eq!(completion_time_p90(&trace(&agents)), None);
    }
}
