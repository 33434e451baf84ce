//! Results files (JSON).

use lacnav_core::{PolicyKind, RunResult, ScenarioKind, SimConfig};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub policy: PolicyKind,
    pub scenario: ScenarioKind,
    pub agents: usize,
    pub seed: u64,
    pub sim: SimConfig,
    pub result: RunResult,
}

impl ResultsFile {
    pub fn new(scenario: ScenarioKind, sim: SimConfig, result: RunResult) -> Self {
        ResultsFile {
            schema_version: SCHEMA_VERSION,
            policy: sim.policy,
            scenario,
            agents: result.per_agent.len(),
            seed: sim.seed,
            sim,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}

/// `12.34` or `-` for a missing value.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// The one-line run summary printed by `run`.
pub fn summary_line(scenario: ScenarioKind, policy: PolicyKind, r: &RunResult) -> String {
    format!(
        "policy={policy} scenario={scenario} ctime={} addr={:.4} adtr={:.4} ctime_p90={} termination={} unfinished={}",
        fmt_opt(r.completion_time_s),
        r.addr,
        r.adtr,
        fmt_opt(r.ctime_p90_s),
        r.termination.as_str(),
        r.unfinished
    )
}
