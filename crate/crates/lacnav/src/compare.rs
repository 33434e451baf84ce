//! Policy × seed comparison tables.

use std::fmt::Write as _;

use lacnav_core::{evaluate, PolicyKind, RunResult, Sequential, Termination};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::results::fmt_opt;
use crate::runner::simulate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub policy: PolicyKind,
    pub seed: u64,
    /// The run's measures, or why it failed.
    pub result: Result<RunResult, String>,
}

/// Means over the runs of one policy. Completion times are only averaged
/// when every run produced one; otherwise the cell is empty and the row is
/// flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub policy: PolicyKind,
    pub runs: usize,
    pub completed: usize,
    pub errors: usize,
    pub ctime: Option<f64>,
    pub addr: Option<f64>,
    pub adtr: Option<f64>,
    pub ctime_p90: Option<f64>,
    pub flagged: bool,
}

impl CompareRow {
    /// `ctime - ctime_p90`: how long the slowest tenth held up completion.
    pub fn straggler_gap(&self) -> Option<f64> {
        Some(self.ctime? - self.ctime_p90?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub scenario: lacnav_core::ScenarioKind,
    pub agents: usize,
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
    pub runs: Vec<RunOutcome>,
}

/// The config with `seed` applied to both the simulation and the layout.
pub fn seeded(config: &ExperimentConfig, policy: PolicyKind, seed: u64) -> ExperimentConfig {
    let mut c = config.clone();
    c.sim.policy = policy;
    c.sim.seed = seed;
    c.scenario.seed = seed;
    c
}

fn mean_all(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn row(policy: PolicyKind, runs: &[&RunOutcome]) -> CompareRow {
    let ok: Vec<&RunResult> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let completed = ok.iter().filter(|r| r.termination == Termination::Completed).count();
    let errors = runs.len() - ok.len();
    let all = |f: fn(&RunResult) -> Option<f64>| if errors > 0 { None } else { mean_all(ok.iter().map(|r| f(r))) };
    CompareRow {
        policy,
        runs: runs.len(),
        completed,
        errors,
        ctime: all(|r| r.completion_time_s),
        addr: mean_all(ok.iter().map(|r| Some(r.addr))),
        adtr: mean_all(ok.iter().map(|r| Some(r.adtr))),
        ctime_p90: all(|r| r.ctime_p90_s),
        flagged: errors > 0 || completed < runs.len(),
    }
}

/// Runs every (policy, seed) pair, in parallel across runs. Output order is
/// policies × seeds as given, independent of scheduling.
pub fn compare(config: &ExperimentConfig, policies: &[PolicyKind], seeds: &[u64]) -> CompareReport {
    let jobs: Vec<(PolicyKind, u64)> = policies
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(policy, seed)| {
            let c = seeded(config, policy, seed);
            let result = simulate::<_, std::io::Sink>(&c.sim, &c.scenario, &Sequential, None)
                .map(|(trace, _)| evaluate(&trace))
                .map_err(|e| e.to_string());
            RunOutcome { policy, seed, result }
        })
        .collect();
    let rows = policies
        .iter()
        .map(|&p| {
            let mine: Vec<&RunOutcome> = runs.iter().filter(|r| r.policy == p).collect();
            row(p, &mine)
        })
        .collect();
    CompareReport {
        schema_version: SCHEMA_VERSION,
        scenario: config.scenario.kind(),
        agents: config.scenario.agent_count(),
        seeds: seeds.to_vec(),
        rows,
        runs,
    }
}

impl CompareReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} with {} agents, {} seed(s); means over seeds, * = some run failed or hit the step cap",
            self.scenario,
            self.agents,
            self.seeds.len()
        );
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>8} {:>8} {:>10} {:>8} {:>10}",
            "policy", "ctime", "addr", "adtr", "ctime_p90", "gap", "completed"
        );
        for r in &self.rows {
            let f = |x: Option<f64>| fmt_opt(x);
            let _ = writeln!(
                s,
                "{:<10} {:>9} {:>8} {:>8} {:>10} {:>8} {:>7}/{:<2}{}",
                r.policy.as_str(),
                f(r.ctime),
                r.addr.map_or("-".into(), |v| format!("{v:.4}")),
                r.adtr.map_or("-".into(), |v| format!("{v:.4}")),
                f(r.ctime_p90),
                f(r.straggler_gap()),
                r.completed,
                r.runs,
                if r.flagged { " *" } else { "" }
            );
        }
        for run in &self.runs {
            if let Err(e) = &run.result {
                let _ = writeln!(s, "error: {} seed {}: {e}", run.policy, run.seed);
            }
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let mut s = String::from("policy,runs,completed,errors,ctime,addr,adtr,ctime_p90,flagged\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.policy,
                r.runs,
                r.completed,
                r.errors,
                cell(r.ctime),
                cell(r.addr),
                cell(r.adtr),
                cell(r.ctime_p90),
                r.flagged
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
