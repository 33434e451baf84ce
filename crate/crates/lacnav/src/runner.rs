//! Runs a simulation while streaming its trace, so long runs never hold
//! every step in memory.

use std::io::{self, Write};

use lacnav_core::{Executor, ScenarioSpec, SimConfig, SimError, SimTrace, Simulation, Termination};

use crate::trace::TraceWriter;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("writing trace: {0}")]
    Io(#[from] io::Error),
}

/// Runs to completion or the step cap. The returned trace has no steps; they
/// go to `sink` when one is given.
pub fn simulate<E: Executor, W: Write>(
    config: &SimConfig,
    spec: &ScenarioSpec,
    exec: &E,
    sink: Option<W>,
) -> Result<(SimTrace, Option<W>), RunError> {
    config.validate()?;
    let layout = spec.generate(config.lac.r).map_err(SimError::from)?;
    let mut sim = Simulation::new(*config, &layout)?;
    let mut writer = match sink {
        Some(out) => {
            let mut w = TraceWriter::begin(out, &sim.meta(), &sim.agent_info())?;
            w.step(&sim.record())?;
            Some(w)
        }
        None => None,
    };
    while !sim.all_arrived() && sim.step_count() < config.max_steps {
        let record = sim.step_with(exec)?;
        if let Some(w) = writer.as_mut() {
            w.step(&record)?;
        }
    }
    let termination = if sim.all_arrived() {
        Termination::Completed
    } else {
        Termination::StepCap
    };
    let agents = sim.agent_info();
    let out = writer.map(|w| w.finish(&agents, termination)).transpose()?;
    Ok((
        SimTrace {
            meta: sim.meta(),
            agents,
            steps: Vec::new(),
            termination,
        },
        out,
    ))
}
