//! Multi-threaded decision phase.

use lacnav_core::{AgentState, Executor};
use rayon::prelude::*;

/// Evaluates agent decisions on a dedicated rayon pool. Results come back in
/// agent order, so traces are identical to [`lacnav_core::Sequential`].
#[derive(Debug)]
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Parallel { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map_agents<T, F>(&self, agents: &mut [AgentState], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut AgentState) -> T + Sync + Send,
    {
        self.pool.install(|| agents.par_iter_mut().map(f).collect())
    }
}
