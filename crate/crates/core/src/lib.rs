//! Local action cells for decentralized, collision-free multiagent navigation.
//!
//! Each agent turns a snapshot of its neighborhood into a small fan of safe
//! candidate velocities (its local action cell) and picks one of them. As
//! long as every agent moves inside its own cell for one update interval,
//! no two disks can overlap.
//!
//! The crate is `no_std` (with `alloc`): geometry, cell construction, the
//! three policies, the lockstep engine, scenario generators and metrics are
//! all pure. File formats, plotting and the CLI live in the `lacnav` crate.

#![no_std]

extern crate alloc;

pub mod cell;
pub mod engine;
pub mod geom;
pub mod metrics;
pub mod policy;
pub mod scenario;
pub mod spatial;

mod rng;

pub use cell::{
    build_cell, neighbor_cutoff, ActionCell, AgentId, AgentSnapshot, LacError, LacParams,
    SafeHalfPlane,
};
pub use engine::{
    run, run_with, AgentState, Executor, Recording, Sequential, SimConfig, SimError, SimTrace,
    Simulation, StepRecord, Termination,
};
pub use geom::{Angle, Vec2};
pub use metrics::{evaluate, RunResult};
pub use policy::{PenaltyAngleMode, PenaltyParams, PolicyKind};
pub use scenario::{Scenario, ScenarioKind, ScenarioSpec};
