//! Simulation and analysis of multiclass fork-join networks with shared
//! servers.
//!
//! The crate is organised bottom-up: [`topology`] describes networks,
//! [`stochastic`] draws interarrival and service times, [`engine`] runs
//! them under a [`policies`] rule, [`stats`] turns runs into tables, and
//! [`analytics`] holds the diffusion-level machinery (reflection maps,
//! control-problem solvers, reflected Brownian motion).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod instances;
pub mod path;
pub mod policies;
pub mod stats;
pub mod stochastic;
pub mod topology;

pub use engine::{run, RunOptions, RunOutput, SimState, Simulation, Stop, Trace, TraceOptions};
pub use error::{Error, Result};
pub use path::Path;
pub use policies::{PolicyKind, PolicySpec};
pub use stochastic::{DistributionSpec, RandomStream};
pub use topology::{build_preset, PresetKind, PresetParams, Topology};
