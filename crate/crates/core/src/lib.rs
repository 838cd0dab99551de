//! Microscopic simulation of delivery trucks on a signalized road network,
//! with per-step CO₂ and fuel accounting, induction-loop detectors, a
//! bundled-vs-unbundled scenario comparison and a TCP control protocol.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod control_server;
pub mod detectors;
pub mod dynamics;
pub mod emissions;
pub mod engine;
pub mod net_model;
pub mod reference;
pub mod scenario_io;

pub use engine::{load_scenario, run, SimulationConfig, SimulationResult, World};
