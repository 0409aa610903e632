//! Agent-based simulation of interacting belief networks.
//!
//! Each agent holds a complete signed belief network over concepts (itself,
//! its social neighbors, a neutral item "latte", and two group identities).
//! At every step one agent receives a belief from a neighbor and then nudges
//! an adjacent belief down the gradient of its internal dissonance.

pub mod belief_net;
pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod population;
pub mod validation;

pub use belief_net::{BeliefNetwork, ConceptId};
pub use dynamics::{Dynamics, DynamicsParams, InfluenceMode, StepTrace};
pub use error::{Error, Result};
pub use experiment::{run_simulation, run_sweep, SimConfig, SweepConfig};
pub use population::{Agent, Group, SocialGraph};
