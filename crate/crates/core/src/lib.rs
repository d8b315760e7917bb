//! Discrete-event simulation of a wireless sensor network under flooding
//! attack, comparing base-station flooding attack prevention (FAP) on a single
//! shortest path against FAP plus fuzzy-controlled multi-path routing.

pub mod energy;
pub mod error;
pub mod fap;
pub mod fuzzy;
pub mod routing;
pub mod sim;
pub mod topology;

pub use energy::{Energy, EnergyLedger, EnergyParams};
pub use error::{Error, Result};
pub use fuzzy::PathCountController;
pub use routing::PathSet;
pub use sim::{compare, run, Comparison, MetricsReport, ScenarioConfig, Scheme};
pub use topology::{Field, NodeId};
