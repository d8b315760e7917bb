use crate::topology::NodeId;
use thiserror::Error;

/// Errors raised by the simulator and its building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid membership function breakpoints {0:?}")]
    InvalidMembership(Vec<f64>),
    #[error("linguistic variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("unknown label `{label}` for variable `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("rules {first} and {second} violate monotonicity")]
    MonotonicityConflict { first: String, second: String },
    #[error("duplicate rule antecedent {0}")]
    DuplicateRule(String),
    #[error("fuzzy output set is empty; nothing to defuzzify")]
    EmptyOutputSet,
    #[error("invalid energy amount {0} (must be finite and non-negative)")]
    InvalidEnergy(f64),
    #[error("node count must be at least 1")]
    NoNodes,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("field has no base station")]
    NoBaseStation,
    #[error("route discovery from {src} to {dst} failed after the final ring")]
    DiscoveryFailed { src: NodeId, dst: NodeId },
    #[error("no path between {src} and {dst}")]
    NoPath { src: NodeId, dst: NodeId },
    #[error("path set is empty")]
    EmptyPathSet,
    #[error("packet created at {created_at} s arrived before its creation (now {now} s)")]
    ClockViolation { created_at: f64, now: f64 },
    #[error("node {0} is not a compromised node")]
    NotCompromised(NodeId),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("base station is disconnected from the sensor field")]
    DisconnectedBaseStation,
}

impl Error {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
