use thiserror::Error;

use crate::graph::AgentId;

/// Errors raised by graph construction, the surfacing protocol and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("agent id {id} is out of range 1..={n}")]
    AgentOutOfRange { id: usize, n: usize },

    #[error("self-loop on agent {0}")]
    SelfLoop(AgentId),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(AgentId, AgentId),

    #[error("graph must have at least one agent")]
    EmptyGraph,

    #[error("graph file line {line}: {msg}")]
    GraphParse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite state entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("exhaustive search supports at most {max} agents, got {n}")]
    SearchTooLarge { n: usize, max: usize },

    #[error("invalid trigger configuration: {0}")]
    InvalidConfig(String),

    #[error("position at t={t} is not determined by a record scheduled to resurface at {t_next}")]
    BeyondSchedule { t: f64, t_next: f64 },

    #[error("cloud has no record for agent {0}")]
    MissingRecord(AgentId),

    #[error("communication graph is disconnected")]
    Disconnected,

    #[error("invalid simulation setup: {0}")]
    InvalidSetup(String),

    #[error("numerical fault at t={time}: {detail}")]
    NumericalFault { time: f64, detail: String },

    #[error("time {t} outside simulated range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
