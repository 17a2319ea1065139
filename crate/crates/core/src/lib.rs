//! Self-triggered consensus for agents that communicate only through
//! intermittent sessions with a shared, computation-free cloud store.
//!
//! * [`graph`]: topology, Laplacian, objective `V`.
//! * [`trigger`]: upper bounds on an agent's objective contribution and the
//!   times at which they can turn positive.
//! * [`protocol`]: cloud records, promises and the surfacing routine.
//! * [`sim`]: event-driven simulator, periodic baseline and invariant monitors.

pub mod error;
pub mod graph;
pub mod protocol;
pub mod sim;
pub mod trigger;

pub use error::{Error, Result};
pub use graph::{AgentId, Graph, StateVector};
pub use protocol::{Cloud, CloudRecord, PromiseFn, PromiseLedger, TriggerConfig};
pub use sim::{
    monitors, monitors_with, run, run_periodic, Algorithm, MonitorConfig, SimResult,
    TrajectorySegment, Violation,
};
pub use trigger::{compute_t_star, compute_t_total, NeighborView, TriggerSnapshot};
