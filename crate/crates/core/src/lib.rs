//! Hybrid discrete-event / agent-based simulation of a retail department.
//!
//! Customers drawn from a finite pool move through a state chart (browse,
//! seek help, queue, pay, renege) while dedicated staff serve FIFO queues.
//! Each visit updates a per-visit and a lifetime satisfaction index.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel replication live in the `manprasim` crate.

#![no_std]

extern crate alloc;

pub mod agents;
pub mod department;
pub mod engine;
pub mod experiments;
pub mod metrics;
pub mod population;
pub mod simulation;
pub mod stochastics;

pub use agents::{CustomerState, ExitCategory, SatisfactionWeights, StaffRole, Stereotype};
pub use department::{staffing_sweep, ConfigError, DepartmentConfig, Staffing};
pub use experiments::{run_replication, Scenario, ScenarioResult};
pub use metrics::{MetricsRecord, SummaryRow};
pub use population::{MixConfig, PoolMix};
pub use simulation::{simulate, Observer, RunReport, SimError, TransitionRecord};
