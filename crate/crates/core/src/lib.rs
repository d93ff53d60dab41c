//! Discrete-event simulation of request mapping in a content delivery
//! network: users request Zipf-popular files, each request is mapped to one of
//! the servers caching the file, and every server is a FIFO queue. The crate
//! measures the resulting average delivery cost, average sojourn time and
//! queue-query overhead of several mapping policies.

pub mod calendar;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod popularity;
pub mod seeding;
pub mod strategies;
pub mod topology;

pub use engine::{run_on_network, run_simulation, Network, SimError, SimOptions};
pub use experiment::{run_sweep, write_csv, EnvironmentMode, PointResult, SweepSpec};
pub use metrics::{aggregate_runs, AggregateResult};
pub use model::{
    validate_config, CacheAllocation, ConfigError, ConfigFile, CostMatrix, QueueSnapshot, RunResult, ServiceDist,
    SimConfig, StrategySpec,
};
pub use strategies::MappingDecision;
