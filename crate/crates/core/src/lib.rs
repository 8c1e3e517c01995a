//! Monte Carlo simulator of a workplace of extroverted and introverted agents
//! whose motivation rises while they talk and falls while they work alone.
//!
//! The crate is organised bottom-up:
//!
//! * [`stochastics`]: seed derivation, the per-run random stream, exact
//!   Poisson and unbiased integer sampling.
//! * [`engine`]: agent state machine and the per-minute update.
//! * [`metrics`]: mean cumulative productivity / motivation observables and
//!   ensemble statistics.
//! * [`experiments`]: parameter sweeps and figure presets.
//! * [`validation`]: exhaustive small-instance oracle and invariant checks.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod stochastics;
pub mod validation;

pub use engine::{instigation_probability, run_day, AgentId, ModelParams, Stereotype, World};
pub use error::{MetricsError, ParamError, StochasticsError, SweepError};
pub use experiments::{preset, run_sweep, GridPoint, PointResult, Preset, SweepResult, SweepSpec};
pub use metrics::{
    aggregate, AgentTrace, EnsembleStats, Estimate, Observables, Quantity, RecordOptions, RunRecord, TraceSample,
};
pub use stochastics::{derive_run_seed, MasterSeed, RandomStream, RunSeed};
