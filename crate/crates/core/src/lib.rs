//! Random-transaction service economy.
//!
//! A small closed economy of agents who buy fixed-size blocks of service from
//! randomly chosen sellers, a commercial bank that holds their accounts and
//! lends against a reserve requirement, and a government that taxes each sale
//! and spends the proceeds back into the economy. The weekly update is a
//! literal state machine; every random decision flows through one seeded
//! [`Rng`] so a `(params, seed)` pair fully determines a run.
//!
//! Modules:
//! - [`rng`]: the seeded generator and its two primitives.
//! - [`economy`]: parameters, state, per-week records and summaries.
//! - [`engine`]: the fixed-price weekly step and full-run driver.
//! - [`market`]: linear price curves and the market-price weekly step.
//! - [`harness`]: seed ensembles and parameter sweeps.
//! - [`config`]: key/value configuration with short aliases.
//! - [`report`]: CSV and SVG output.

pub mod config;
pub mod economy;
pub mod engine;
mod error;
pub mod harness;
pub mod market;
pub mod report;
pub mod rng;

pub use economy::{
    average_over_weeks, DefaultEvent, EconomyState, PriceMode, SimParams, SimResult, WeekRecord,
};
pub use engine::{run_simulation, step_week};
pub use error::{Error, Result, Violation};
pub use harness::{run_ensemble, sweep, EnsembleSummary, SweepRow, SweepTable};
pub use rng::Rng;
