//! Trend-boosted attention dynamics over a fixed population of items.
//!
//! The crate holds the arena simulator ([`arena`]), the statistics computed
//! from its traces ([`metrics`]), a seeded parameter-sweep harness
//! ([`sweep`]), an analyzer for hourly view-count datasets ([`empirical`])
//! and the drivers behind the `junk-bubbles` binary ([`cli`]).

pub mod arena;
pub mod cli;
pub mod empirical;
pub mod metrics;
pub mod params;
pub mod sweep;
pub mod trace_io;

pub use arena::{run, ArenaState, ItemId, ReplacementEvent, RunTrace};
pub use metrics::{gini, summarize, LifecycleRecord, MetricsSummary};
pub use params::ModelParams;
