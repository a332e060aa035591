//! File formats, experiment orchestration and reporting for relational
//! boosted bandits.
//!
//! * [`dataset`]: `facts.pl`, `examples.pl`, `modes.txt` and fact-delta
//!   schedules.
//! * [`model`]: the versioned text format for boosted models.
//! * [`roundlog`]: per-round CSV logs with `#` metadata headers.
//! * [`experiment`]: one seeded run of any supported algorithm.
//! * [`report`]: summaries across seeds and SVG regret plots.
//! * [`config`]: flat `key = value` run configuration.

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod model;
pub mod report;
pub mod roundlog;

mod error;
mod text;

pub use error::{Error, Result};
