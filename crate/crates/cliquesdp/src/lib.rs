//! File formats, problem generators, reporting and the benchmark harness
//! around [`cliquesdp_core`].
//!
//! * [`sdpa`]: SDPA sparse reader and writer.
//! * [`generate`]: seeded block-arrow and random-chordal problems.
//! * [`run`]: timed solves and per-iteration CSV traces.
//! * [`report`]: result JSON.
//! * [`bench`]: sweep configs and benchmark CSV.

pub mod bench;
pub mod error;
pub mod generate;
pub mod report;
pub mod run;
pub mod sdpa;

pub use cliquesdp_core as core;
pub use error::Error;
