//! Bus factor and key-engineer estimation from three knowledge channels:
//! version-control history, code-review metadata and meeting metadata.
//!
//! The pipeline is split into ingestion ([`vcs`], [`collab`]) that produces a
//! flat log of [`event::ContributionEvent`]s, and the [`engine`] that turns the
//! log into per-file degree-of-authorship scores and runs the greedy
//! bus-factor loop. [`pipeline`] wires the pieces together for the CLI.

pub mod collab;
pub mod config;
pub mod engine;
mod error;
pub mod evaluate;
pub mod event;
#[cfg(feature = "fixtures")]
pub mod fixture;
pub mod identity;
pub mod params;
pub mod pipeline;
pub mod report;
pub mod vcs;

pub use error::{Error, ErrorCategory, Result};
