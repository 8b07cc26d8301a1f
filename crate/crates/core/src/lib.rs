//! Constrained k-means over embedded text with oracle-generated constraint sets.
//!
//! The pipeline has two stages:
//!
//! 1. [`constraints`] proposes must-link candidates from a coreset-style grid
//!    and grows cannot-link sets under a k-center radius gate, asking an
//!    [`oracle`] (simulated or a remote chat-completion model) for the
//!    relations. Whole sets are judged per query.
//! 2. [`clustering`] runs penalty-based local search: soft must-link sets are
//!    split and re-merged against the centers, hard ones seed k-means++ as
//!    weighted representatives, and cannot-link sets are matched to distinct
//!    centers with a per-point release penalty.
//!
//! [`metrics`] and [`harness`] evaluate and drive multi-seed experiments.

pub mod clustering;
pub mod constraints;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matching;
pub mod metrics;
pub mod oracle;
mod rng;

pub use error::{Error, Result};
