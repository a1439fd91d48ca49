//! Optimal on-line strategies for rank-difference maximization over
//! uniformly random permutation streams.
//!
//! Items arrive one at a time; only the relative rank of each arrival among
//! the arrivals so far is observable. A player selects a low item and a
//! later high item (once, or repeatedly in non-overlapping pairs) and earns
//! the difference of their final ranks. This crate implements:
//!
//! * the input model and rank transforms ([`permstream`]),
//! * exact threshold tables defining the optimal single-pair strategy
//!   ([`thresholds`]),
//! * the strategies themselves as on-line move functions ([`strategies`]),
//! * exact closed forms for the multi-pair game and the off-line optimum
//!   ([`closedform`]),
//! * independent verification oracles: exhaustive enumeration and
//!   backward-induction dynamic programs ([`oracle`]),
//! * seeded, reproducible Monte Carlo estimation ([`montecarlo`]).
//!
//! All expectations are exact rationals; floating point appears only in
//! Monte Carlo summary statistics and optional decimal rendering.

pub mod closedform;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod permstream;
pub mod rational;
pub mod strategies;
pub mod thresholds;

pub use error::{Error, Result};
pub use rational::Rational;
