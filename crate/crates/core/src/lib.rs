//! Counterfactual regret minimization for two-player zero-sum
//! imperfect-information games.
//!
//! * [`game`]: the extensive-form abstraction and eight benchmark games.
//! * [`tabular`]: exact CFR with pluggable update rules (CFR, CFR+, LinearCFR,
//!   DCFR, DCFR+, PCFR+, PDCFR+).
//! * [`exploitability`]: exact best responses.
//! * [`traversal`], [`buffers`], [`nn`], [`deep`]: model-free neural CFR with
//!   bootstrapped cumulative advantages and a learned baseline.
//! * [`agents`]: rule-based Leduc opponents and head-to-head matches.
//! * [`harness`]: configuration, experiment driver and CSV logging.

pub mod agents;
pub mod buffers;
pub mod deep;
pub mod error;
pub mod exploitability;
pub mod game;
pub mod harness;
pub mod nn;
pub mod tabular;
pub mod traversal;

pub use error::{Error, Result};
