//! Opportunistic anypath routing with learned link probabilities.
//!
//! The crate covers the algorithmic side only and builds without `std`
//! (it needs `alloc`):
//!
//! - [`topology`]: directed mesh model and its text format
//! - [`anypath`]: anypath cost model, Shortest Anypath First, oracles
//! - [`channel`]: Bernoulli channel, broadcast and packet forwarding
//! - [`learning`]: link estimator, DSEE scheduler, ε-greedy and Thompson baselines
//! - [`experiment`]: epoch loop, regret against a genie, aggregation
//!
//! File IO, CSV output and the command-line tool live in a separate crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod anypath;
pub mod channel;
pub mod experiment;
pub mod learning;
pub mod rng;
pub mod topology;

pub use anypath::{ForwardingEntry, ForwardingTable, UNREACHABLE};
pub use experiment::{ExperimentConfig, Policy, RegretTrace, SlotRecord};
pub use learning::{BudgetMode, DseeState, LinkEstimator, Phase};
pub use topology::{parse_topology, LinkId, NodeId, Topology};
