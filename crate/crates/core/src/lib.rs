//! Online dispatching of multi-server jobs over a bipartite port-server
//! graph with capacity constraints and learned channel valuations.
//!
//! The [`policies::EsdpPolicy`] learner scores channels with an optimistic
//! mean-plus-deviation index and maximizes it through the budgeted knapsack
//! DP in [`knapdp`]. The [`simulator`] runs it against greedy baselines and
//! an omniscient oracle.

pub mod bipartite;
pub mod config;
pub mod error;
pub mod exec;
pub mod knapdp;
pub mod policies;
pub mod report;
pub mod simulator;
pub mod stats;
pub mod sweep;
pub mod workload;

pub use error::{Error, Result};
pub use exec::ExecMode;
