//! Uncertainty-calibrated ordering statements built from posterior draws.
//!
//! The crate is organized bottom-up:
//!
//! * [`draws`] and [`pairwise`] hold the posterior sample matrix and the
//!   pairwise comparison counts every statement is derived from.
//! * [`statement`] builds elementary, local and global ordering statements and
//!   their empirical posterior probabilities; [`point`] evaluates a statement at
//!   a single ability vector and [`ranking`] turns error-free statements into a
//!   partial order.
//! * [`reward`] and [`search`] score statements and look for the best action
//!   `(alpha, t, gamma, q)` by multi-start pattern search.
//! * [`model`] fits the lineup point-difference model by Gibbs sampling.
//! * [`io`] reads and writes encounter logs, draw matrices and reports.
//! * [`sim`] generates synthetic leagues and runs simulation studies.

pub mod draws;
pub mod error;
pub mod io;
pub mod model;
pub mod pairwise;
pub mod point;
pub mod ranking;
pub mod reward;
pub mod search;
pub mod sim;
pub mod statement;
pub mod threshold;

pub use draws::PosteriorDraws;
pub use error::{Error, Result};
pub use pairwise::{count_pairwise, ComparisonCounts};
pub use point::evaluate_at_point;
pub use ranking::{derive_rankings, RankingGraph};
pub use reward::{cost, reward, Action, CostTransform, RewardConfig, SearchBox};
pub use search::{optimize, pattern_search, SearchOutcome, StatementCache};
pub use statement::{
    compute_statement, global_probability, global_set, local_indicator, local_sets, GlobalSkeleton,
    GlobalStatement, LocalSets, LocalStatement,
};
