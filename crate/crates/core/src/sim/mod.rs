//! Synthetic leagues and simulation studies.
//!
//! A study fits a base dataset under a generating prior, takes posterior
//! draws as true abilities, simulates new point differences for the same
//! encounters, refits under each fitting prior and scores the optimal
//! statement against the truth.

pub mod league;
pub mod study;

pub use league::{generate_league, LeagueConfig, SyntheticLeague};
pub use study::{
    draw_truths, run_cell, run_study, simulate_dataset, simulate_realization, write_metrics,
    EntityLevel, SimDesign, SimMetrics, SimSettings, StudyConfig, Truth,
};
