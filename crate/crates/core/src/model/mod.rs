//! Gaussian lineup point-difference model and its Gibbs sampler.
//!
//! The point difference of an encounter is normal around the difference of
//! the two lineup abilities, each the sum of its five players' abilities. One
//! reference player is pinned at zero for identifiability.

pub mod chains;
pub mod design;
pub mod diagnostics;
pub mod encounter;
pub mod gibbs;
pub mod lineup;
pub mod prior;
pub mod slice;

pub use chains::{run_chains, FitOutput, SamplerConfig, SamplerDiagnostics};
pub use design::{build_design, Design};
pub use diagnostics::split_rhat;
pub use encounter::{reference_player, Encounter, EncounterTable, Lineup, LINEUP_SIZE};
pub use gibbs::{ChainState, GibbsSampler, StepCounters};
pub use lineup::{lineup_draws, lineup_key};
pub use prior::{PriorKind, PriorSpec};
