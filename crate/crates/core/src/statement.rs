//! Elementary, local and global ordering statements.
//!
//! An elementary statement says one entity is above another. The local
//! statement of entity `l` collects the elementary statements against every
//! entity that is above (or below) `l` in more than `1 - alpha` of the draws,
//! and holds in a draw when at most `floor(t * n)` of its `n` elementary
//! statements fail there. The global statement keeps the entities whose local
//! statement holds in at least `1 - gamma` of the draws and holds in a draw when
//! at most `floor(q * |G|)` of those local statements fail.
//!
//! All probabilities are integer counts over the `M` draws.

use rayon::prelude::*;

use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::pairwise::ComparisonCounts;
use crate::reward::{self, Action, RewardConfig};
use crate::threshold::{at_least_count, exceed_count, floor_mul};

/// Entities confidently below and above one entity at level `alpha`.
///
/// The two sets are disjoint whenever `alpha <= 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSets {
    pub entity: usize,
    /// Entities `l'` with `P(l above l') > 1 - alpha`, ascending.
    pub below: Vec<usize>,
    /// Entities `l'` with `P(l' above l) > 1 - alpha`, ascending.
    pub above: Vec<usize>,
    pub alpha: f64,
}

impl LocalSets {
    /// Number of elementary statements in the local statement.
    pub fn len(&self) -> usize {
        self.below.len() + self.above.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty() && self.above.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalStatement {
    pub sets: LocalSets,
    pub t: f64,
    /// Whether the statement holds in each draw.
    pub holds: Vec<bool>,
    pub hold_count: usize,
}

impl LocalStatement {
    pub fn prob(&self) -> f64 {
        self.hold_count as f64 / self.holds.len() as f64
    }

    /// Failed elementary statements allowed by the local error.
    pub fn allowed_failures(&self) -> usize {
        floor_mul(self.t, self.sets.len())
    }
}

/// A global statement before the global error `q` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSkeleton {
    pub alpha: f64,
    pub t: f64,
    pub gamma: f64,
    /// Local statement of every entity, indexed by entity.
    pub locals: Vec<LocalStatement>,
    /// Entities whose local statement clears `1 - gamma`, ascending.
    pub members: Vec<usize>,
    pub num_draws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalStatement {
    pub action: Action,
    /// Member entities, ascending.
    pub members: Vec<usize>,
    /// Local statements of the members, in `members` order.
    pub locals: Vec<LocalStatement>,
    pub holds: Vec<bool>,
    pub hold_count: usize,
    pub num_draws: usize,
    pub cost: f64,
    pub reward: f64,
}

impl GlobalStatement {
    pub fn prob(&self) -> f64 {
        self.hold_count as f64 / self.num_draws as f64
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Failed local statements allowed by the global error.
    pub fn allowed_failures(&self) -> usize {
        floor_mul(self.action.q, self.members.len())
    }

    /// Local statement of entity `l`, if it is a member.
    pub fn local(&self, l: usize) -> Option<&LocalStatement> {
        self.members
            .binary_search(&l)
            .ok()
            .map(|pos| &self.locals[pos])
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Entities ordered below and above `l` with probability above `1 - alpha`.
pub fn local_sets(counts: &ComparisonCounts, l: usize, alpha: f64) -> Result<LocalSets> {
    check_unit("alpha", alpha)?;
    let n = counts.num_entities();
    if l >= n {
        return Err(Error::IndexOutOfRange { index: l, len: n });
    }
    let need = exceed_count(1.0 - alpha, counts.num_draws()) as u64;
    let mut below = Vec::new();
    let mut above = Vec::new();
    for other in (0..n).filter(|&o| o != l) {
        if counts.wins(other, l) as u64 >= need {
            above.push(other);
        }
        if counts.wins(l, other) as u64 >= need {
            below.push(other);
        }
    }
    Ok(LocalSets {
        entity: l,
        below,
        above,
        alpha,
    })
}

/// Failed elementary statements of `sets` in every draw. A tie fails.
pub fn failure_counts(draws: &PosteriorDraws, sets: &LocalSets) -> Vec<u32> {
    let own = draws.column(sets.entity);
    let mut failures = vec![0u32; draws.num_draws()];
    for &other in &sets.above {
        for ((f, x), y) in failures.iter_mut().zip(own).zip(draws.column(other)) {
            *f += !(y > x) as u32;
        }
    }
    for &other in &sets.below {
        for ((f, x), y) in failures.iter_mut().zip(own).zip(draws.column(other)) {
            *f += !(x > y) as u32;
        }
    }
    failures
}

/// Per-draw indicator of the local statement with local error `t`.
///
/// Holds in a draw when at most `floor(t * n)` elementary statements fail, so
/// an empty statement holds everywhere and `t = 0` requires all to hold.
pub fn local_indicator(draws: &PosteriorDraws, sets: &LocalSets, t: f64) -> Result<Vec<bool>> {
    check_unit("t", t)?;
    let allowed = floor_mul(t, sets.len()) as u32;
    Ok(failure_counts(draws, sets)
        .into_iter()
        .map(|f| f <= allowed)
        .collect())
}

fn local_statement(draws: &PosteriorDraws, sets: LocalSets, t: f64) -> LocalStatement {
    let allowed = floor_mul(t, sets.len()) as u32;
    let holds: Vec<bool> = failure_counts(draws, &sets)
        .into_iter()
        .map(|f| f <= allowed)
        .collect();
    let hold_count = holds.iter().filter(|&&h| h).count();
    LocalStatement {
        sets,
        t,
        holds,
        hold_count,
    }
}

/// Local statements of every entity and the set of entities whose local
/// statement holds in at least `1 - gamma` of the draws.
pub fn global_set(
    draws: &PosteriorDraws,
    counts: &ComparisonCounts,
    alpha: f64,
    t: f64,
    gamma: f64,
) -> Result<GlobalSkeleton> {
    check_unit("alpha", alpha)?;
    check_unit("t", t)?;
    check_unit("gamma", gamma)?;
    if counts.num_entities() != draws.num_entities() || counts.num_draws() != draws.num_draws() {
        return Err(Error::InvalidDraws(
            "comparison counts do not match the draws".into(),
        ));
    }
    let locals: Vec<LocalStatement> = (0..draws.num_entities())
        .into_par_iter()
        .map(|l| {
            let sets = local_sets(counts, l, alpha).expect("validated above");
            local_statement(draws, sets, t)
        })
        .collect();
    let need = at_least_count(1.0 - gamma, draws.num_draws());
    let members = locals
        .iter()
        .enumerate()
        .filter(|(_, s)| s.hold_count >= need)
        .map(|(l, _)| l)
        .collect();
    Ok(GlobalSkeleton {
        alpha,
        t,
        gamma,
        locals,
        members,
        num_draws: draws.num_draws(),
    })
}

/// Completes a skeleton with global error `q`. The returned statement is not
/// yet scored: `cost` and `reward` are zero until [`reward::score`] runs.
pub fn global_probability(skeleton: &GlobalSkeleton, q: f64) -> Result<GlobalStatement> {
    check_unit("q", q)?;
    let m = skeleton.num_draws;
    let allowed = floor_mul(q, skeleton.members.len());
    let mut failing = vec![0usize; m];
    for &l in &skeleton.members {
        for (f, &h) in failing.iter_mut().zip(&skeleton.locals[l].holds) {
            *f += !h as usize;
        }
    }
    let holds: Vec<bool> = failing.into_iter().map(|f| f <= allowed).collect();
    let hold_count = holds.iter().filter(|&&h| h).count();
    Ok(GlobalStatement {
        action: Action {
            alpha: skeleton.alpha,
            t: skeleton.t,
            gamma: skeleton.gamma,
            q,
        },
        members: skeleton.members.clone(),
        locals: skeleton
            .members
            .iter()
            .map(|&l| skeleton.locals[l].clone())
            .collect(),
        holds,
        hold_count,
        num_draws: m,
        cost: 0.0,
        reward: 0.0,
    })
}

/// Builds and scores the global statement of `action`.
pub fn compute_statement(
    draws: &PosteriorDraws,
    counts: &ComparisonCounts,
    action: &Action,
    config: &RewardConfig,
) -> Result<GlobalStatement> {
    let skeleton = global_set(draws, counts, action.alpha, action.t, action.gamma)?;
    let mut statement = global_probability(&skeleton, action.q)?;
    reward::score(&mut statement, config);
    Ok(statement)
}
