use serde::{Deserialize, Serialize};

use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::pairwise::ComparisonCounts;
use crate::reward::{Action, CostTransform};
use crate::statement::GlobalStatement;

/// Tied pairs listed in a report at most.
pub const MAX_LISTED_TIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub id: String,
    pub below: Vec<String>,
    pub above: Vec<String>,
    pub below_count: usize,
    pub above_count: usize,
    pub local_hold_count: usize,
    pub local_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiedPair {
    pub a: String,
    pub b: String,
    pub draws: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TieDiagnostics {
    /// Tied (draw, pair) occurrences over all entity pairs.
    pub total: u64,
    /// Pairs with at least one tie, up to [`MAX_LISTED_TIES`].
    pub pairs: Vec<TiedPair>,
    pub truncated: bool,
}

/// Search record attached by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub starts: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub best_start: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementReport {
    pub action: Action,
    pub h: CostTransform,
    pub epsilon: Option<f64>,
    pub num_draws: usize,
    pub num_entities: usize,
    pub hold_count: usize,
    pub prob: f64,
    pub cost: f64,
    pub reward: f64,
    pub members: Vec<MemberReport>,
    pub ties: TieDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchRecord>,
}

impl StatementReport {
    pub fn new(
        statement: &GlobalStatement,
        draws: &PosteriorDraws,
        counts: &ComparisonCounts,
        h: CostTransform,
        epsilon: Option<f64>,
    ) -> Self {
        let ids = draws.ids();
        let names = |v: &[usize]| v.iter().map(|&i| ids[i].clone()).collect::<Vec<_>>();
        let members = statement
            .locals
            .iter()
            .map(|local| MemberReport {
                id: ids[local.sets.entity].clone(),
                below: names(&local.sets.below),
                above: names(&local.sets.above),
                below_count: local.sets.below.len(),
                above_count: local.sets.above.len(),
                local_hold_count: local.hold_count,
                local_prob: local.prob(),
            })
            .collect();
        let tied = counts.tied_pairs();
        let ties = TieDiagnostics {
            total: counts.total_ties(),
            truncated: tied.len() > MAX_LISTED_TIES,
            pairs: tied
                .into_iter()
                .take(MAX_LISTED_TIES)
                .map(|(a, b, n)| TiedPair {
                    a: ids[a].clone(),
                    b: ids[b].clone(),
                    draws: n,
                })
                .collect(),
        };
        Self {
            action: statement.action,
            h,
            epsilon,
            num_draws: statement.num_draws,
            num_entities: draws.num_entities(),
            hold_count: statement.hold_count,
            prob: statement.prob(),
            cost: statement.cost,
            reward: statement.reward,
            members,
            ties,
            search: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Member sets as `(entity, below, above)` indices into `ids`.
    pub fn member_sets(&self, ids: &[String]) -> Result<Vec<(usize, Vec<usize>, Vec<usize>)>> {
        let index = |id: &String| {
            ids.iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::UnknownKey(id.clone()))
        };
        self.members
            .iter()
            .map(|m| {
                Ok((
                    index(&m.id)?,
                    m.below.iter().map(index).collect::<Result<_>>()?,
                    m.above.iter().map(index).collect::<Result<_>>()?,
                ))
            })
            .collect()
    }
}
