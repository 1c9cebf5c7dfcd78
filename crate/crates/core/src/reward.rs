//! Cost and reward of global statements, and the search configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statement::GlobalStatement;
use crate::threshold::floor_mul;

/// A point `(alpha, t, gamma, q)` in action space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub alpha: f64,
    pub t: f64,
    pub gamma: f64,
    pub q: f64,
}

impl Action {
    pub fn new(alpha: f64, t: f64, gamma: f64, q: f64) -> Self {
        Self { alpha, t, gamma, q }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.t, self.gamma, self.q]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Lexicographic order on `(alpha, t, gamma, q)`.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// The non-decreasing transform `h` applied to statement sizes in the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostTransform {
    #[default]
    Identity,
    Log1p,
}

impl CostTransform {
    pub fn apply(self, n: usize) -> f64 {
        match self {
            CostTransform::Identity => n as f64,
            CostTransform::Log1p => (n as f64).ln_1p(),
        }
    }
}

impl std::str::FromStr for CostTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "log1p" | "log" => Ok(Self::Log1p),
            other => Err(Error::InvalidConfig(format!(
                "unknown cost transform `{other}` (expected identity or log1p)"
            ))),
        }
    }
}

/// Closed search intervals, one per action coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub alpha: [f64; 2],
    pub t: [f64; 2],
    pub gamma: [f64; 2],
    pub q: [f64; 2],
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            alpha: [0.0, 0.05],
            t: [0.0, 0.1],
            gamma: [0.0, 0.5],
            q: [0.0, 0.1],
        }
    }
}

impl SearchBox {
    pub fn intervals(&self) -> [[f64; 2]; 4] {
        [self.alpha, self.t, self.gamma, self.q]
    }

    pub fn contains(&self, action: &Action) -> bool {
        self.intervals()
            .iter()
            .zip(action.to_array())
            .all(|(iv, v)| iv[0] <= v && v <= iv[1])
    }

    pub fn center(&self) -> Action {
        let c = self.intervals().map(|iv| 0.5 * (iv[0] + iv[1]));
        Action::from_array(c)
    }
}

/// Scoring and search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub h: CostTransform,
    /// Reward is zero for statements with probability below `1 - epsilon`.
    pub epsilon: Option<f64>,
    #[serde(rename = "box")]
    pub search_box: SearchBox,
    /// Increasing alpha values, first one zero. Empty means 21 evenly spaced
    /// points across the alpha interval of the box.
    pub alpha_grid: Vec<f64>,
    /// Starting actions. Empty means the box corners plus the box center.
    pub starts: Vec<Action>,
    /// Initial step as a fraction of each coordinate's box width.
    pub delta0: f64,
    pub delta_min: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            h: CostTransform::Identity,
            epsilon: None,
            search_box: SearchBox::default(),
            alpha_grid: Vec::new(),
            starts: Vec::new(),
            delta0: 0.25,
            delta_min: 1.0 / 1024.0,
        }
    }
}

impl RewardConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_h(mut self, h: CostTransform) -> Self {
        self.h = h;
        self
    }

    /// The alpha grid, filling in the default when none was configured.
    pub fn grid(&self) -> Vec<f64> {
        if !self.alpha_grid.is_empty() {
            return self.alpha_grid.clone();
        }
        let [lo, hi] = self.search_box.alpha;
        (0..=20).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, iv) in ["alpha", "t", "gamma", "q"]
            .iter()
            .zip(self.search_box.intervals())
        {
            if !(0.0 <= iv[0] && iv[0] <= iv[1] && iv[1] <= 1.0) {
                return bad(format!(
                    "box interval for {name} must lie in [0, 1]: {iv:?}"
                ));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return bad(format!("epsilon must lie in (0, 1), got {eps}"));
            }
        }
        if !(self.delta_min > 0.0 && self.delta_min <= self.delta0 && self.delta0 <= 1.0) {
            return bad(format!(
                "need 0 < delta_min <= delta0 <= 1, got delta_min = {}, delta0 = {}",
                self.delta_min, self.delta0
            ));
        }
        let grid = self.grid();
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("alpha grid must be strictly increasing".into());
        }
        let [lo, hi] = self.search_box.alpha;
        if grid.iter().any(|&a| a < lo || a > hi) {
            return bad(format!(
                "alpha grid must lie in the box interval [{lo}, {hi}]"
            ));
        }
        for s in &self.starts {
            if !self.search_box.contains(s) {
                return bad(format!("start {s:?} lies outside the search box"));
            }
        }
        Ok(())
    }
}

/// Size-minus-error measure of a global statement:
/// `{h(|G|) - h(floor(q |G|))} * sum_l {h(n_l) - h(floor(t n_l))}`.
pub fn cost(statement: &GlobalStatement, h: CostTransform) -> f64 {
    let g = statement.members.len();
    if g == 0 {
        return 0.0;
    }
    let global = h.apply(g) - h.apply(floor_mul(statement.action.q, g));
    let local: f64 = statement
        .locals
        .iter()
        .map(|s| {
            let n = s.sets.len();
            h.apply(n) - h.apply(floor_mul(statement.action.t, n))
        })
        .sum();
    global * local
}

/// Cost times probability, zeroed below the credibility floor.
pub fn reward(statement: &GlobalStatement, config: &RewardConfig) -> f64 {
    reward_from_parts(
        cost(statement, config.h),
        statement.hold_count,
        statement.num_draws,
        config.epsilon,
    )
}

pub(crate) fn reward_from_parts(
    cost: f64,
    hold_count: usize,
    num_draws: usize,
    epsilon: Option<f64>,
) -> f64 {
    let prob = hold_count as f64 / num_draws as f64;
    if let Some(eps) = epsilon {
        if prob < 1.0 - eps {
            return 0.0;
        }
    }
    cost * prob
}

/// Fills in `cost` and `reward`.
pub fn score(statement: &mut GlobalStatement, config: &RewardConfig) {
    statement.cost = cost(statement, config.h);
    statement.reward = reward_from_parts(
        statement.cost,
        statement.hold_count,
        statement.num_draws,
        config.epsilon,
    );
}
