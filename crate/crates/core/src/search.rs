//! Reward-optimal global statements by multi-start pattern search.
//!
//! The local sets and per-draw failure counts depend only on `alpha`, so they
//! are computed once per grid value before searching. Any action on the grid
//! is then scored in `O(L + M |G|)`.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::pairwise::ComparisonCounts;
use crate::reward::{self, Action, RewardConfig};
use crate::statement::{local_sets, GlobalStatement, LocalStatement};
use crate::threshold::{at_least_count, exceed_count, floor_mul};

const MAX_CACHE_ENTITIES: usize = 1 << 15;

/// Failure counts of one entity's local statement at one alpha level.
#[derive(Debug)]
struct LocalTable {
    size: usize,
    /// Failed elementary statements in each draw.
    failures: Box<[u16]>,
    /// `cumulative[b]` = draws with at most `b` failures.
    cumulative: Box<[u32]>,
}

#[derive(Debug)]
struct Level {
    alpha: f64,
    tables: Vec<Arc<LocalTable>>,
    total_size: usize,
}

/// Score of one action, without the per-draw detail.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub action: Action,
    pub members: Vec<usize>,
    pub hold_count: usize,
    pub cost: f64,
    pub reward: f64,
}

/// Per-alpha local statement tables over one set of draws.
pub struct StatementCache<'a> {
    draws: &'a PosteriorDraws,
    counts: &'a ComparisonCounts,
    levels: Vec<Level>,
}

impl<'a> StatementCache<'a> {
    /// Precomputes local sets and failure counts at every grid value.
    pub fn new(
        draws: &'a PosteriorDraws,
        counts: &'a ComparisonCounts,
        grid: &[f64],
    ) -> Result<Self> {
        let n = draws.num_entities();
        let m = draws.num_draws();
        if counts.num_entities() != n || counts.num_draws() != m {
            return Err(Error::InvalidDraws(
                "comparison counts do not match the draws".into(),
            ));
        }
        // Below and above sets may overlap for alpha > 0.5, so a local
        // statement can hold up to 2 (L - 1) comparisons.
        if n > MAX_CACHE_ENTITIES {
            return Err(Error::InvalidDraws(format!(
                "{n} entities exceed the statement cache limit of {MAX_CACHE_ENTITIES}"
            )));
        }
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "alpha grid must be non-empty and strictly increasing".into(),
            ));
        }
        for &a in grid {
            crate::statement::check_unit("alpha", a)?;
        }
        // Thresholds fall as alpha grows, so each entity's sets only grow
        // along the grid and failure counts can be extended incrementally.
        let needs: Vec<u64> = grid
            .iter()
            .map(|&a| exceed_count(1.0 - a, m) as u64)
            .collect();

        let per_entity: Vec<Vec<Arc<LocalTable>>> = (0..n)
            .into_par_iter()
            .map(|l| {
                let own = draws.column(l);
                let mut failures = vec![0u16; m];
                let mut in_above = vec![false; n];
                let mut in_below = vec![false; n];
                let mut size = 0usize;
                let mut current: Option<Arc<LocalTable>> = None;
                let mut tables = Vec::with_capacity(needs.len());
                for &need in &needs {
                    let mut changed = false;
                    for other in (0..n).filter(|&o| o != l) {
                        if !in_above[other] && counts.wins(other, l) as u64 >= need {
                            in_above[other] = true;
                            size += 1;
                            changed = true;
                            for ((f, x), y) in failures.iter_mut().zip(own).zip(draws.column(other))
                            {
                                *f += !(y > x) as u16;
                            }
                        }
                        if !in_below[other] && counts.wins(l, other) as u64 >= need {
                            in_below[other] = true;
                            size += 1;
                            changed = true;
                            for ((f, x), y) in failures.iter_mut().zip(own).zip(draws.column(other))
                            {
                                *f += !(x > y) as u16;
                            }
                        }
                    }
                    let table = match (&current, changed) {
                        (Some(t), false) => Arc::clone(t),
                        _ => {
                            let mut hist = vec![0u32; size + 1];
                            for &f in &failures {
                                hist[f as usize] += 1;
                            }
                            for b in 1..hist.len() {
                                hist[b] += hist[b - 1];
                            }
                            Arc::new(LocalTable {
                                size,
                                failures: failures.clone().into_boxed_slice(),
                                cumulative: hist.into_boxed_slice(),
                            })
                        }
                    };
                    current = Some(Arc::clone(&table));
                    tables.push(table);
                }
                tables
            })
            .collect();

        let levels = grid
            .iter()
            .enumerate()
            .map(|(k, &alpha)| {
                let tables: Vec<Arc<LocalTable>> =
                    per_entity.iter().map(|t| Arc::clone(&t[k])).collect();
                let total_size = tables.iter().map(|t| t.size).sum();
                Level {
                    alpha,
                    tables,
                    total_size,
                }
            })
            .collect();
        Ok(Self {
            draws,
            counts,
            levels,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.alpha).collect()
    }

    pub fn num_draws(&self) -> usize {
        self.draws.num_draws()
    }

    /// Index of the grid value nearest to `alpha`; ties go to the smaller value.
    pub fn snap_alpha(&self, alpha: f64) -> usize {
        let mut best = 0;
        for (k, level) in self.levels.iter().enumerate() {
            if (level.alpha - alpha).abs() < (self.levels[best].alpha - alpha).abs() {
                best = k;
            }
        }
        best
    }

    fn grid_index(&self, alpha: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l.alpha == alpha)
            .ok_or_else(|| Error::InvalidConfig(format!("alpha {alpha} is not on the grid")))
    }

    /// Scores `action`, whose alpha must be a grid value.
    pub fn evaluate(&self, action: &Action, config: &RewardConfig) -> Result<Evaluation> {
        for (name, v) in [("t", action.t), ("gamma", action.gamma), ("q", action.q)] {
            crate::statement::check_unit(name, v)?;
        }
        let k = self.grid_index(action.alpha)?;
        Ok(self.evaluate_level(k, action, config))
    }

    fn evaluate_level(&self, k: usize, action: &Action, config: &RewardConfig) -> Evaluation {
        let level = &self.levels[k];
        let m = self.num_draws();
        let need = at_least_count(1.0 - action.gamma, m);
        let mut members = Vec::new();
        let mut budgets = Vec::new();
        for (l, table) in level.tables.iter().enumerate() {
            let b = floor_mul(action.t, table.size);
            if table.cumulative[b] as usize >= need {
                members.push(l);
                budgets.push(b);
            }
        }

        let allowed = floor_mul(action.q, members.len()) as u32;
        let mut failing = vec![0u32; m];
        for (&l, &b) in members.iter().zip(&budgets) {
            let table = &level.tables[l];
            if table.cumulative[b] as usize == m {
                continue;
            }
            let b = b as u16;
            for (f, &x) in failing.iter_mut().zip(table.failures.iter()) {
                *f += (x > b) as u32;
            }
        }
        let hold_count = failing.iter().filter(|&&f| f <= allowed).count();

        let h = config.h;
        let cost = if members.is_empty() {
            0.0
        } else {
            let g = members.len();
            let global = h.apply(g) - h.apply(floor_mul(action.q, g));
            let local: f64 = members
                .iter()
                .zip(&budgets)
                .map(|(&l, &b)| h.apply(level.tables[l].size) - h.apply(b))
                .sum();
            global * local
        };
        let reward = reward::reward_from_parts(cost, hold_count, m, config.epsilon);
        Evaluation {
            action: *action,
            members,
            hold_count,
            cost,
            reward,
        }
    }

    /// Full scored statement of `action`, whose alpha must be a grid value.
    pub fn statement(&self, action: &Action, config: &RewardConfig) -> Result<GlobalStatement> {
        let eval = self.evaluate(action, config)?;
        let k = self.grid_index(action.alpha)?;
        let level = &self.levels[k];
        let m = self.num_draws();
        let locals: Vec<LocalStatement> = eval
            .members
            .iter()
            .map(|&l| {
                let sets = local_sets(self.counts, l, action.alpha)?;
                let table = &level.tables[l];
                debug_assert_eq!(sets.len(), table.size);
                let b = floor_mul(action.t, table.size) as u16;
                let holds: Vec<bool> = table.failures.iter().map(|&f| f <= b).collect();
                let hold_count = table.cumulative[b as usize] as usize;
                Ok(LocalStatement {
                    sets,
                    t: action.t,
                    holds,
                    hold_count,
                })
            })
            .collect::<Result<_>>()?;
        let allowed = floor_mul(action.q, locals.len());
        let mut failing = vec![0usize; m];
        for local in &locals {
            for (f, &h) in failing.iter_mut().zip(&local.holds) {
                *f += !h as usize;
            }
        }
        let holds: Vec<bool> = failing.iter().map(|&f| f <= allowed).collect();
        let hold_count = holds.iter().filter(|&&h| h).count();
        debug_assert_eq!(hold_count, eval.hold_count);
        Ok(GlobalStatement {
            action: *action,
            members: eval.members,
            locals,
            holds,
            hold_count,
            num_draws: m,
            cost: eval.cost,
            reward: eval.reward,
        })
    }

    /// Smallest action in the box that yields the same statement as `eval`.
    ///
    /// The reward is piecewise constant, so the search ends somewhere on a
    /// plateau. Each coordinate is lowered to the plateau's lower edge: alpha
    /// to the first grid value with the same local sets, `t` and `q` to the
    /// smallest values with the same failure budgets, `gamma` to the smallest
    /// value that keeps every member.
    pub fn canonical_action(&self, eval: &Evaluation, config: &RewardConfig) -> Action {
        let bx = &config.search_box;
        let a = eval.action;
        let Ok(k) = self.grid_index(a.alpha) else {
            return a;
        };
        let total = self.levels[k].total_size;
        let kc = (0..=k)
            .find(|&j| self.levels[j].total_size == total && self.levels[j].alpha >= bx.alpha[0])
            .unwrap_or(k);
        let level = &self.levels[kc];

        let mut t = 0.0f64;
        for table in &level.tables {
            if table.size > 0 {
                let b = floor_mul(a.t, table.size);
                t = t.max(b as f64 / table.size as f64);
            }
        }
        let t = t.max(bx.t[0]).min(a.t);

        let m = self.num_draws();
        let gamma = match eval
            .members
            .iter()
            .map(|&l| {
                let table = &level.tables[l];
                table.cumulative[floor_mul(a.t, table.size)] as usize
            })
            .min()
        {
            Some(min_count) => (1.0 - min_count as f64 / m as f64).max(0.0),
            None => a.gamma,
        };
        let gamma = gamma.max(bx.gamma[0]).min(a.gamma);

        let g = eval.members.len();
        let q = if g > 0 {
            floor_mul(a.q, g) as f64 / g as f64
        } else {
            a.q
        };
        let q = q.max(bx.q[0]).min(a.q);

        let candidate = Action::new(level.alpha, t, gamma, q);
        let check = self.evaluate_level(kc, &candidate, config);
        if check.members == eval.members
            && check.hold_count == eval.hold_count
            && check.reward == eval.reward
        {
            candidate
        } else {
            log::warn!("canonical action {candidate:?} changed the statement of {a:?}; keeping it");
            a
        }
    }
}

/// Result of one pattern search run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub start: Action,
    pub action: Action,
    pub reward: f64,
    pub statement: GlobalStatement,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Result of a multi-start search.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub best: SearchOutcome,
    /// `(start, end, reward)` of every run, in start order.
    pub runs: Vec<(Action, Action, f64)>,
}

type Key = (usize, u64, u64, u64);

const MAX_ITERATIONS: usize = 100_000;

/// Pattern search from `start`.
///
/// Each iteration scores the `3^4` coordinate-wise perturbations of size
/// `delta` times the box width (clamped to the box, alpha snapped to the
/// grid). The search moves to the best perturbation if it strictly improves
/// the reward, breaking ties toward the lexicographically smallest action;
/// otherwise `delta` is halved, and the search stops once `delta / 2` drops
/// below `delta_min`. A positive-reward result is reported at the lower edge
/// of its reward plateau (see [`StatementCache::canonical_action`]).
pub fn pattern_search(
    cache: &StatementCache<'_>,
    config: &RewardConfig,
    start: Action,
) -> Result<SearchOutcome> {
    config.validate()?;
    if !config.search_box.contains(&start) {
        return Err(Error::InvalidConfig(format!(
            "start {start:?} lies outside the search box"
        )));
    }
    let k0 = cache.grid_index(start.alpha)?;
    let widths = config.search_box.intervals().map(|iv| iv[1] - iv[0]);
    let intervals = config.search_box.intervals();
    let grid = cache.grid();

    let mut memo: HashMap<Key, Evaluation> = HashMap::new();
    let key = |k: usize, a: &Action| (k, a.t.to_bits(), a.gamma.to_bits(), a.q.to_bits());

    let mut current = (k0, start);
    let first = cache.evaluate_level(k0, &start, config);
    memo.insert(key(k0, &start), first.clone());
    let mut best = first;
    let mut delta = config.delta0;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let base = current.1.to_array();
        let mut candidates: Vec<(usize, Action)> = Vec::with_capacity(81);
        for code in 0..81usize {
            let mut point = base;
            let mut c = code;
            for d in 0..4 {
                let offset = (c % 3) as f64 - 1.0;
                c /= 3;
                let [lo, hi] = intervals[d];
                point[d] = (point[d] + offset * delta * widths[d]).clamp(lo, hi);
            }
            let k = cache.snap_alpha(point[0]);
            point[0] = grid[k];
            candidates.push((k, Action::from_array(point)));
        }
        let missing: Vec<(usize, Action)> = {
            let mut seen = std::collections::HashSet::new();
            candidates
                .iter()
                .filter(|(k, a)| !memo.contains_key(&key(*k, a)) && seen.insert(key(*k, a)))
                .copied()
                .collect()
        };
        let fresh: Vec<Evaluation> = missing
            .par_iter()
            .map(|(k, a)| cache.evaluate_level(*k, a, config))
            .collect();
        for ((k, a), e) in missing.iter().zip(fresh) {
            memo.insert(key(*k, a), e);
        }

        let mut top: Option<(usize, &Evaluation)> = None;
        for (k, a) in &candidates {
            let e = &memo[&key(*k, a)];
            top = match top {
                None => Some((*k, e)),
                Some((tk, te)) => {
                    if e.reward > te.reward
                        || (e.reward == te.reward && e.action.lex_cmp(&te.action).is_lt())
                    {
                        Some((*k, e))
                    } else {
                        Some((tk, te))
                    }
                }
            };
        }
        let (tk, te) = top.expect("81 candidates");
        if te.reward > best.reward {
            current = (tk, te.action);
            best = te.clone();
        } else {
            if delta / 2.0 < config.delta_min {
                break;
            }
            delta /= 2.0;
        }
    }

    let action = if best.reward > 0.0 {
        cache.canonical_action(&best, config)
    } else {
        best.action
    };
    let statement = cache.statement(&action, config)?;
    Ok(SearchOutcome {
        start,
        action,
        reward: statement.reward,
        statement,
        iterations,
        evaluations: memo.len(),
    })
}

/// Box corners (alpha snapped to the grid, duplicates removed) plus the center.
pub fn default_starts(config: &RewardConfig) -> Vec<Action> {
    let grid = config.grid();
    let snap = |alpha: f64| {
        let mut best = grid[0];
        for &g in &grid {
            if (g - alpha).abs() < (best - alpha).abs() {
                best = g;
            }
        }
        best
    };
    let iv = config.search_box.intervals();
    let mut starts: Vec<Action> = Vec::new();
    for corner in 0..16usize {
        let mut p = [0.0; 4];
        for d in 0..4 {
            p[d] = iv[d][(corner >> (3 - d)) & 1];
        }
        p[0] = snap(p[0]);
        let a = Action::from_array(p);
        if !starts.contains(&a) {
            starts.push(a);
        }
    }
    let mut center = config.search_box.center();
    center.alpha = snap(center.alpha);
    if !starts.contains(&center) {
        starts.push(center);
    }
    starts
}

/// Runs [`pattern_search`] from every configured start and keeps the best.
pub fn optimize(
    draws: &PosteriorDraws,
    counts: &ComparisonCounts,
    config: &RewardConfig,
) -> Result<OptimizeOutcome> {
    config.validate()?;
    let cache = StatementCache::new(draws, counts, &config.grid())?;
    optimize_with_cache(&cache, config)
}

pub fn optimize_with_cache(
    cache: &StatementCache<'_>,
    config: &RewardConfig,
) -> Result<OptimizeOutcome> {
    let starts = if config.starts.is_empty() {
        default_starts(config)
    } else {
        config.starts.clone()
    };
    if starts.is_empty() {
        return Err(Error::InvalidConfig("no starting actions".into()));
    }
    let outcomes: Vec<SearchOutcome> = starts
        .par_iter()
        .map(|&s| pattern_search(cache, config, s))
        .collect::<Result<_>>()?;
    let runs = outcomes
        .iter()
        .map(|o| (o.start, o.action, o.reward))
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| {
            if b.reward > a.reward || (b.reward == a.reward && b.action.lex_cmp(&a.action).is_lt())
            {
                b
            } else {
                a
            }
        })
        .expect("at least one start");
    Ok(OptimizeOutcome { best, runs })
}
