//! Exhaustive-enumeration oracle on exact rational lattices.
//!
//! Every threshold is compared in integers: alpha = a/400, t = b/100,
//! gamma = c/20 and q = d/100.

#![allow(dead_code)]

use bayesrank_core::PosteriorDraws;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHA_DEN: usize = 400;
pub const T_DEN: usize = 100;
pub const GAMMA_DEN: usize = 20;
pub const Q_DEN: usize = 100;

pub const ALPHA_STEPS: usize = 21;
pub const T_STEPS: usize = 11;
pub const GAMMA_STEPS: usize = 11;
pub const Q_STEPS: usize = 11;

pub fn alpha(a: usize) -> f64 {
    a as f64 / ALPHA_DEN as f64
}
pub fn t_of(b: usize) -> f64 {
    b as f64 / T_DEN as f64
}
pub fn gamma_of(c: usize) -> f64 {
    c as f64 / GAMMA_DEN as f64
}
pub fn q_of(d: usize) -> f64 {
    d as f64 / Q_DEN as f64
}

/// Random draws with `L <= max_l` and `M <= max_m`. Half of the instances
/// use small integer values, so ties are common.
pub fn random_rows(rng: &mut ChaCha8Rng, max_l: usize, max_m: usize) -> Vec<Vec<f64>> {
    let l = rng.random_range(1..=max_l);
    let m = rng.random_range(1..=max_m);
    let integer = rng.random_bool(0.5);
    let spread: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..3.0)).collect();
    (0..m)
        .map(|_| {
            (0..l)
                .map(|i| {
                    if integer {
                        rng.random_range(0..4) as f64
                    } else {
                        spread[i] + rng.random::<f64>() * 2.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn draws_of(rows: &[Vec<f64>]) -> PosteriorDraws {
    PosteriorDraws::from_rows_unlabeled(rows).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Oracle over draw-major rows.
pub struct Oracle<'a> {
    pub rows: &'a [Vec<f64>],
    pub l: usize,
    pub m: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(rows: &'a [Vec<f64>]) -> Self {
        Self {
            rows,
            l: rows[0].len(),
            m: rows.len(),
        }
    }

    /// Draws in which `hi` is strictly above `lo`.
    pub fn wins(&self, hi: usize, lo: usize) -> usize {
        self.rows.iter().filter(|r| r[hi] > r[lo]).count()
    }

    /// `(below, above)` at alpha = a / 400: fraction strictly above 1 - alpha.
    pub fn sets(&self, l: usize, a: usize) -> (Vec<usize>, Vec<usize>) {
        let passes = |w: usize| w * ALPHA_DEN > (ALPHA_DEN - a) * self.m;
        let below = (0..self.l)
            .filter(|&o| o != l && passes(self.wins(l, o)))
            .collect();
        let above = (0..self.l)
            .filter(|&o| o != l && passes(self.wins(o, l)))
            .collect();
        (below, above)
    }

    /// Failed elementary statements of entity `l` in draw `i`.
    pub fn failures(&self, i: usize, l: usize, below: &[usize], above: &[usize]) -> usize {
        let r = &self.rows[i];
        below.iter().filter(|&&o| !(r[l] > r[o])).count()
            + above.iter().filter(|&&o| !(r[o] > r[l])).count()
    }

    /// Local indicator at alpha = a/400, t = b/100.
    pub fn local(&self, l: usize, a: usize, b: usize) -> Vec<bool> {
        let (below, above) = self.sets(l, a);
        let n = below.len() + above.len();
        let allowed = b * n / T_DEN;
        (0..self.m)
            .map(|i| self.failures(i, l, &below, &above) <= allowed)
            .collect()
    }

    /// Members at gamma = c/20: local probability at least 1 - gamma.
    pub fn members(&self, locals: &[Vec<bool>], c: usize) -> Vec<usize> {
        (0..self.l)
            .filter(|&l| {
                let hold = locals[l].iter().filter(|&&h| h).count();
                hold * GAMMA_DEN >= (GAMMA_DEN - c) * self.m
            })
            .collect()
    }

    /// Global indicator at q = d/100.
    pub fn global(&self, locals: &[Vec<bool>], members: &[usize], d: usize) -> Vec<bool> {
        let allowed = d * members.len() / Q_DEN;
        (0..self.m)
            .map(|i| members.iter().filter(|&&l| !locals[l][i]).count() <= allowed)
            .collect()
    }

    /// Identity-transform cost in integers.
    pub fn cost_identity(&self, sizes: &[usize], b: usize, d: usize) -> usize {
        let g = sizes.len();
        if g == 0 {
            return 0;
        }
        (g - d * g / Q_DEN) * sizes.iter().map(|&n| n - b * n / T_DEN).sum::<usize>()
    }

    pub fn cost_log1p(&self, sizes: &[usize], b: usize, d: usize) -> f64 {
        let h = |x: usize| (x as f64).ln_1p();
        let g = sizes.len();
        if g == 0 {
            return 0.0;
        }
        (h(g) - h(d * g / Q_DEN)) * sizes.iter().map(|&n| h(n) - h(b * n / T_DEN)).sum::<f64>()
    }

    /// Whether the statement with the given member sets holds at `truth`.
    pub fn holds_at(
        truth: &[f64],
        members: &[(usize, Vec<usize>, Vec<usize>)],
        b: usize,
        d: usize,
    ) -> bool {
        let failing = members
            .iter()
            .filter(|(l, below, above)| {
                let n = below.len() + above.len();
                let f = below.iter().filter(|&&o| !(truth[*l] > truth[o])).count()
                    + above.iter().filter(|&&o| !(truth[o] > truth[*l])).count();
                f > b * n / T_DEN
            })
            .count();
        failing <= d * members.len() / Q_DEN
    }
}

/// Reachability by Floyd-Warshall over `n` nodes.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                out.push((i, j));
            }
        }
    }
    out
}

/// Draws with every entity in the same strict order in every draw.
pub fn concentrated_rows(l: usize, m: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..l).collect();
    for i in (1..l).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    // order[k] is the entity at rank k (lowest first)
    let mut row = vec![0.0; l];
    for (rank, &e) in order.iter().enumerate() {
        row[e] = rank as f64 * 1.5 + 0.25;
    }
    (vec![row; m], order)
}

use bayesrank_core::reward::score;
use bayesrank_core::{
    count_pairwise, global_probability, global_set, local_indicator, local_sets, CostTransform,
    RewardConfig, StatementCache,
};

/// Compares every lattice action of one instance with the oracle. Returns
/// the number of actions checked or a description of the first mismatch.
pub fn check_oracle(rows: &[Vec<f64>]) -> Result<usize, String> {
    let draws = draws_of(rows);
    let oracle = Oracle::new(rows);
    let (l, m) = (oracle.l, oracle.m);
    let counts = count_pairwise(&draws);
    for hi in 0..l {
        for lo in 0..l {
            if counts.wins(hi, lo) as usize != oracle.wins(hi, lo) {
                return Err(format!("wins[{hi}][{lo}]"));
            }
        }
    }
    let identity = RewardConfig::default().with_epsilon(0.1);
    let log1p = RewardConfig::default().with_h(CostTransform::Log1p);
    let grid: Vec<f64> = (0..ALPHA_STEPS).map(alpha).collect();
    let cache = StatementCache::new(&draws, &counts, &grid).map_err(|e| e.to_string())?;
    let mut checked = 0;

    for a in 0..ALPHA_STEPS {
        let mut sets = Vec::with_capacity(l);
        for e in 0..l {
            let s = local_sets(&counts, e, alpha(a)).map_err(|e| e.to_string())?;
            let (below, above) = oracle.sets(e, a);
            if s.below != below || s.above != above {
                return Err(format!("sets of {e} at alpha {}", alpha(a)));
            }
            sets.push(s);
        }
        let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
        for b in 0..T_STEPS {
            let locals: Vec<Vec<bool>> = (0..l).map(|e| oracle.local(e, a, b)).collect();
            for (e, s) in sets.iter().enumerate() {
                let got = local_indicator(&draws, s, t_of(b)).map_err(|e| e.to_string())?;
                if got != locals[e] {
                    return Err(format!(
                        "indicator of {e} at alpha {} t {}",
                        alpha(a),
                        t_of(b)
                    ));
                }
            }
            for c in 0..GAMMA_STEPS {
                let members = oracle.members(&locals, c);
                let skeleton = global_set(&draws, &counts, alpha(a), t_of(b), gamma_of(c))
                    .map_err(|e| e.to_string())?;
                if skeleton.members != members {
                    return Err(format!(
                        "members at ({}, {}, {})",
                        alpha(a),
                        t_of(b),
                        gamma_of(c)
                    ));
                }
                let member_sizes: Vec<usize> = members.iter().map(|&e| sizes[e]).collect();
                for d in 0..Q_STEPS {
                    let tag = format!("({}, {}, {}, {})", alpha(a), t_of(b), gamma_of(c), q_of(d));
                    let expected = oracle.global(&locals, &members, d);
                    let hold = expected.iter().filter(|&&h| h).count();
                    let mut st =
                        global_probability(&skeleton, q_of(d)).map_err(|e| e.to_string())?;
                    if st.holds != expected || st.hold_count != hold {
                        return Err(format!("global indicator at {tag}"));
                    }
                    if members.is_empty() && st.hold_count != m {
                        return Err(format!("empty statement probability at {tag}"));
                    }

                    let cost = oracle.cost_identity(&member_sizes, b, d) as f64;
                    let prob = hold as f64 / m as f64;
                    let reward = if hold * 10 < 9 * m { 0.0 } else { cost * prob };
                    score(&mut st, &identity);
                    if st.cost != cost || st.reward != reward {
                        return Err(format!(
                            "identity cost/reward at {tag}: {} / {} vs {cost} / {reward}",
                            st.cost, st.reward
                        ));
                    }
                    let action = st.action;
                    let ev = cache
                        .evaluate(&action, &identity)
                        .map_err(|e| e.to_string())?;
                    if ev.members != members
                        || ev.hold_count != hold
                        || ev.cost != cost
                        || ev.reward != reward
                    {
                        return Err(format!("cached evaluation at {tag}"));
                    }

                    let cost_log = oracle.cost_log1p(&member_sizes, b, d);
                    score(&mut st, &log1p);
                    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
                    if !close(st.cost, cost_log) || !close(st.reward, cost_log * prob) {
                        return Err(format!("log1p cost at {tag}: {} vs {cost_log}", st.cost));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

use bayesrank_core::model::{Encounter, EncounterTable};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};

pub fn player_ids(l: usize) -> Vec<String> {
    (0..l).map(|i| format!("p{i:02}")).collect()
}

/// Encounters of two random disjoint lineups with normal point differences.
pub fn random_table(l: usize, n: usize, truth: &[f64], sigma: f64, seed: u64) -> EncounterTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let encounters = (0..n)
        .map(|_| {
            let picked = rand::seq::index::sample(&mut rng, l, 10).into_vec();
            let mean: f64 = picked[..5].iter().map(|&p| truth[p]).sum::<f64>()
                - picked[5..].iter().map(|&p| truth[p]).sum::<f64>();
            let diff = (mean + noise.sample(&mut rng)).round() as i64;
            Encounter::new(&picked[..5], &picked[5..], diff).unwrap()
        })
        .collect();
    EncounterTable::new(l, encounters).unwrap()
}

/// Mean and covariance in data space:
/// `mu 1 + V X' (X V X' + s2 I)^-1 (y - X mu 1)` and `V - V X' (X V X' + s2 I)^-1 X V`.
pub fn woodbury(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    mu: f64,
    sigma2: f64,
    v: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let p = x.ncols();
    let vd = DMatrix::from_diagonal(&DVector::from_column_slice(v));
    let k = x * &vd * x.transpose() + DMatrix::identity(x.nrows(), x.nrows()) * sigma2;
    let kinv = k.try_inverse().unwrap();
    let prior_mean = DVector::from_element(p, mu);
    let gain = &vd * x.transpose() * &kinv;
    let mean = &prior_mean + &gain * (y - x * &prior_mean);
    let cov = &vd - &gain * x * &vd;
    (mean, cov)
}

/// Checks the probability inequalities and set containment over the whole
/// lattice in integer arithmetic. Returns the number of actions checked.
pub fn check_monotone(rows: &[Vec<f64>]) -> Result<usize, String> {
    let draws = draws_of(rows);
    let m = draws.num_draws();
    let l = draws.num_entities();
    let counts = count_pairwise(&draws);
    let err = |e: bayesrank_core::Error| e.to_string();
    let mut checked = 0;
    for a in 0..ALPHA_STEPS {
        let sets: Vec<_> = (0..l)
            .map(|e| local_sets(&counts, e, alpha(a)))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for (e, s) in sets.iter().enumerate() {
            if a + 1 < ALPHA_STEPS {
                let wider = local_sets(&counts, e, alpha(a + 1)).map_err(err)?;
                if !s.below.iter().all(|x| wider.below.contains(x))
                    || !s.above.iter().all(|x| wider.above.contains(x))
                {
                    return Err(format!(
                        "sets of {e} grow as alpha falls below {}",
                        alpha(a + 1)
                    ));
                }
            }
            // P(A_l at t = 0) >= 1 - alpha |below u above|
            let hold = local_indicator(&draws, s, 0.0)
                .map_err(err)?
                .iter()
                .filter(|&&h| h)
                .count();
            if ALPHA_DEN * (m - hold) > a * s.len() * m {
                return Err(format!("local union bound of {e} at alpha {}", alpha(a)));
            }
        }
        for b in 0..T_STEPS {
            let mut previous: Option<Vec<usize>> = None;
            for c in 0..GAMMA_STEPS {
                let skeleton =
                    global_set(&draws, &counts, alpha(a), t_of(b), gamma_of(c)).map_err(err)?;
                let tag = format!("({}, {}, {})", alpha(a), t_of(b), gamma_of(c));
                if let Some(p) = &previous {
                    if !p.iter().all(|x| skeleton.members.contains(x)) {
                        return Err(format!("members shrink as gamma grows at {tag}"));
                    }
                }
                let exact = global_probability(&skeleton, 0.0).map_err(err)?;
                let g = exact.members.len();
                if GAMMA_DEN * (m - exact.hold_count) > c * g * m {
                    return Err(format!("global union bound at {tag}"));
                }
                if exact.locals.iter().any(|x| x.hold_count < exact.hold_count) {
                    return Err(format!("member local below global probability at {tag}"));
                }
                let mut last = exact.hold_count;
                for d in 1..Q_STEPS {
                    let hold = global_probability(&skeleton, q_of(d))
                        .map_err(err)?
                        .hold_count;
                    if hold < last {
                        return Err(format!(
                            "probability falls as q rises to {} at {tag}",
                            q_of(d)
                        ));
                    }
                    last = hold;
                }
                checked += Q_STEPS;
                previous = Some(skeleton.members);
            }
        }
    }
    Ok(checked)
}
