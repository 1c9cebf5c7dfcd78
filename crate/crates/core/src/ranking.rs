//! Partial orders implied by error-free global statements.
//!
//! With `t = q = 0` every elementary statement of every member holds jointly
//! with the statement's probability, so the union of those comparisons is a
//! relation whose transitive closure is credible at that level. Each maximal
//! chain of the closure is a ranking.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::reward::Action;
use crate::statement::GlobalStatement;

/// Upper bound on the number of maximal chains enumerated.
pub const DEFAULT_MAX_CHAINS: usize = 10_000;

/// Comparison graph over entities. Every edge `(a, b)` means `a` is below `b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankingGraph {
    /// Entities touched by at least one comparison, ascending.
    pub nodes: Vec<usize>,
    /// Comparisons stated directly by the local statements.
    pub edges: Vec<(usize, usize)>,
    /// Transitive closure of `edges`.
    pub closure: Vec<(usize, usize)>,
    /// Transitive reduction (Hasse diagram) of the closure.
    pub hasse: Vec<(usize, usize)>,
    /// Maximal chains, each listed from lowest to highest.
    pub chains: Vec<Vec<usize>>,
    /// True when chain enumeration stopped at the limit.
    pub chains_truncated: bool,
}

#[derive(Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

/// Collects the directly stated comparisons of the members' local statements.
pub fn statement_edges(statement: &GlobalStatement) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for local in &statement.locals {
        let l = local.sets.entity;
        for &b in &local.sets.below {
            edges.insert((b, l));
        }
        for &a in &local.sets.above {
            edges.insert((l, a));
        }
    }
    edges
}

/// Builds the ranking graph of an error-free statement.
pub fn derive_rankings(statement: &GlobalStatement) -> Result<RankingGraph> {
    derive_rankings_with_limit(statement, DEFAULT_MAX_CHAINS)
}

pub fn derive_rankings_with_limit(
    statement: &GlobalStatement,
    max_chains: usize,
) -> Result<RankingGraph> {
    let Action { t, q, .. } = statement.action;
    if t != 0.0 || q != 0.0 {
        return Err(Error::NotErrorFree { t, q });
    }
    rankings_from_edges(statement_edges(statement), max_chains)
}

/// Closure, reduction and maximal chains of an arbitrary edge set.
pub fn rankings_from_edges(
    edges: BTreeSet<(usize, usize)>,
    max_chains: usize,
) -> Result<RankingGraph> {
    let nodes: Vec<usize> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = nodes.len();
    let local = |e: usize| nodes.binary_search(&e).expect("node present");
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(a, b) in &edges {
        succ[local(a)].push(local(b));
        indegree[local(b)] += 1;
    }

    let order = topological_order(&succ, indegree.clone())
        .map_err(|cycle| Error::Cycle(cycle.into_iter().map(|v| nodes[v]).collect()))?;

    let mut reach = vec![BitSet::new(n); n];
    for &u in order.iter().rev() {
        let mut r = BitSet::new(n);
        for &v in &succ[u] {
            r.insert(v);
            r.union_with(&reach[v]);
        }
        reach[u] = r;
    }

    let mut closure = Vec::new();
    let mut hasse_succ = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    for u in 0..n {
        let mut covered = BitSet::new(n);
        for w in reach[u].iter() {
            covered.union_with(&reach[w]);
        }
        for v in reach[u].iter() {
            closure.push((nodes[u], nodes[v]));
            if !covered.contains(v) {
                hasse_succ[u].push(v);
                has_pred[v] = true;
            }
        }
    }
    closure.sort_unstable();
    let mut hasse: Vec<(usize, usize)> = hasse_succ
        .iter()
        .enumerate()
        .flat_map(|(u, vs)| {
            let nodes = &nodes;
            vs.iter().map(move |&v| (nodes[u], nodes[v]))
        })
        .collect();
    hasse.sort_unstable();

    let mut chains = Vec::new();
    let mut truncated = false;
    for source in (0..n).filter(|&v| !has_pred[v]) {
        let mut path = vec![source];
        collect_chains(
            &hasse_succ,
            &mut path,
            &mut chains,
            max_chains,
            &mut truncated,
        );
    }
    let chains = chains
        .into_iter()
        .map(|c: Vec<usize>| c.into_iter().map(|v| nodes[v]).collect())
        .collect();

    Ok(RankingGraph {
        nodes,
        edges: edges.into_iter().collect(),
        closure,
        hasse,
        chains,
        chains_truncated: truncated,
    })
}

fn collect_chains(
    succ: &[Vec<usize>],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
    truncated: &mut bool,
) {
    if out.len() >= limit {
        *truncated = true;
        return;
    }
    let last = *path.last().expect("non-empty path");
    if succ[last].is_empty() {
        out.push(path.clone());
        return;
    }
    for &next in &succ[last] {
        path.push(next);
        collect_chains(succ, path, out, limit, truncated);
        path.pop();
    }
}

/// Kahn's algorithm; on failure returns one cycle.
fn topological_order(
    succ: &[Vec<usize>],
    mut indegree: Vec<usize>,
) -> Result<Vec<usize>, Vec<usize>> {
    let n = succ.len();
    let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in &succ[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                stack.push(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unsorted node keeps an unsorted predecessor and successor; walk
    // successors until a node repeats.
    let remaining: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
    let start = (0..n).find(|&v| remaining[v]).expect("cycle exists");
    let mut seen_at = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while seen_at[v] == usize::MAX {
        seen_at[v] = walk.len();
        walk.push(v);
        v = *succ[v]
            .iter()
            .find(|&&w| remaining[w])
            .expect("remaining node has a remaining successor");
    }
    Err(walk[seen_at[v]..].to_vec())
}
