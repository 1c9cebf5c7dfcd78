use rayon::prelude::*;

use crate::draws::PosteriorDraws;

/// Pairwise order counts over posterior draws.
///
/// `wins(a, b)` is the number of draws in which entity `a` is strictly above
/// entity `b`. Draws where the two are exactly equal count for neither side
/// and are reported by [`ComparisonCounts::ties`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonCounts {
    num_entities: usize,
    num_draws: usize,
    wins: Vec<u32>,
}

impl ComparisonCounts {
    /// Builds counts from a dense row-major `wins[a * L + b]` matrix.
    pub fn from_wins(num_entities: usize, num_draws: usize, wins: Vec<u32>) -> Self {
        assert_eq!(wins.len(), num_entities * num_entities);
        Self {
            num_entities,
            num_draws,
            wins,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_draws(&self) -> usize {
        self.num_draws
    }

    pub fn wins(&self, winner: usize, loser: usize) -> u32 {
        self.wins[winner * self.num_entities + loser]
    }

    pub fn ties(&self, a: usize, b: usize) -> u32 {
        if a == b {
            return 0;
        }
        self.num_draws as u32 - self.wins(a, b) - self.wins(b, a)
    }

    /// Number of tied (pair, draw) comparisons over unordered pairs.
    pub fn total_ties(&self) -> u64 {
        let mut total = 0u64;
        for a in 0..self.num_entities {
            for b in a + 1..self.num_entities {
                total += self.ties(a, b) as u64;
            }
        }
        total
    }

    /// Unordered pairs with at least one tied draw, as `(a, b, ties)` with `a < b`.
    pub fn tied_pairs(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for a in 0..self.num_entities {
            for b in a + 1..self.num_entities {
                let t = self.ties(a, b);
                if t > 0 {
                    out.push((a, b, t));
                }
            }
        }
        out
    }
}

#[inline]
fn order_counts(a: &[f64], b: &[f64]) -> (u32, u32) {
    let mut above = 0u32;
    let mut below = 0u32;
    for (x, y) in a.iter().zip(b) {
        above += (x > y) as u32;
        below += (x < y) as u32;
    }
    (above, below)
}

/// Counts, for every ordered pair, the draws in which one entity is above the
/// other. `O(M L^2)` work, parallel over entities.
pub fn count_pairwise(draws: &PosteriorDraws) -> ComparisonCounts {
    let n = draws.num_entities();
    let m = draws.num_draws();
    assert!(m <= u32::MAX as usize, "draw count exceeds u32 range");

    // Upper triangle: row a holds (wins(a, b), wins(b, a)) for b > a.
    let upper: Vec<Vec<(u32, u32)>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let col_a = draws.column(a);
            (a + 1..n)
                .map(|b| order_counts(col_a, draws.column(b)))
                .collect()
        })
        .collect();

    let mut wins = vec![0u32; n * n];
    for (a, row) in upper.into_iter().enumerate() {
        for (offset, (above, below)) in row.into_iter().enumerate() {
            let b = a + 1 + offset;
            wins[a * n + b] = above;
            wins[b * n + a] = below;
        }
    }
    ComparisonCounts::from_wins(n, m, wins)
}
