use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::encounter::EncounterTable;

/// Signed incidence structure of the point-difference regression.
///
/// Row `i` has `+1` for every player of lineup A and `-1` for every player of
/// lineup B. The reference player's column is dropped, so the free
/// coefficients are the abilities of the other `L - 1` players.
#[derive(Debug, Clone)]
pub struct Design {
    pub num_players: usize,
    pub reference: usize,
    /// Sparse rows as `(free column, sign)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub response: Vec<f64>,
}

impl Design {
    pub fn num_free(&self) -> usize {
        self.num_players - 1
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Free column of `player`, `None` for the reference.
    pub fn column_of(&self, player: usize) -> Option<usize> {
        match player.cmp(&self.reference) {
            std::cmp::Ordering::Less => Some(player),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(player - 1),
        }
    }

    pub fn player_of(&self, column: usize) -> usize {
        if column < self.reference {
            column
        } else {
            column + 1
        }
    }

    /// Full ability vector with the reference at zero.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_players];
        for (c, &v) in free.iter().enumerate() {
            full[self.player_of(c)] = v;
        }
        full
    }

    /// Model mean of every point difference given free abilities.
    pub fn mean(&self, free: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, s)| s * free[c]).sum())
            .collect()
    }

    /// Residual sum of squares at `free`.
    pub fn rss(&self, free: &[f64]) -> f64 {
        self.mean(free)
            .iter()
            .zip(&self.response)
            .map(|(m, y)| (y - m).powi(2))
            .sum()
    }

    /// `X^T X` as a dense matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let p = self.num_free();
        let mut g = DMatrix::zeros(p, p);
        for row in &self.rows {
            for &(a, sa) in row {
                for &(b, sb) in row {
                    g[(a, b)] += sa * sb;
                }
            }
        }
        g
    }

    /// `X^T y`.
    pub fn cross(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.num_free());
        for (row, y) in self.rows.iter().zip(&self.response) {
            for &(c, s) in row {
                v[c] += s * y;
            }
        }
        v
    }

    /// Dense `N x (L - 1)` design matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.num_rows(), self.num_free());
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, s) in row {
                x[(i, c)] = s;
            }
        }
        x
    }
}

/// Builds the regression design for `table`, pinning `reference` at zero.
pub fn build_design(table: &EncounterTable, reference: usize) -> Result<Design> {
    let l = table.num_players;
    if reference >= l {
        return Err(Error::IndexOutOfRange {
            index: reference,
            len: l,
        });
    }
    let mut design = Design {
        num_players: l,
        reference,
        rows: Vec::with_capacity(table.len()),
        response: Vec::with_capacity(table.len()),
    };
    for (i, e) in table.encounters.iter().enumerate() {
        let a = e.lineup_a.players();
        let b = e.lineup_b.players();
        if let Some(&p) = a.iter().chain(b).find(|&&p| p >= l) {
            return Err(Error::InvalidEncounter(format!(
                "encounter {i} references player {p} of {l}"
            )));
        }
        if let Some(p) = a.iter().find(|p| e.lineup_b.contains(**p)) {
            return Err(Error::InvalidEncounter(format!(
                "encounter {i}: player {p} is in both lineups"
            )));
        }
        let mut row = Vec::with_capacity(10);
        for &p in a {
            if let Some(c) = design.column_of(p) {
                row.push((c, 1.0));
            }
        }
        for &p in b {
            if let Some(c) = design.column_of(p) {
                row.push((c, -1.0));
            }
        }
        design.rows.push(row);
        design.response.push(e.diff as f64);
    }
    if design.num_rows() < design.num_free() {
        log::warn!(
            "{} encounters for {} free abilities: the design cannot have full column rank",
            design.num_rows(),
            design.num_free()
        );
    }
    Ok(design)
}
