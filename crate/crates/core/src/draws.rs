use std::collections::HashSet;

use crate::error::{Error, Result};

/// Posterior draws of `L` entity abilities, `M` draws each.
///
/// Values are stored entity-major: the `M` draws of one entity are
/// contiguous, which is the access pattern of every pairwise comparison.
/// The matrix is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    ids: Vec<String>,
    num_draws: usize,
    columns: Vec<f64>,
}

impl PosteriorDraws {
    /// Builds draws from draw-major rows (one row per draw, one value per entity).
    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let num_entities = ids.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_entities {
                return Err(Error::InvalidDraws(format!(
                    "draw {i} has {} values, expected {num_entities}",
                    row.len()
                )));
            }
        }
        let mut columns = vec![0.0; num_entities * rows.len()];
        for (i, row) in rows.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                columns[l * rows.len() + i] = v;
            }
        }
        Self::from_columns(ids, rows.len(), columns)
    }

    /// Builds draws from entity-major storage: `columns[l * num_draws + i]`.
    pub fn from_columns(ids: Vec<String>, num_draws: usize, columns: Vec<f64>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidDraws("no entities".into()));
        }
        if num_draws == 0 {
            return Err(Error::InvalidDraws("no draws".into()));
        }
        if columns.len() != ids.len() * num_draws {
            return Err(Error::InvalidDraws(format!(
                "{} values for {} entities x {num_draws} draws",
                columns.len(),
                ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidDraws(format!("duplicate entity id `{id}`")));
            }
        }
        if let Some(pos) = columns.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDraws(format!(
                "non-finite value for entity `{}` in draw {}",
                ids[pos / num_draws],
                pos % num_draws
            )));
        }
        Ok(Self {
            ids,
            num_draws,
            columns,
        })
    }

    /// Draws with generated ids `"0"`, `"1"`, ...
    pub fn from_rows_unlabeled(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        Self::from_rows((0..width).map(|l| l.to_string()).collect(), rows)
    }

    pub fn num_draws(&self) -> usize {
        self.num_draws
    }

    pub fn num_entities(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// All draws of entity `l`.
    pub fn column(&self, l: usize) -> &[f64] {
        &self.columns[l * self.num_draws..(l + 1) * self.num_draws]
    }

    pub fn value(&self, draw: usize, l: usize) -> f64 {
        self.columns[l * self.num_draws + draw]
    }

    /// Draw `i` as a length-`L` vector.
    pub fn row(&self, draw: usize) -> Vec<f64> {
        (0..self.num_entities())
            .map(|l| self.value(draw, l))
            .collect()
    }

    /// Keeps the listed entities, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut columns = Vec::with_capacity(indices.len() * self.num_draws);
        let mut ids = Vec::with_capacity(indices.len());
        for &l in indices {
            if l >= self.num_entities() {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    len: self.num_entities(),
                });
            }
            columns.extend_from_slice(self.column(l));
            ids.push(self.ids[l].clone());
        }
        Self::from_columns(ids, self.num_draws, columns)
    }

    /// Keeps the entities with the given ids, in the given order.
    pub fn select_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let indices = ids
            .iter()
            .map(|id| {
                self.index_of(id.as_ref())
                    .ok_or_else(|| Error::UnknownKey(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select(&indices)
    }

    /// Keeps a subset of draws.
    pub fn select_draws(&self, draws: &[usize]) -> Result<Self> {
        let mut columns = Vec::with_capacity(draws.len() * self.num_entities());
        for l in 0..self.num_entities() {
            let col = self.column(l);
            for &i in draws {
                if i >= self.num_draws {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: self.num_draws,
                    });
                }
                columns.push(col[i]);
            }
        }
        Self::from_columns(self.ids.clone(), draws.len(), columns)
    }

    /// Applies `f` to every value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_columns(
            self.ids.clone(),
            self.num_draws,
            self.columns.iter().map(|&v| f(v)).collect(),
        )
    }
}
