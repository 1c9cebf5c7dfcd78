//! Python bindings: draw matrices, statements, the optimal-statement search,
//! rankings, model fitting and lineup draws.

use std::fs::File;
use std::path::PathBuf;

use bayesrank_core::io::{
    caterpillar, export_graph, parse_encounters, read_draws, subset, write_draws, SearchRecord,
    StatementReport,
};
use bayesrank_core::model::{self, run_chains, PriorSpec, SamplerConfig};
use bayesrank_core::{
    compute_statement, count_pairwise, derive_rankings, Action, CostTransform, Error,
    PosteriorDraws, RewardConfig,
};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::UnknownKey(k) => PyKeyError::new_err(k),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn reward_config(epsilon: Option<f64>, h: &str) -> PyResult<RewardConfig> {
    let config = RewardConfig {
        h: h.parse::<CostTransform>().map_err(py_err)?,
        epsilon,
        ..Default::default()
    };
    config.validate().map_err(py_err)?;
    Ok(config)
}

/// Posterior draws: one row per draw, one column per entity.
#[pyclass(name = "Draws", module = "bayesrank", frozen)]
pub struct Draws {
    inner: PosteriorDraws,
}

#[pymethods]
impl Draws {
    #[new]
    fn new(ids: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: PosteriorDraws::from_rows(ids, &rows).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        let file = File::open(&path)
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        Ok(Self {
            inner: read_draws(file).map_err(py_err)?,
        })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path)
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        write_draws(file, &self.inner).map_err(py_err)
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.ids().to_vec()
    }

    #[getter]
    fn num_draws(&self) -> usize {
        self.inner.num_draws()
    }

    #[getter]
    fn num_entities(&self) -> usize {
        self.inner.num_entities()
    }

    fn column(&self, id: &str) -> PyResult<Vec<f64>> {
        let l = self
            .inner
            .index_of(id)
            .ok_or_else(|| PyKeyError::new_err(id.to_string()))?;
        Ok(self.inner.column(l).to_vec())
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.num_draws())
            .map(|i| self.inner.row(i))
            .collect()
    }

    fn select(&self, ids: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.select_ids(&ids).map_err(py_err)?,
        })
    }

    /// `(id, q1, median, q3)` per entity, sorted by median.
    fn caterpillar(&self) -> Vec<(String, f64, f64, f64)> {
        caterpillar(&self.inner)
            .into_iter()
            .map(|r| (r.id, r.q1, r.median, r.q3))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Draws({} draws x {} entities)",
            self.inner.num_draws(),
            self.inner.num_entities()
        )
    }
}

/// Report of the global statement of a fixed action.
#[pyfunction]
#[pyo3(signature = (draws, alpha=0.025, t=0.1, gamma=0.05, q=0.1, epsilon=None, h="identity"))]
#[allow(clippy::too_many_arguments)]
fn statement<'py>(
    py: Python<'py>,
    draws: &Draws,
    alpha: f64,
    t: f64,
    gamma: f64,
    q: f64,
    epsilon: Option<f64>,
    h: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let config = reward_config(epsilon, h)?;
    let d = &draws.inner;
    let report = py
        .detach(|| {
            let counts = count_pairwise(d);
            let st = compute_statement(d, &counts, &Action::new(alpha, t, gamma, q), &config)?;
            Ok(StatementReport::new(
                &st,
                d,
                &counts,
                config.h,
                config.epsilon,
            ))
        })
        .map_err(py_err)?;
    json(py, &report)
}

/// Report of the reward-maximizing statement found by multi-start pattern search.
#[pyfunction]
#[pyo3(signature = (draws, epsilon=None, h="identity"))]
fn optimize<'py>(
    py: Python<'py>,
    draws: &Draws,
    epsilon: Option<f64>,
    h: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let config = reward_config(epsilon, h)?;
    let d = &draws.inner;
    let report = py
        .detach(|| {
            let counts = count_pairwise(d);
            let out = bayesrank_core::optimize(d, &counts, &config)?;
            let mut report =
                StatementReport::new(&out.best.statement, d, &counts, config.h, config.epsilon);
            report.search = Some(SearchRecord {
                starts: out.runs.len(),
                iterations: out.best.iterations,
                evaluations: out.best.evaluations,
                best_start: out.best.start,
            });
            Ok(report)
        })
        .map_err(py_err)?;
    json(py, &report)
}

/// Rankings implied by the error-free statement `(alpha, 0, gamma, 0)`:
/// `{"prob", "chains", "hasse", "dot"}`, chains listed lowest first.
#[pyfunction]
#[pyo3(signature = (draws, alpha=0.025, gamma=0.05))]
fn rankings<'py>(
    py: Python<'py>,
    draws: &Draws,
    alpha: f64,
    gamma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let d = &draws.inner;
    let (prob, graph) = py
        .detach(|| {
            let counts = count_pairwise(d);
            let st = compute_statement(
                d,
                &counts,
                &Action::new(alpha, 0.0, gamma, 0.0),
                &RewardConfig::default(),
            )?;
            Ok((st.prob(), derive_rankings(&st)?))
        })
        .map_err(py_err)?;
    let ids = d.ids();
    let name = |e: usize| ids[e].clone();
    let value = serde_json::json!({
        "prob": prob,
        "chains": graph.chains.iter().map(|c| c.iter().map(|&e| name(e)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "hasse": graph.hasse.iter().map(|&(a, b)| (name(a), name(b))).collect::<Vec<_>>(),
        "dot": export_graph(&graph, ids),
    });
    json(py, &value)
}

/// Fits the point-difference model to an encounter CSV. Returns the player
/// draws and the sampler diagnostics.
#[pyfunction]
#[pyo3(signature = (encounters, prior=3, chains=13, burn_in=2000, thin=20, draws=10000, seed=0, teams=None))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    encounters: PathBuf,
    prior: u8,
    chains: usize,
    burn_in: usize,
    thin: usize,
    draws: usize,
    seed: u64,
    teams: Option<Vec<String>>,
) -> PyResult<(Draws, Bound<'py, PyAny>)> {
    let file = File::open(&encounters)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", encounters.display())))?;
    let config = SamplerConfig {
        chains,
        burn_in,
        thin,
        target_draws: draws,
        seed,
        max_iterations: None,
    };
    let prior = PriorSpec::from_index(prior).map_err(py_err)?;
    let out = py
        .detach(|| {
            let (table, registry) = parse_encounters(file)?;
            let (table, registry) = match &teams {
                Some(t) => subset(&table, &registry, t)?,
                None => (table, registry),
            };
            run_chains(&config, &table, &registry.ids(), prior)
        })
        .map_err(py_err)?;
    Ok((Draws { inner: out.players }, json(py, &out.diagnostics)?))
}

/// Draws of the lineups observed in an encounter CSV, optionally only those
/// whose five players all belong to `team`.
#[pyfunction]
#[pyo3(signature = (players, encounters, team=None))]
fn lineup_draws(players: &Draws, encounters: PathBuf, team: Option<String>) -> PyResult<Draws> {
    let file = File::open(&encounters)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", encounters.display())))?;
    let (_, registry) = parse_encounters(file).map_err(py_err)?;
    let selected = players.inner.select_ids(&registry.ids()).map_err(py_err)?;
    let lineups: Vec<_> = registry
        .lineups
        .iter()
        .filter(|l| {
            team.as_ref()
                .is_none_or(|t| l.players().iter().all(|&p| &registry.players[p].team == t))
        })
        .cloned()
        .collect();
    Ok(Draws {
        inner: model::lineup_draws(&selected, &lineups).map_err(py_err)?,
    })
}

#[pymodule]
mod bayesrank {
    #[pymodule_export]
    use super::{fit, lineup_draws, optimize, rankings, statement, Draws};
}
