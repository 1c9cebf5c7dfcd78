use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::chains::{run_chains, FitOutput, SamplerConfig};
use crate::model::encounter::{Encounter, EncounterTable, Lineup};
use crate::model::lineup::lineup_draws;
use crate::model::prior::PriorSpec;
use crate::pairwise::count_pairwise;
use crate::point::evaluate_at_point;
use crate::reward::RewardConfig;
use crate::search::optimize;

/// True abilities (all players, reference included) and noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub row: usize,
    pub xi: Vec<f64>,
    pub sigma2: f64,
}

/// Selects `count` posterior draws uniformly without replacement.
pub fn draw_truths(fit: &FitOutput, count: usize, seed: u64) -> Result<Vec<Truth>> {
    let m = fit.players.num_draws();
    if count > m {
        return Err(Error::InvalidConfig(format!(
            "{count} truths requested from {m} draws"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, m, count)
        .into_iter()
        .map(|row| Truth {
            row,
            xi: fit.players.row(row),
            sigma2: fit.sigma2[row],
        })
        .collect())
}

/// One realization of every encounter's point difference under `truth`.
pub fn simulate_realization(
    truth: &Truth,
    table: &EncounterTable,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Encounter>> {
    if truth.xi.len() != table.num_players {
        return Err(Error::InvalidConfig(format!(
            "truth has {} abilities, table {} players",
            truth.xi.len(),
            table.num_players
        )));
    }
    let noise = Normal::new(0.0, truth.sigma2.sqrt())
        .map_err(|e| Error::InvalidConfig(format!("noise variance {}: {e}", truth.sigma2)))?;
    let sum = |l: &Lineup| l.players().iter().map(|&p| truth.xi[p]).sum::<f64>();
    Ok(table
        .encounters
        .iter()
        .map(|e| Encounter {
            lineup_a: e.lineup_a,
            lineup_b: e.lineup_b,
            diff: (sum(&e.lineup_a) - sum(&e.lineup_b) + noise.sample(rng)).round() as i64,
        })
        .collect())
}

/// Dataset with `s` independent realizations of every encounter, each drawn
/// from its own stream of `seed`. Realization `r` does not depend on `s`,
/// so the `s = 2` dataset extends the `s = 1` one.
pub fn simulate_dataset(
    truth: &Truth,
    table: &EncounterTable,
    s: usize,
    seed: u64,
) -> Result<EncounterTable> {
    let mut encounters = Vec::with_capacity(s * table.len());
    for r in 0..s {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        encounters.extend(simulate_realization(truth, table, &mut rng)?);
    }
    EncounterTable::new(table.num_players, encounters)
}

/// Entities the statements are about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityLevel {
    #[default]
    Players,
    Lineups,
}

/// One cell of the study grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimDesign {
    /// Prior that generated the truths.
    pub k: u8,
    /// Prior used for fitting.
    pub m: u8,
    /// League-size label.
    pub d: String,
    /// Realizations per encounter.
    pub s: usize,
    /// Replicate index.
    pub j: usize,
    pub seed: u64,
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        PriorSpec::from_index(self.k)?;
        PriorSpec::from_index(self.m)?;
        if self.s == 0 {
            return Err(Error::InvalidConfig("s must be positive".into()));
        }
        Ok(())
    }

    /// Seed of the dataset, shared by every fitting prior.
    pub fn dataset_seed(&self) -> u64 {
        mix(self.seed, &[1, self.k as u64, self.j as u64])
    }

    pub fn fit_seed(&self) -> u64 {
        mix(
            self.seed,
            &[
                2,
                self.k as u64,
                self.j as u64,
                self.s as u64,
                self.m as u64,
            ],
        )
    }
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 finalizer over the parts
    let mut h = seed;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

/// Evaluation measures of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub k: u8,
    pub m: u8,
    pub d: String,
    pub s: usize,
    pub j: usize,
    pub level: EntityLevel,
    pub entities: usize,
    pub encounters: usize,
    pub statement_prob: f64,
    pub covered: bool,
    /// Local statements in the global statement.
    pub n_locals: usize,
    /// Local statements with at least one comparison.
    pub n_nonempty_locals: usize,
    /// Compared entities per local statement, averaged over all members.
    pub mean_entities_per_local: f64,
    pub alpha: f64,
    pub local_error: f64,
    pub gamma: f64,
    pub global_error: f64,
    pub reward: f64,
    pub max_rhat: f64,
    pub fit_seconds: f64,
    pub wall_time: f64,
}

/// Settings shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub sampler: SamplerConfig,
    pub reward: RewardConfig,
    pub level: EntityLevel,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig {
                chains: 4,
                burn_in: 500,
                thin: 2,
                target_draws: 2000,
                seed: 0,
                max_iterations: None,
            },
            reward: RewardConfig::default().with_epsilon(0.1),
            level: EntityLevel::Players,
        }
    }
}

/// Simulates the cell's dataset, fits prior `m`, finds the optimal statement
/// and checks it at the truth.
pub fn run_cell(
    design: &SimDesign,
    truth: &Truth,
    base: &EncounterTable,
    ids: &[String],
    settings: &SimSettings,
) -> Result<SimMetrics> {
    let tag = |e: Error| {
        Error::InvalidConfig(format!(
            "cell k={} m={} d={} s={} j={}: {e}",
            design.k, design.m, design.d, design.s, design.j
        ))
    };
    design.validate()?;
    let data = simulate_dataset(truth, base, design.s, design.dataset_seed()).map_err(tag)?;
    let sampler = SamplerConfig {
        seed: design.fit_seed(),
        ..settings.sampler.clone()
    };
    let started = Instant::now();
    let fit = run_chains(&sampler, &data, ids, PriorSpec::from_index(design.m)?).map_err(tag)?;
    let fit_seconds = started.elapsed().as_secs_f64();

    let (draws, point) = match settings.level {
        EntityLevel::Players => (fit.players.clone(), truth.xi.clone()),
        EntityLevel::Lineups => {
            let lineups = base.lineups();
            let draws = lineup_draws(&fit.players, &lineups).map_err(tag)?;
            let point = lineups
                .iter()
                .map(|l| l.players().iter().map(|&p| truth.xi[p]).sum())
                .collect();
            (draws, point)
        }
    };

    let started = Instant::now();
    let counts = count_pairwise(&draws);
    let outcome = optimize(&draws, &counts, &settings.reward).map_err(tag)?;
    let wall_time = started.elapsed().as_secs_f64();
    let statement = &outcome.best.statement;
    let covered = evaluate_at_point(statement, &point).map_err(tag)?;
    let sizes: Vec<usize> = statement.locals.iter().map(|l| l.sets.len()).collect();
    let n_locals = sizes.len();
    Ok(SimMetrics {
        k: design.k,
        m: design.m,
        d: design.d.clone(),
        s: design.s,
        j: design.j,
        level: settings.level,
        entities: draws.num_entities(),
        encounters: data.len(),
        statement_prob: statement.prob(),
        covered,
        n_locals,
        n_nonempty_locals: sizes.iter().filter(|&&n| n > 0).count(),
        mean_entities_per_local: if n_locals == 0 {
            0.0
        } else {
            sizes.iter().sum::<usize>() as f64 / n_locals as f64
        },
        alpha: statement.action.alpha,
        local_error: statement.action.t,
        gamma: statement.action.gamma,
        global_error: statement.action.q,
        reward: statement.reward,
        max_rhat: fit.diagnostics.max_rhat,
        fit_seconds,
        wall_time,
    })
}

/// Study grid: truths from prior `k`, fits with every prior in `ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub ks: Vec<u8>,
    pub ms: Vec<u8>,
    pub ss: Vec<usize>,
    pub replicates: usize,
    pub d: String,
    pub seed: u64,
    /// Sampler settings of the fits that generate the truths.
    pub base_sampler: SamplerConfig,
    pub settings: SimSettings,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            ks: vec![1, 2, 3],
            ms: vec![1, 2, 3],
            ss: vec![1, 2],
            replicates: 5,
            d: "5".into(),
            seed: 0,
            base_sampler: SimSettings::default().sampler,
            settings: SimSettings::default(),
        }
    }
}

impl StudyConfig {
    /// Paper-scale grid: 50 replicates of every combination.
    pub fn paper_scale(mut self) -> Self {
        self.replicates = 50;
        self.ks = vec![1, 2, 3];
        self.ms = vec![1, 2, 3];
        self.ss = vec![1, 2];
        self
    }
}

/// Runs every cell of the grid over `base`. Rows come out ordered by
/// `(k, j, s, m)` regardless of the worker count.
pub fn run_study(
    config: &StudyConfig,
    base: &EncounterTable,
    ids: &[String],
) -> Result<Vec<SimMetrics>> {
    use rayon::prelude::*;

    let mut jobs = Vec::new();
    for &k in &config.ks {
        let base_fit = run_chains(
            &SamplerConfig {
                seed: mix(config.seed, &[0, k as u64]),
                ..config.base_sampler.clone()
            },
            base,
            ids,
            PriorSpec::from_index(k)?,
        )?;
        let truths = draw_truths(
            &base_fit,
            config.replicates,
            mix(config.seed, &[3, k as u64]),
        )?;
        for (j, truth) in truths.into_iter().enumerate() {
            for &s in &config.ss {
                for &m in &config.ms {
                    jobs.push((
                        SimDesign {
                            k,
                            m,
                            d: config.d.clone(),
                            s,
                            j,
                            seed: config.seed,
                        },
                        truth.clone(),
                    ));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(design, truth)| run_cell(design, truth, base, ids, &config.settings))
        .collect()
}

pub fn write_metrics<W: Write>(writer: W, rows: &[SimMetrics]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}
