use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::model::design::build_design;
use crate::model::diagnostics::split_rhat;
use crate::model::encounter::{reference_player, EncounterTable};
use crate::model::gibbs::{GibbsSampler, StepCounters};
use crate::model::prior::PriorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Scans discarded at the start of every chain.
    pub burn_in: usize,
    /// Keep every `thin`-th scan after burn-in.
    pub thin: usize,
    /// Kept draws over all chains.
    pub target_draws: usize,
    pub seed: u64,
    /// Upper bound on scans per chain, if any.
    pub max_iterations: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 13,
            burn_in: 2000,
            thin: 20,
            target_draws: 10_000,
            seed: 0,
            max_iterations: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.thin == 0 || self.target_draws == 0 {
            return Err(Error::InvalidConfig(format!(
                "chains, thin and target_draws must be positive: {self:?}"
            )));
        }
        if let Some(limit) = self.max_iterations {
            let required = self.iterations_per_chain();
            if required > limit {
                return Err(Error::TargetUnreachable {
                    target: self.target_draws,
                    required,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Kept draws of chain `c`.
    pub fn draws_of_chain(&self, c: usize) -> usize {
        self.target_draws / self.chains + usize::from(c < self.target_draws % self.chains)
    }

    /// Scans needed by the longest chain.
    pub fn iterations_per_chain(&self) -> usize {
        self.burn_in + self.thin * self.draws_of_chain(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SamplerDiagnostics {
    pub reference: String,
    pub chains: usize,
    pub draws_per_chain: Vec<usize>,
    pub iterations_per_chain: usize,
    pub variance_retries: usize,
    pub slice_evaluations: usize,
    pub sigma2_skipped: usize,
    /// Split-chain scale reduction per player, in draw column order.
    pub rhat: Vec<f64>,
    pub max_rhat: f64,
}

/// Sampler output: player draws plus the scalar parameters.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub players: PosteriorDraws,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub lambda: Vec<f64>,
    pub diagnostics: SamplerDiagnostics,
}

struct ChainOutput {
    xi: Vec<Vec<f64>>,
    mu: Vec<f64>,
    sigma2: Vec<f64>,
    lambda: Vec<f64>,
    counters: StepCounters,
}

/// Runs independent chains and concatenates their kept draws chain by chain.
///
/// Chain `c` draws from stream `c` of a ChaCha8 generator seeded with
/// `config.seed`, so results do not depend on the worker count.
pub fn run_chains(
    config: &SamplerConfig,
    table: &EncounterTable,
    ids: &[String],
    prior: PriorSpec,
) -> Result<FitOutput> {
    config.validate()?;
    let reference = reference_player(table, ids)?;
    let design = build_design(table, reference)?;
    let sampler = GibbsSampler::new(&design, prior)?;

    let outputs: Vec<ChainOutput> = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let keep = config.draws_of_chain(c);
            let mut state = sampler.initial_state(1.0, &mut rng);
            let mut counters = StepCounters::default();
            let mut out = ChainOutput {
                xi: Vec::with_capacity(keep),
                mu: Vec::with_capacity(keep),
                sigma2: Vec::with_capacity(keep),
                lambda: Vec::with_capacity(keep),
                counters: StepCounters::default(),
            };
            for _ in 0..config.burn_in {
                sampler.step(&mut state, &mut rng, &mut counters)?;
            }
            for _ in 0..keep {
                for _ in 0..config.thin {
                    sampler.step(&mut state, &mut rng, &mut counters)?;
                }
                out.xi.push(state.xi.clone());
                out.mu.push(state.mu);
                out.sigma2.push(state.sigma2);
                out.lambda.push(state.lambda);
            }
            out.counters = counters;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let l = table.num_players;
    let total: usize = outputs.iter().map(|o| o.xi.len()).sum();
    let mut columns = vec![0.0; l * total];
    let mut row = 0;
    for o in &outputs {
        for xi in &o.xi {
            for (p, &v) in xi.iter().enumerate() {
                columns[p * total + row] = v;
            }
            row += 1;
        }
    }
    let players = PosteriorDraws::from_columns(ids.to_vec(), total, columns)?;

    let mut rhat = Vec::with_capacity(l);
    for p in 0..l {
        let per_chain: Vec<Vec<f64>> = outputs
            .iter()
            .map(|o| o.xi.iter().map(|x| x[p]).collect())
            .collect();
        let refs: Vec<&[f64]> = per_chain.iter().map(|c| c.as_slice()).collect();
        rhat.push(split_rhat(&refs));
    }
    let max_rhat = rhat
        .iter()
        .copied()
        .filter(|r| !r.is_nan())
        .fold(f64::NAN, f64::max);
    let diagnostics = SamplerDiagnostics {
        reference: ids[reference].clone(),
        chains: config.chains,
        draws_per_chain: outputs.iter().map(|o| o.xi.len()).collect(),
        iterations_per_chain: config.iterations_per_chain(),
        variance_retries: outputs.iter().map(|o| o.counters.variance_retries).sum(),
        slice_evaluations: outputs.iter().map(|o| o.counters.slice_evaluations).sum(),
        sigma2_skipped: outputs.iter().map(|o| o.counters.sigma2_skipped).sum(),
        rhat,
        max_rhat,
    };
    Ok(FitOutput {
        players,
        mu: outputs.iter().flat_map(|o| o.mu.iter().copied()).collect(),
        sigma2: outputs
            .iter()
            .flat_map(|o| o.sigma2.iter().copied())
            .collect(),
        lambda: outputs
            .iter()
            .flat_map(|o| o.lambda.iter().copied())
            .collect(),
        diagnostics,
    })
}
