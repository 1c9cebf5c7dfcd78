use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::encounters::{player_key, EncounterRecord};
use crate::model::encounter::LINEUP_SIZE;

/// Shape of a synthetic league.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeagueConfig {
    pub teams: usize,
    pub players_per_team: usize,
    pub encounters: usize,
    /// Standard deviation of the true player abilities.
    pub ability_sd: f64,
    /// Noise standard deviation of a point difference.
    pub sigma: f64,
    /// Selection weight decay down a roster: player `r` has weight `decay^r`.
    pub rotation_decay: f64,
    pub seed: u64,
}

impl Default for LeagueConfig {
    fn default() -> Self {
        Self {
            teams: 5,
            players_per_team: 16,
            encounters: 844,
            ability_sd: 1.0,
            sigma: 8.0,
            rotation_decay: 0.85,
            seed: 0,
        }
    }
}

/// Generated encounters plus the abilities they were drawn from.
#[derive(Debug, Clone)]
pub struct SyntheticLeague {
    pub records: Vec<EncounterRecord>,
    /// `(player key, ability)` for every rostered player.
    pub abilities: Vec<(String, f64)>,
}

pub fn team_name(t: usize) -> String {
    format!("T{:02}", t + 1)
}

pub fn player_name(r: usize) -> String {
    format!("P{:02}", r + 1)
}

/// Generates a league: every encounter pits two random teams, each fielding
/// five players drawn without replacement with weights decaying down the
/// roster, and records a rounded normal point difference.
pub fn generate_league(config: &LeagueConfig) -> Result<SyntheticLeague> {
    if config.teams < 2 || config.players_per_team < LINEUP_SIZE {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 teams of {LINEUP_SIZE} players: {config:?}"
        )));
    }
    if !(config.sigma >= 0.0 && config.ability_sd >= 0.0 && config.rotation_decay > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "invalid league scales: {config:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ability =
        Normal::new(0.0, config.ability_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let noise = Normal::new(0.0, config.sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let n = config.players_per_team;
    let xi: Vec<Vec<f64>> = (0..config.teams)
        .map(|_| (0..n).map(|_| ability.sample(&mut rng)).collect())
        .collect();
    let weights: Vec<f64> = (0..n)
        .map(|r| config.rotation_decay.powi(r as i32))
        .collect();

    let mut records = Vec::with_capacity(config.encounters);
    for e in 0..config.encounters {
        let ta = rng.random_range(0..config.teams);
        let mut tb = rng.random_range(0..config.teams - 1);
        if tb >= ta {
            tb += 1;
        }
        let pick = |rng: &mut ChaCha8Rng| -> Result<Vec<usize>> {
            let mut v: Vec<usize> = sample_weighted(rng, n, |r| weights[r], LINEUP_SIZE)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?
                .into_vec();
            v.sort_unstable();
            Ok(v)
        };
        let a = pick(&mut rng)?;
        let b = pick(&mut rng)?;
        let mean: f64 =
            a.iter().map(|&r| xi[ta][r]).sum::<f64>() - b.iter().map(|&r| xi[tb][r]).sum::<f64>();
        let diff = (mean + noise.sample(&mut rng)).round() as i64;
        let base: u32 = rng.random_range(0..=4);
        let magnitude = diff.unsigned_abs() as u32;
        let names = |rs: &[usize]| -> Vec<String> { rs.iter().map(|&r| player_name(r)).collect() };
        let (pa, pb) = (names(&a), names(&b));
        records.push(EncounterRecord {
            encounter_id: format!("e{:05}", e + 1),
            team_a: team_name(ta),
            team_b: team_name(tb),
            player_a1: pa[0].clone(),
            player_a2: pa[1].clone(),
            player_a3: pa[2].clone(),
            player_a4: pa[3].clone(),
            player_a5: pa[4].clone(),
            player_b1: pb[0].clone(),
            player_b2: pb[1].clone(),
            player_b3: pb[2].clone(),
            player_b4: pb[3].clone(),
            player_b5: pb[4].clone(),
            points_a: base + if diff > 0 { magnitude } else { 0 },
            points_b: base + if diff < 0 { magnitude } else { 0 },
        });
    }
    let abilities = (0..config.teams)
        .flat_map(|t| {
            let xi = &xi;
            (0..n).map(move |r| (player_key(&team_name(t), &player_name(r)), xi[t][r]))
        })
        .collect();
    Ok(SyntheticLeague { records, abilities })
}
