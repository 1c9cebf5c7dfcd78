use std::collections::HashSet;

use crate::error::{Error, Result};

pub const LINEUP_SIZE: usize = 5;

/// Five distinct player indices, sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lineup([usize; LINEUP_SIZE]);

impl Lineup {
    pub fn new(players: &[usize]) -> Result<Self> {
        if players.len() != LINEUP_SIZE {
            return Err(Error::InvalidEncounter(format!(
                "lineup has {} players, expected {LINEUP_SIZE}",
                players.len()
            )));
        }
        let mut p = [0usize; LINEUP_SIZE];
        p.copy_from_slice(players);
        p.sort_unstable();
        if p.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidEncounter(format!(
                "player {} appears twice in a lineup",
                p.windows(2).find(|w| w[0] == w[1]).unwrap()[0]
            )));
        }
        Ok(Self(p))
    }

    pub fn players(&self) -> &[usize; LINEUP_SIZE] {
        &self.0
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0.binary_search(&player).is_ok()
    }
}

/// One timed segment between two lineups and its point difference `a - b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encounter {
    pub lineup_a: Lineup,
    pub lineup_b: Lineup,
    pub diff: i64,
}

impl Encounter {
    pub fn new(a: &[usize], b: &[usize], diff: i64) -> Result<Self> {
        let lineup_a = Lineup::new(a)?;
        let lineup_b = Lineup::new(b)?;
        if let Some(p) = lineup_a.players().iter().find(|p| lineup_b.contains(**p)) {
            return Err(Error::InvalidEncounter(format!(
                "player {p} is in both lineups"
            )));
        }
        Ok(Self {
            lineup_a,
            lineup_b,
            diff,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EncounterTable {
    pub num_players: usize,
    pub encounters: Vec<Encounter>,
}

impl EncounterTable {
    pub fn new(num_players: usize, encounters: Vec<Encounter>) -> Result<Self> {
        for (i, e) in encounters.iter().enumerate() {
            let max = e.lineup_a.players()[4].max(e.lineup_b.players()[4]);
            if max >= num_players {
                return Err(Error::InvalidEncounter(format!(
                    "encounter {i} references player {max} of {num_players}"
                )));
            }
        }
        Ok(Self {
            num_players,
            encounters,
        })
    }

    pub fn len(&self) -> usize {
        self.encounters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encounters.is_empty()
    }

    /// Appearances per player.
    pub fn appearances(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_players];
        for e in &self.encounters {
            for &p in e.lineup_a.players().iter().chain(e.lineup_b.players()) {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Distinct lineups in order of first appearance.
    pub fn lineups(&self) -> Vec<Lineup> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in &self.encounters {
            for l in [e.lineup_a, e.lineup_b] {
                if seen.insert(l) {
                    out.push(l);
                }
            }
        }
        out
    }
}

/// The most frequently appearing player; ties go to the lexicographically
/// smallest id.
pub fn reference_player(table: &EncounterTable, ids: &[String]) -> Result<usize> {
    if ids.len() != table.num_players {
        return Err(Error::InvalidEncounter(format!(
            "{} ids for {} players",
            ids.len(),
            table.num_players
        )));
    }
    let counts = table.appearances();
    (0..table.num_players)
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then_with(|| ids[b].cmp(&ids[a])))
        .ok_or_else(|| Error::InvalidEncounter("no players".into()))
}
