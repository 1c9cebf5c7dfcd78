use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::encounter::{reference_player, Encounter, EncounterTable, Lineup};
use crate::model::lineup::lineup_key;

/// Header of the encounter CSV, in column order.
pub const ENCOUNTER_HEADER: [&str; 15] = [
    "encounter_id",
    "team_a",
    "team_b",
    "player_a1",
    "player_a2",
    "player_a3",
    "player_a4",
    "player_a5",
    "player_b1",
    "player_b2",
    "player_b3",
    "player_b4",
    "player_b5",
    "points_a",
    "points_b",
];

/// One row of the encounter CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncounterRecord {
    pub encounter_id: String,
    pub team_a: String,
    pub team_b: String,
    pub player_a1: String,
    pub player_a2: String,
    pub player_a3: String,
    pub player_a4: String,
    pub player_a5: String,
    pub player_b1: String,
    pub player_b2: String,
    pub player_b3: String,
    pub player_b4: String,
    pub player_b5: String,
    pub points_a: u32,
    pub points_b: u32,
}

impl EncounterRecord {
    pub fn players_a(&self) -> [&str; 5] {
        [
            &self.player_a1,
            &self.player_a2,
            &self.player_a3,
            &self.player_a4,
            &self.player_a5,
        ]
    }

    pub fn players_b(&self) -> [&str; 5] {
        [
            &self.player_b1,
            &self.player_b2,
            &self.player_b3,
            &self.player_b4,
            &self.player_b5,
        ]
    }

    pub fn diff(&self) -> i64 {
        i64::from(self.points_a) - i64::from(self.points_b)
    }
}

/// Team-qualified player key.
pub fn player_key(team: &str, name: &str) -> String {
    format!("{team}_{name}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerEntry {
    pub key: String,
    pub name: String,
    pub team: String,
    pub appearances: usize,
}

/// Players, lineups and teams of an encounter table, indexed densely.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    pub players: Vec<PlayerEntry>,
    player_index: HashMap<String, usize>,
    pub lineups: Vec<Lineup>,
    lineup_index: HashMap<Lineup, usize>,
    pub teams: BTreeMap<String, BTreeSet<usize>>,
    /// Encounter ids in table order.
    pub encounter_ids: Vec<String>,
}

impl Registry {
    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    /// Player keys in index order.
    pub fn ids(&self) -> Vec<String> {
        self.players.iter().map(|p| p.key.clone()).collect()
    }

    pub fn player(&self, key: &str) -> Result<usize> {
        self.player_index
            .get(key)
            .copied()
            .ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    pub fn lineup_index(&self, lineup: &Lineup) -> Option<usize> {
        self.lineup_index.get(lineup).copied()
    }

    pub fn lineup_key(&self, lineup: &Lineup) -> String {
        let names: Vec<&str> = lineup
            .players()
            .iter()
            .map(|&p| self.players[p].key.as_str())
            .collect();
        lineup_key(&names)
    }

    pub fn lineup_keys(&self) -> Vec<String> {
        self.lineups.iter().map(|l| self.lineup_key(l)).collect()
    }

    /// Player keys of the listed teams.
    pub fn team_players(&self, teams: &[String]) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for team in teams {
            let players = self
                .teams
                .get(team)
                .ok_or_else(|| Error::UnknownKey(team.clone()))?;
            out.extend(players.iter().map(|&p| self.players[p].key.clone()));
        }
        Ok(out)
    }

    /// Most frequent player, ties to the smallest key.
    pub fn reference(&self, table: &EncounterTable) -> Result<usize> {
        reference_player(table, &self.ids())
    }

    fn intern(&mut self, team: &str, name: &str) -> usize {
        let key = player_key(team, name);
        if let Some(&i) = self.player_index.get(&key) {
            return i;
        }
        let i = self.players.len();
        self.players.push(PlayerEntry {
            key: key.clone(),
            name: name.to_string(),
            team: team.to_string(),
            appearances: 0,
        });
        self.player_index.insert(key, i);
        self.teams.entry(team.to_string()).or_default().insert(i);
        i
    }

    fn add_lineup(&mut self, lineup: Lineup) {
        if !self.lineup_index.contains_key(&lineup) {
            self.lineup_index.insert(lineup, self.lineups.len());
            self.lineups.push(lineup);
        }
    }
}

/// Builds the encounter table and registry; `line` of record `i` is `i + 2`.
pub fn table_from_records(records: &[EncounterRecord]) -> Result<(EncounterTable, Registry)> {
    let mut registry = Registry::default();
    let mut encounters = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let line = i + 2;
        let parse_err = |message: String| Error::Parse { line, message };
        if r.encounter_id.is_empty() || r.team_a.is_empty() || r.team_b.is_empty() {
            return Err(parse_err("empty encounter id or team".into()));
        }
        if let Some(p) = r
            .players_a()
            .iter()
            .chain(&r.players_b())
            .find(|p| p.is_empty())
        {
            return Err(parse_err(format!("empty player name `{p}`")));
        }
        let a: Vec<usize> = r
            .players_a()
            .iter()
            .map(|p| registry.intern(&r.team_a, p))
            .collect();
        let b: Vec<usize> = r
            .players_b()
            .iter()
            .map(|p| registry.intern(&r.team_b, p))
            .collect();
        let e = Encounter::new(&a, &b, r.diff()).map_err(|e| parse_err(e.to_string()))?;
        for &p in a.iter().chain(&b) {
            registry.players[p].appearances += 1;
        }
        registry.add_lineup(e.lineup_a);
        registry.add_lineup(e.lineup_b);
        registry.encounter_ids.push(r.encounter_id.clone());
        encounters.push(e);
    }
    let table = EncounterTable::new(registry.num_players(), encounters)?;
    Ok((table, registry))
}

/// Reads encounter records; the header must match [`ENCOUNTER_HEADER`].
pub fn read_records<R: Read>(reader: R) -> Result<Vec<EncounterRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(ENCOUNTER_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                ENCOUNTER_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for result in rdr.deserialize::<EncounterRecord>() {
        match result {
            Ok(r) => out.push(r),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

pub fn write_records<W: Write>(writer: W, records: &[EncounterRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    wtr.write_record(ENCOUNTER_HEADER)?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Parses an encounter CSV.
pub fn parse_encounters<R: Read>(reader: R) -> Result<(EncounterTable, Registry)> {
    table_from_records(&read_records(reader)?)
}

/// Records reproducing `table` under `registry`. The winning side gets the
/// point difference and the other side zero points.
pub fn records_from_table(
    table: &EncounterTable,
    registry: &Registry,
) -> Result<Vec<EncounterRecord>> {
    if table.num_players != registry.num_players() {
        return Err(Error::InvalidEncounter(format!(
            "table has {} players, registry {}",
            table.num_players,
            registry.num_players()
        )));
    }
    let mut out = Vec::with_capacity(table.len());
    for (i, e) in table.encounters.iter().enumerate() {
        let side = |lineup: &Lineup| -> Result<(String, [String; 5])> {
            let ps = lineup.players();
            let team = &registry.players[ps[0]].team;
            if ps.iter().any(|&p| &registry.players[p].team != team) {
                return Err(Error::InvalidEncounter(format!(
                    "encounter {i}: lineup mixes teams"
                )));
            }
            Ok((team.clone(), ps.map(|p| registry.players[p].name.clone())))
        };
        let (team_a, a) = side(&e.lineup_a)?;
        let (team_b, b) = side(&e.lineup_b)?;
        let [a1, a2, a3, a4, a5] = a;
        let [b1, b2, b3, b4, b5] = b;
        let magnitude = u32::try_from(e.diff.unsigned_abs())
            .map_err(|_| Error::InvalidEncounter(format!("encounter {i}: diff too large")))?;
        out.push(EncounterRecord {
            encounter_id: registry
                .encounter_ids
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("e{i}")),
            team_a,
            team_b,
            player_a1: a1,
            player_a2: a2,
            player_a3: a3,
            player_a4: a4,
            player_a5: a5,
            player_b1: b1,
            player_b2: b2,
            player_b3: b3,
            player_b4: b4,
            player_b5: b5,
            points_a: if e.diff > 0 { magnitude } else { 0 },
            points_b: if e.diff < 0 { magnitude } else { 0 },
        });
    }
    Ok(out)
}

/// Keeps encounters between listed teams and reindexes the players that
/// still appear, preserving their relative order.
pub fn subset(
    table: &EncounterTable,
    registry: &Registry,
    teams: &[String],
) -> Result<(EncounterTable, Registry)> {
    let mut keep_players = vec![false; registry.num_players()];
    for team in teams {
        let players = registry
            .teams
            .get(team)
            .ok_or_else(|| Error::UnknownKey(team.clone()))?;
        for &p in players {
            keep_players[p] = true;
        }
    }
    let kept: Vec<usize> = (0..table.len())
        .filter(|&i| {
            let e = &table.encounters[i];
            e.lineup_a
                .players()
                .iter()
                .chain(e.lineup_b.players())
                .all(|&p| keep_players[p])
        })
        .collect();
    let mut used = vec![false; registry.num_players()];
    for &i in &kept {
        let e = &table.encounters[i];
        for &p in e.lineup_a.players().iter().chain(e.lineup_b.players()) {
            used[p] = true;
        }
    }
    let mut new_index = vec![usize::MAX; registry.num_players()];
    let mut out = Registry::default();
    for (p, entry) in registry.players.iter().enumerate() {
        if used[p] {
            new_index[p] = out.intern(&entry.team, &entry.name);
        }
    }
    let mut encounters = Vec::with_capacity(kept.len());
    for &i in &kept {
        let e = &table.encounters[i];
        let a: Vec<usize> = e.lineup_a.players().iter().map(|&p| new_index[p]).collect();
        let b: Vec<usize> = e.lineup_b.players().iter().map(|&p| new_index[p]).collect();
        let e = Encounter::new(&a, &b, e.diff)?;
        for &p in a.iter().chain(&b) {
            out.players[p].appearances += 1;
        }
        out.add_lineup(e.lineup_a);
        out.add_lineup(e.lineup_b);
        out.encounter_ids.push(
            registry
                .encounter_ids
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("e{i}")),
        );
        encounters.push(e);
    }
    if encounters.is_empty() {
        log::warn!("team filter {teams:?} keeps no encounters");
    }
    let table = EncounterTable::new(out.num_players(), encounters)?;
    Ok((table, out))
}
