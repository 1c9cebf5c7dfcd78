use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};
use crate::model::encounter::Lineup;

/// Canonical key of a lineup: its player ids sorted and joined by `|`.
pub fn lineup_key<S: AsRef<str>>(ids: &[S]) -> String {
    let mut v: Vec<&str> = ids.iter().map(|s| s.as_ref()).collect();
    v.sort_unstable();
    v.join("|")
}

/// Draws of lineup abilities, each the sum of its players' draws.
pub fn lineup_draws(players: &PosteriorDraws, lineups: &[Lineup]) -> Result<PosteriorDraws> {
    let l = players.num_entities();
    let m = players.num_draws();
    let mut ids = Vec::with_capacity(lineups.len());
    let mut columns = vec![0.0; m * lineups.len()];
    for (j, lineup) in lineups.iter().enumerate() {
        if let Some(&p) = lineup.players().iter().find(|&&p| p >= l) {
            return Err(Error::IndexOutOfRange { index: p, len: l });
        }
        let names: Vec<&str> = lineup
            .players()
            .iter()
            .map(|&p| players.ids()[p].as_str())
            .collect();
        ids.push(lineup_key(&names));
        let out = &mut columns[j * m..(j + 1) * m];
        for &p in lineup.players() {
            for (o, v) in out.iter_mut().zip(players.column(p)) {
                *o += v;
            }
        }
    }
    PosteriorDraws::from_columns(ids, m, columns)
}
