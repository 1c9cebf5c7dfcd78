use std::io::{Read, Write};

use crate::draws::PosteriorDraws;
use crate::error::{Error, Result};

/// Writes draws as CSV: a header of entity ids, then one row per draw.
/// Values use the shortest representation that parses back exactly.
pub fn write_draws<W: Write>(writer: W, draws: &PosteriorDraws) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(draws.ids())?;
    let mut row = Vec::with_capacity(draws.num_entities());
    for i in 0..draws.num_draws() {
        row.clear();
        row.extend((0..draws.num_entities()).map(|l| draws.value(i, l).to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_draws<R: Read>(reader: R) -> Result<PosteriorDraws> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let ids: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let width = ids.len();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("{} values, expected {width}", rec.len()),
            });
        }
        let row = rec
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("`{v}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    PosteriorDraws::from_rows(ids, &rows)
}
