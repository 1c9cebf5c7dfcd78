use std::io::Write;

use crate::draws::PosteriorDraws;
use crate::error::Result;

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaterpillarRow {
    pub id: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Posterior quartiles per entity, sorted by median (ties by id).
pub fn caterpillar(draws: &PosteriorDraws) -> Vec<CaterpillarRow> {
    let mut rows: Vec<CaterpillarRow> = (0..draws.num_entities())
        .map(|l| {
            let mut v = draws.column(l).to_vec();
            v.sort_unstable_by(f64::total_cmp);
            CaterpillarRow {
                id: draws.ids()[l].clone(),
                q1: quantile_sorted(&v, 0.25),
                median: quantile_sorted(&v, 0.5),
                q3: quantile_sorted(&v, 0.75),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.median.total_cmp(&b.median).then_with(|| a.id.cmp(&b.id)));
    rows
}

pub fn write_caterpillar<W: Write>(writer: W, draws: &PosteriorDraws) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id", "q1", "median", "q3"])?;
    for r in caterpillar(draws) {
        wtr.write_record([
            r.id,
            r.q1.to_string(),
            r.median.to_string(),
            r.q3.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
