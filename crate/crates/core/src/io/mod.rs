//! Encounter logs, draw matrices and report exports.

pub mod caterpillar;
pub mod draws_csv;
pub mod encounters;
pub mod graph;
pub mod report;

pub use caterpillar::{caterpillar, write_caterpillar, CaterpillarRow};
pub use draws_csv::{read_draws, write_draws};
pub use encounters::{
    parse_encounters, read_records, records_from_table, subset, table_from_records, write_records,
    EncounterRecord, PlayerEntry, Registry, ENCOUNTER_HEADER,
};
pub use graph::export_graph;
pub use report::{MemberReport, SearchRecord, StatementReport, TieDiagnostics, TiedPair};
