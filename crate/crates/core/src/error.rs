use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid draws: {0}")]
    InvalidDraws(String),

    #[error("entity index {index} out of range for {len} entities")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parameter `{name}` = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("truth has a tie between entities {0} and {1}; ordering is undefined")]
    TieInTruth(usize, usize),

    #[error("rankings need an error-free statement (t = 0 and q = 0), got t = {t}, q = {q}")]
    NotErrorFree { t: f64, q: f64 },

    #[error("pairwise relation is cyclic: {}", format_cycle(.0))]
    Cycle(Vec<usize>),

    #[error("invalid encounter: {0}")]
    InvalidEncounter(String),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "target of {target} draws unreachable: needs {required} iterations per chain, limit is {limit}"
    )]
    TargetUnreachable {
        target: usize,
        required: usize,
        limit: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_cycle(cycle: &[usize]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(|v| v.to_string()).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.to_string());
    }
    parts.join(" -> ")
}
