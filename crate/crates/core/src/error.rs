use thiserror::Error;

/// Errors produced across the factoring toolkit.
#[derive(Debug, Error)]
pub enum QfaError {
    #[error("invalid Pegasus size parameter m={0} (must be >= 2)")]
    InvalidSize(usize),

    #[error(
        "a {rows}x{cols} tile grid does not fit; largest feasible grid is \
         {max_rows}x{cols} at {cols} columns and {rows}x{max_cols} at {rows} rows"
    )]
    Capacity {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("no penalty function with positive gap exists: {0}")]
    Infeasible(String),

    #[error("fixing is contradictory or leaves no satisfying assignment: {0}")]
    EmptySpec(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: usize },

    #[error("N={n} is not representable by a {a}x{b}-bit multiplier")]
    NotRepresentable { n: u64, a: usize, b: usize },

    #[error("chain routing failed: {0}")]
    Routing(String),

    #[error("no library entry for fixing {0}")]
    MissingLibraryEntry(String),

    #[error("qubit {0} has no free neighbour for an equivalence chain")]
    NoFreeNeighbour(u32),

    #[error("assignment is missing qubit {0}")]
    IncompleteAssignment(u32),

    #[error("model has {0} free qubits, exact enumeration supports at most {1}")]
    TooManyQubits(usize, usize),

    #[error("invalid anneal config: {0}")]
    Config(String),

    #[error("invalid chain strength {0} (must lie in (0, 2])")]
    ChainStrength(f64),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QfaError>;
