use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range (part size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("edge ({0}, {1}) joins two vertices of the same part")]
    NonBipartiteEdge(usize, usize),
    #[error("cannot build a {delta}-regular bipartite graph on {n}+{n} vertices")]
    InfeasibleDegree { n: usize, delta: usize },
    #[error("matching {matching} still collides after {attempts} repair attempts")]
    RetryExhausted { matching: usize, attempts: usize },
    #[error("vertex {0} is not in the expected part")]
    WrongPart(usize),
    #[error("invalid list for vertex {vertex}: {reason}")]
    InvalidList { vertex: usize, reason: String },
    #[error("color pool {pool} is smaller than list size {k}")]
    PoolTooSmall { pool: usize, k: usize },
    #[error("delta {0} is below the validity floor of the list-size formula")]
    DeltaTooSmall(usize),
    #[error("list size {0} is not divisible by 10")]
    NotDivisibleBy10(usize),
    #[error("index {index} outside 1..={k}")]
    ColorIndexOutOfRange { index: usize, k: usize },
    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),
    #[error("enumeration too large: {0}")]
    TooLargeToEnumerate(String),
    #[error("probability {prob} of color {color} in source {source_index} is not below cap {cap}")]
    CapViolated {
        source_index: usize,
        color: u32,
        prob: f64,
        cap: f64,
    },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("subset must contain at least one color")]
    EmptySubset,
    #[error("part A vertex {0} is uncolored")]
    SideAIncomplete(usize),
    #[error("no available color for vertex {0}")]
    NoAvailableColor(usize),
    #[error("objective is singular at y = {0}")]
    SingularAtYOne(f64),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
