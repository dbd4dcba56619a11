use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} at vertex {vertex} is not below n = {n}")]
    DegreeOutOfRange { vertex: usize, degree: u32, n: usize },

    #[error("degree sequence is not graphical")]
    NotGraphical,

    #[error("degree sequence needs at least two positive entries")]
    Degenerate,

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix entry ({i},{j}) = {value} is outside [0,1]")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("graph exceeds degree {degree} allowed at vertex {vertex}")]
    NotPartialGraph { vertex: usize, degree: u32 },

    #[error("n = {n} exceeds the oracle cap of {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("graph family exceeds {cap} members")]
    FamilyCapExceeded { cap: usize },

    #[error("forced and forbidden edge sets intersect")]
    ConflictingConstraints,

    #[error("conditioning event is empty")]
    EmptyConditioning,

    #[error("edge {0}-{1} is already in the conditioning graph")]
    EdgeInCondition(usize, usize),

    #[error("m = {m} outside 0..={max}")]
    EdgeCountOutOfRange { m: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no eligible non-edge with positive remaining degrees")]
    NoEligiblePair,

    #[error("sample is outside the support of the reference law")]
    OutOfSupport,

    #[error("samples have mixed vertex counts")]
    MixedVertexCount,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotGraphical => 2,
            Error::OracleCapExceeded { .. } | Error::FamilyCapExceeded { .. } => 3,
            Error::Io(_) => 4,
            _ => 1,
        }
    }
}
