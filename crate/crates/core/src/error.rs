use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),
    #[error("vertex of length {len} is deeper than portrait depth {depth}")]
    VertexTooDeep { len: usize, depth: u32 },
    #[error("portrait moves vertex {0}; sections are only taken at fixed vertices")]
    VertexMoved(String),
    #[error("invalid vertex letter {letter} for p = {p}")]
    BadLetter { letter: u32, p: u32 },
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
    #[error("family {family} has no generator {index}")]
    NoSuchGenerator { family: usize, index: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("word is not in the first level stabilizer")]
    NotInStabilizer,
    #[error("degree {degree} exceeds guard {guard}")]
    DegreeGuard { degree: u64, guard: u64 },
    #[error("level {0} out of range")]
    LevelOutOfRange(u32),
    #[error("excluded by hypothesis: {0}")]
    Excluded(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
