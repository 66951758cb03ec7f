use thiserror::Error;

use crate::sign::ElementSet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sign vector lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("element {0} out of range")]
    ElementOutOfRange(usize),

    #[error("matrix has rank {found}, expected {expected}")]
    RankDeficient { expected: usize, found: usize },

    #[error("invalid chirotope: {0}")]
    InvalidChirotope(String),

    #[error("invalid cocircuit set: {0}")]
    InvalidCocircuits(String),

    #[error("no chirotope available for this oriented matroid")]
    NoChirotope,

    #[error("oriented matroid is not uniform")]
    NotUniform,

    #[error("{0:?} is not a basis")]
    NotABasis(ElementSet),

    #[error("not a tope: {0}")]
    NotATope(String),

    #[error("element {0} does not separate the two cocircuits")]
    NotSeparating(usize),

    #[error("cocircuits are not comodular, elimination is not unique")]
    NotComodular,

    #[error("no cocircuit satisfies the elimination conditions")]
    EliminationFailed,

    #[error("not an edge of the cocircuit graph")]
    NotAnEdge,

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("invalid extension spec: {0}")]
    InvalidSpec(String),

    #[error("stale mutation certificate for basis {0:?}")]
    StaleCertificate(ElementSet),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot remove every element of the ground set")]
    EmptyMinor,

    #[error("target hyperplanes only meet in the zero vector")]
    EmptyIntersection,

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
