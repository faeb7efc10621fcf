use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right} atoms")]
    ShapeMismatch { left: usize, right: usize },

    #[error("instance too large: {n_atoms} atoms exceeds the matching limit of {limit}")]
    TooLarge { n_atoms: usize, limit: usize },

    #[error("a molecular graph needs at least one atom")]
    EmptyGraph,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid feature matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid probabilistic graph: {0}")]
    InvalidDistribution(String),

    #[error("k must be at least 1")]
    InvalidK,

    #[error("sigma must be positive and finite (index {index}: {value})")]
    NonPositiveSigma { index: usize, value: f64 },

    #[error("mu and sigma lengths differ ({mu} vs {sigma})")]
    LatentLength { mu: usize, sigma: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Smiles(#[from] SmilesError),

    #[error("graph is disconnected and cannot be written as SMILES")]
    Disconnected,

    #[error("no molecules loaded from {0}")]
    NoMolecules(String),

    #[error("cannot evaluate an empty sample list")]
    EmptySamples,

    #[error("cannot run a comparison without targets")]
    NoTargets,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A SMILES parse failure anchored at a 0-based character offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct SmilesError {
    pub kind: SmilesErrorKind,
    pub position: usize,
}

impl SmilesError {
    pub fn new(kind: SmilesErrorKind, position: usize) -> Self {
        Self { kind, position }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesErrorKind {
    EmptyInput,
    UnknownAtom(String),
    UnsupportedBracketAtom(String),
    UnclosedBracket,
    UnclosedBranch,
    UnmatchedBranchClose,
    UnmatchedRingDigit(u32),
    BondAtEnd,
    UnexpectedToken(String),
    DisconnectedComponent,
    ConflictingRingBond(u32),
    DuplicateBond,
    SelfBond,
}

impl fmt::Display for SmilesErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInput => write!(f, "empty input"),
            Self::UnknownAtom(s) => write!(f, "unknown atom symbol '{s}'"),
            Self::UnsupportedBracketAtom(s) => write!(f, "unsupported bracket atom '[{s}]'"),
            Self::UnclosedBracket => write!(f, "unclosed bracket atom"),
            Self::UnclosedBranch => write!(f, "unclosed branch"),
            Self::UnmatchedBranchClose => write!(f, "unmatched ')'"),
            Self::UnmatchedRingDigit(d) => write!(f, "unmatched ring digit {d}"),
            Self::BondAtEnd => write!(f, "bond symbol at end of input"),
            Self::UnexpectedToken(s) => write!(f, "unexpected '{s}'"),
            Self::DisconnectedComponent => write!(f, "disconnected components ('.') are not supported"),
            Self::ConflictingRingBond(d) => write!(f, "conflicting bond symbols on ring closure {d}"),
            Self::DuplicateBond => write!(f, "duplicate bond between the same atoms"),
            Self::SelfBond => write!(f, "ring closure bonds an atom to itself"),
        }
    }
}
