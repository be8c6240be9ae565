use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("inconsistent SDF graph: balance equations have no positive solution ({0})")]
    Inconsistent(String),

    #[error("unrolled graph would have {needed} actor instances, above the cap of {cap}")]
    Overflow { needed: u128, cap: u64 },

    #[error("arithmetic overflow in {0}")]
    ArithmeticOverflow(&'static str),

    #[error("deadlock: token-free cycle through actors {cycle:?}")]
    Deadlock { cycle: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("infeasible at period {period}: binding cycle through actors {cycle:?}")]
    Infeasible { period: Box<Rational>, cycle: Vec<usize> },

    #[error("period {period} is shorter than the {required} time units actor {actor} needs")]
    PeriodTooShort {
        actor: usize,
        period: Box<Rational>,
        required: u64,
    },

    #[error("period must be positive, got {0}")]
    NonPositivePeriod(Rational),

    #[error("{groups} decision groups exceed the exhaustive-sweep cap of {cap}; use hs instead")]
    TooManyGroups { groups: usize, cap: usize },

    #[error("point ({p}, {e}) lies outside the normalization box")]
    OutOfBox { p: Box<Rational>, e: Box<Rational> },

    #[error("degenerate reference front: hypervolume is zero")]
    Degenerate,

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("random graph generation failed: {0}")]
    GenerationFailed(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
