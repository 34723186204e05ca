use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re} + {im}i lies outside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("constant term |a_0| = {0:e} is below the reciprocal floor")]
    NearZeroConstantTerm(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("class {0} requires a companion function")]
    MissingCompanion(String),

    #[error("companion function is not a member of {0}")]
    CompanionNotMember(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("generation exhausted after {rejections} rejections for {class}")]
    GenerationExhausted { class: String, rejections: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
