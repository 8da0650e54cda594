use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Gamma function evaluated at a pole (`0, -1, -2, ...`).
    #[error("gamma function pole: x = {x} is a non-positive integer")]
    GammaPole { x: f64 },

    /// A power series did not meet its tolerance within the term budget.
    #[error("series did not converge within {max_terms} terms (last term {last_term:e})")]
    SeriesNonConvergence { max_terms: usize, last_term: f64 },

    /// A scalar argument lies outside its admissible range.
    /// `range` spells the admissible set, e.g. `"(1, 2)"`.
    #[error("{name} = {value} outside admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    /// Invalid tolerance or term budget.
    #[error("{0}")]
    InvalidTolerance(String),

    /// A function or kernel evaluation produced a non-finite value.
    #[error("non-finite value at node {index} (t = {t})")]
    NonFiniteEval { index: usize, t: f64 },

    /// The requested operation is not available for this input kind,
    /// e.g. exact derivatives of tabulated data.
    #[error("{0}")]
    Unsupported(String),

    /// Malformed tabulated data or descriptor.
    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value,
            range: range.into(),
        }
    }
}
