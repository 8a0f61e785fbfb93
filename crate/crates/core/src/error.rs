use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition (index out of range,
    /// mismatched dimensions, a mask that does not fit its width, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is structurally valid but the operation is not defined on
    /// it (e.g. restricting a model with no active indices).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A value table does not match the documented file schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A linear system could not be inverted.
    #[error("singular system: {0}")]
    Singular(String),

    /// A sampled regression design does not pin down the solution.
    #[error("underdetermined system: {0}")]
    Underdetermined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
