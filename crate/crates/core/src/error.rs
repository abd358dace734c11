use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian: max |A - A'| = {0:.3e}")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite: min eigenvalue = {0:.3e}")]
    NotPositive(f64),

    #[error("trace must be 1, got deviation {0:.3e}")]
    BadTrace(f64),

    #[error("operator is not unitary: max |UU' - I| = {0:.3e}")]
    NotUnitary(f64),

    #[error("register of {n} qubits exceeds the cap of {cap} for {what}")]
    TooLarge {
        n: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("expected a {expected} scheme input, got {got}")]
    SchemeMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
