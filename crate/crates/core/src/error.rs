use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A level has zero within-group variance, so the normal likelihood is
    /// unbounded in that level's variance.
    #[error("degenerate variance at level index {level}: within-group variance is zero")]
    DegenerateVariance { level: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed CSV rows, with 1-based line numbers.
    #[error("malformed input on line(s) {}: {message}", join_lines(.lines))]
    Malformed { lines: Vec<usize>, message: String },

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn join_lines(lines: &[usize]) -> String {
    lines
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
