use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no usable edges")]
    NoUsableEdges,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The iterative solver hit its iteration limit. `row` is set when the
    /// failure happened inside a batch of right-hand sides.
    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:.3e}){}",
        row.map(|r| format!(" on row {r}")).unwrap_or_default()
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        row: Option<usize>,
    },

    #[error("dense oracle refused: n = {n} exceeds cap {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("combinatorial budget exceeded: C({n}, {k}) > {budget}")]
    BudgetExceeded { n: usize, k: usize, budget: u64 },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }

    pub(crate) fn at_row(self, index: usize) -> Self {
        match self {
            Error::NotConverged {
                iterations,
                residual,
                row: None,
            } => Error::NotConverged {
                iterations,
                residual,
                row: Some(index),
            },
            other => other,
        }
    }
}
