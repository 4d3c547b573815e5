use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid isoparametric map: {0}")]
    InvalidMap(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e}; {history})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: String,
    },

    #[error("cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable category, used by the CLI for error reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::InvalidMap(_) => "invalid_map",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::NotConverged { .. } => "not_converged",
            Error::Cell { source, .. } | Error::Context { source, .. } => source.category(),
            Error::Io(_) => "io",
            Error::Json(_) => "parse",
            Error::Csv(e) if e.is_io_error() => "io",
            Error::Csv(_) => "parse",
        }
    }

    pub fn in_cell(self, cell: usize) -> Error {
        Error::Cell {
            cell,
            source: Box::new(self),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
