use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature hit its subdivision limit. The partial estimate is kept.
    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {abs_error:e} after {intervals} intervals")]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("root not bracketed: g({lo}) = {g_lo:e}, g({hi}) = {g_hi:e}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("no sign change found after {attempts} bracket expansions (last bracket [{lo}, {hi}]){}", context_suffix(.context))]
    BracketExpansion {
        attempts: usize,
        lo: f64,
        hi: f64,
        context: Option<String>,
    },

    #[error("root finder did not converge in {iterations} iterations (bracket [{lo}, {hi}])")]
    RootNoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("shift function root failed at t = {t}: {source}")]
    ShiftRoot {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" [{c}]"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical machinery (quadrature, root finding).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::InvalidBracket { .. }
                | Error::BracketExpansion { .. }
                | Error::RootNoConvergence { .. }
                | Error::ShiftRoot { .. }
        )
    }
}
