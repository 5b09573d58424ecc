use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Each variant names the failure class; the CLI maps them onto exit codes
/// (configuration problems exit with 2, numerical problems with 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Argument so large that the evaluation scheme cannot converge.
    #[error("overflow in {func}: argument {arg} exceeds {limit}")]
    Overflow {
        func: &'static str,
        arg: f64,
        limit: f64,
    },

    /// Model parameters that admit no valid instance.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative scheme failed to converge.
    #[error("numerical error in {module}: {msg}")]
    Numerical { module: &'static str, msg: String },

    /// A cross-check between two routes to the same quantity failed.
    #[error("consistency error in {module}: {msg}")]
    Consistency { module: &'static str, msg: String },

    /// Not enough data to form an estimate.
    #[error("estimation error: {msg} (need at least {required}, got {got})")]
    Estimation {
        msg: String,
        required: usize,
        got: usize,
    },

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    pub(crate) fn numerical(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn consistency(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Consistency {
            module,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
