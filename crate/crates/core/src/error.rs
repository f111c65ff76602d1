use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("distance matrix has infinite entries; {0} is undefined")]
    InfiniteDistance(&'static str),

    #[error("minimum distance needs at least two codewords, got {0}")]
    UndefinedMinDistance(usize),

    /// Not a squared Euclidean distance. `witness` is a zero-sum vector with a
    /// positive quadratic form.
    #[error(
        "distance is not of negative type (quadratic form {form:.3e} > 0 on a zero-sum vector)"
    )]
    NotEmbeddable { witness: Vec<f64>, form: f64 },

    #[error("distance matrix is not circularly symmetric")]
    WrongSymmetry,

    #[error("wrong distance class: {0}")]
    WrongClass(String),

    #[error("condition not met: {0}")]
    ConditionNotMet(String),

    #[error("budget exceeded: {what} needs {needed} but the limit is {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. } => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
