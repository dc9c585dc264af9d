use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] tickgate_core::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type HResult<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        HarnessError::Config { path: path.into(), msg: msg.into() }
    }

    /// 0 success, 1 numerical-invariant violation, 2 config error, 3 capability overflow.
    pub fn exit_code(&self) -> i32 {
        use tickgate_core::Error as E;
        match self {
            HarnessError::Config { .. } | HarnessError::Io { .. } => 2,
            HarnessError::Core(E::InvalidParameter { .. })
            | HarnessError::Core(E::NotUnitary { .. })
            | HarnessError::Core(E::DimensionMismatch { .. }) => 2,
            HarnessError::Core(E::CapabilityExceeded { .. }) => 3,
            HarnessError::Core(_) | HarnessError::Invariant(_) => 1,
        }
    }

    /// Hint printed next to a capability overflow.
    pub fn suggestion(&self) -> Option<String> {
        match self {
            HarnessError::Core(tickgate_core::Error::CapabilityExceeded { what, dim, cap }) => Some(format!(
                "{what}: dimension {dim} > {cap}; lower model.d (dimension scales as d_L·d), \
                 shorten the bus column, or switch run.method to \"splitstep\""
            )),
            _ => None,
        }
    }
}
