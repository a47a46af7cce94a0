use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum HarnessError {
    /// Malformed or inconsistent configuration (exit 2).
    Schema(String),
    /// Qubit count or depth beyond a module budget (exit 3).
    Capacity(String),
    /// Failure while computing; names the unit when one was running (exit 1).
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Runtime(_) => 1,
            HarnessError::Schema(_) => 2,
            HarnessError::Capacity(_) => 3,
        }
    }

    /// Classifies a library error raised during static validation.
    pub fn from_validation(context: impl fmt::Display, err: vqc_core::Error) -> Self {
        use vqc_core::Error as E;
        let msg = format!("{context}: {err}");
        match err {
            E::DepthCapacity { .. } | E::Budget { .. } => HarnessError::Capacity(msg),
            _ => HarnessError::Schema(msg),
        }
    }

    pub fn io(context: impl fmt::Display, err: std::io::Error) -> Self {
        HarnessError::Runtime(format!("{context}: {err}"))
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Schema(m) => write!(f, "schema error: {m}"),
            HarnessError::Capacity(m) => write!(f, "capacity error: {m}"),
            HarnessError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
