use std::fmt;

#[derive(Debug)]
pub enum Error {
    Core(rayflow_core::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    UnknownDataset(String),
    Config { line: usize, message: String },
    SizeMismatch { left: usize, right: usize },
    SizeCap { size: usize, cap: usize },
    Checkpoint(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Core(e) => write!(f, "{e}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
            Error::UnknownDataset(name) => write!(f, "unknown dataset: {name}"),
            Error::Config { line, message } => write!(f, "config line {line}: {message}"),
            Error::SizeMismatch { left, right } => {
                write!(f, "point sets differ in size: {left} vs {right}")
            }
            Error::SizeCap { size, cap } => {
                write!(f, "point set size {size} exceeds exact-assignment cap {cap}")
            }
            Error::Checkpoint(m) => write!(f, "checkpoint: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<rayflow_core::Error> for Error {
    fn from(e: rayflow_core::Error) -> Self {
        Error::Core(e)
    }
}
impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
