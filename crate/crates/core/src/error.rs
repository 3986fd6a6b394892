use alloc::string::String;
use core::fmt;

/// An invariant violation, optionally pinned to a frame index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub frame: Option<i64>,
    pub message: String,
}

impl ValidationError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { frame: None, message: message.into() }
    }

    pub fn at_frame(frame: i64, message: impl Into<String>) -> Self {
        Self { frame: Some(frame), message: message.into() }
    }

    pub fn in_frame(mut self, frame: i64) -> Self {
        self.frame.get_or_insert(frame);
        self
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame {
            Some(frame) => write!(f, "frame {frame}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl core::error::Error for ValidationError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    Validation(ValidationError),
    /// Bad configuration: parameters that can never produce a result.
    Config(String),
    /// Requested frames fall outside the sequence.
    Range(String),
    /// Raster dimensions disagree or are too small.
    Shape(String),
    Backend(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(e) => write!(f, "validation error: {e}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Range(m) => write!(f, "range error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Backend(m) => write!(f, "backend error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<ValidationError> for Error {
    fn from(e: ValidationError) -> Self {
        Error::Validation(e)
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
