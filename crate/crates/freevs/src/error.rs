use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{}: format error: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("camera {camera} at frame {frame}: {source}")]
    CameraImage {
        camera: String,
        frame: i64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Core(#[from] freevs_core::Error),
    #[error("usage: {0}")]
    Usage(String),
}

impl From<freevs_core::ValidationError> for Error {
    fn from(e: freevs_core::ValidationError) -> Self {
        Error::Core(e.into())
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }

    /// 2 for usage and configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(freevs_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
