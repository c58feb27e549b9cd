use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while building domain values, evaluating, or loading files.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box [{x}, {y}, {w}, {h}]: width and height must be positive and finite")]
    InvalidBox { x: f64, y: f64, w: f64, h: f64 },

    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),

    #[error("IoU threshold {0} is outside [0, 1]")]
    InvalidIouThreshold(f64),

    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),

    #[error("invalid perturbation plan: {0}")]
    InvalidPlan(String),

    #[error("injection fraction {0} must be non-negative")]
    NegativeFraction(f64),

    #[error("baseline bags are empty (N = 0)")]
    EmptyBaseline,

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed document at `{key_path}`: {message}", path.display())]
    Malformed {
        path: PathBuf,
        key_path: String,
        message: String,
    },

    #[error("{}: {context} references unknown image id {image_id}", path.display())]
    UnknownImage {
        path: PathBuf,
        context: String,
        image_id: u64,
    },

    #[error("{}: {context} references unknown category id {category_id}", path.display())]
    UnknownCategory {
        path: PathBuf,
        context: String,
        category_id: u32,
    },

    #[error("{}: {context} has a zero-area or invalid bbox {bbox:?}", path.display())]
    InvalidAnnotationBox {
        path: PathBuf,
        context: String,
        bbox: [f64; 4],
    },

    #[error("{}: detection entry {index} has score {score} outside [0, 1]", path.display())]
    ScoreOutOfRange { path: PathBuf, index: usize, score: f64 },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
