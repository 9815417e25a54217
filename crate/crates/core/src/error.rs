use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the measure toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode image {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot encode image {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot read {path}: {source}")]
    FileRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    FileWrite {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid image buffer: {0}")]
    InvalidBuffer(String),
    #[error("resize by {scale} of a {width}x{height} image yields a degenerate size")]
    DegenerateResize { width: usize, height: usize, scale: f64 },
    #[error("expected a 3-channel image, got {0} channel(s)")]
    ChannelMismatch(usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    WindowTooLarge { width: usize, height: usize, window: usize },
    #[error("image {width}x{height} is smaller than one {block}x{block} block")]
    BlockTooLarge { width: usize, height: usize, block: usize },
    #[error("no samples remain after trimming")]
    EmptyAfterTrim,
    #[error("angular error is undefined for the zero vector")]
    ZeroVector,
    #[error("invalid annotation file {path}: {reason}")]
    Annotation { path: PathBuf, reason: String },
    #[error("duplicate patch label {0:?}")]
    DuplicateLabel(String),
    #[error("polygon {label:?} has {count} vertices, at least 3 required")]
    TooFewVertices { label: String, count: usize },
    #[error("polygon {label:?} extends outside the {width}x{height} image")]
    PolygonOutOfBounds { label: String, width: usize, height: usize },
    #[error("patch {0:?} has no interior pixels after erosion")]
    EmptyPatchInterior(String),
    #[error("annotation label {0:?} does not match any reference patch")]
    UnmatchedLabel(String),
    #[error("invalid reference chart: {0}")]
    Chart(String),
    #[error("invalid config {path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error("dataset layout: {0}")]
    Layout(String),
}

pub type Result<T> = std::result::Result<T, Error>;
