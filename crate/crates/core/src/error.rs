//! Error taxonomy shared by every stage of the toolkit.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image dimensions must be at least 1x1")]
    ZeroDimension,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("marker exceeds mask: marker({marker}) > mask({mask}) at ({x}, {y})")]
    MarkerExceedsMask { x: u32, y: u32, marker: f64, mask: f64 },

    #[error("mask contains no true pixel")]
    EmptyMask,

    #[error("marker image contains no marker pixel")]
    EmptyMarker,

    #[error("image {width}x{height} exceeds the {max}x{max} limit of the reference flooder")]
    ImageTooLarge { width: u32, height: u32, max: u32 },

    #[error("contour initialization is degenerate (all inside or all outside)")]
    DegenerateInit,

    #[error("image contains a non-finite value at ({x}, {y})")]
    NonFiniteImage { x: u32, y: u32 },

    #[error("sample {index} of the interferogram is not finite")]
    NonFiniteSample { index: usize },

    #[error("window length must be at least 2 (got {0})")]
    DimensionTooSmall(usize),

    #[error("reflector depth bin {bin} is invalid: {reason}")]
    DepthOutOfRange { bin: usize, reason: String },

    #[error("cannot place {requested} sac seeds at the required separation in a {width}x{height} canvas")]
    TooManySacs { requested: u32, width: u32, height: u32 },

    #[error("value out of representable range: {0}")]
    Range(String),
}
