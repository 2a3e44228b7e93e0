use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading stacks, building weights, or fusing.
#[derive(Debug, Error)]
pub enum FusionError {
    /// The input directory contained no decodable images.
    #[error("no decodable images in {}", .0.display())]
    EmptyStack(PathBuf),

    /// An image in the stack does not match the dimensions of the first one.
    #[error("{}: image is {got_w}x{got_h}, expected {want_w}x{want_h}", path.display())]
    DimensionMismatch {
        path: PathBuf,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },

    /// A file looked like an image but could not be decoded.
    #[error("failed to decode {}", path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// A file could not be encoded or written.
    #[error("failed to encode {}", path.display())]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// An operation that requires RGB input was given something else.
    #[error("expected a 3-channel image, got {0} channel(s)")]
    ChannelMismatch(usize),

    /// Operands that must share dimensions or counts do not.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// Stack images are below the minimum supported size.
    #[error("images must be at least 2x2, got {width}x{height}")]
    ImageTooSmall { width: usize, height: usize },

    /// A pyramid level count outside the valid range for the image size.
    #[error("invalid pyramid level count {requested}: valid range is 1..={max}")]
    InvalidLevels { requested: usize, max: usize },

    /// Fusion was handed a weight stack that skipped normalization.
    #[error("weight maps must be normalized to a per-pixel partition of unity")]
    NotNormalized,

    /// A configuration value outside its documented domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An underlying filesystem error.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FusionError>;
