use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),
    #[error("expected a {expected}-channel image, got {found} channels")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("pixel buffer holds {found} samples, expected {expected}")]
    DataLength { expected: usize, found: usize },
    #[error("cannot read image {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write image {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum CornerError {
    #[error("image {width}x{height} is smaller than the {min}x{min} minimum")]
    TooSmall { width: usize, height: usize, min: usize },
    #[error("invalid corner parameter: {0}")]
    InvalidParams(&'static str),
    #[error("gradient input must be single-channel, got {0} channels")]
    NotGray(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("invalid fit parameter: {0}")]
    InvalidParams(&'static str),
    #[error(
        "grid of {xs} x-lines and {ys} y-lines yields {count} candidate rectangles (cap {cap}); \
         raise the snap tolerance to merge nearby lines"
    )]
    TooDense { xs: usize, ys: usize, count: u64, cap: u64 },
    #[error("rectangle ({x0},{y0})-({x1},{y1}) is empty or outside the {width}x{height} image")]
    OutOfBounds { x0: u32, y0: u32, x1: u32, y1: u32, width: usize, height: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct SvgParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("cumulative product alpha_bar at step {t} is zero; the latent update divides by it")]
    DivisionByZero { t: usize },
    #[error("invalid guidance configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("infeasible plan configuration: {0}")]
    InfeasibleConfig(String),
    #[error("invalid noise configuration: {0}")]
    InvalidNoise(String),
}

/// Errors surfaced by the end-to-end vectorization pipeline.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Corner(#[from] CornerError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("snap tolerance must be positive and finite, got {0}")]
    SnapTolerance(f64),
}
