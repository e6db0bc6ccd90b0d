//! Floor-plan raster vectorization into axis-aligned wall rectangles, plus
//! the white-background guidance arithmetic used when generating plans with
//! a latent diffusion model.

pub mod corners;
pub mod error;
pub mod guidance;
pub mod io;
pub mod pipeline;
pub mod postprocess;
pub mod raster;
pub mod snap;
pub mod svg;
pub mod synth;
pub mod wallfit;

pub use corners::{detect_corners, CornerParams, CornerPoint};
pub use error::{CornerError, FitError, GuidanceError, PipelineError, RasterError, SvgParseError, SynthError};
pub use pipeline::{vectorize, vectorize_binary, CornerSource, PipelineConfig, VectorizeOutput};
pub use postprocess::{postprocess, VectorPlan};
pub use raster::{binarize, to_grayscale, BinaryImage, RasterImage};
pub use snap::AxisGrid;
pub use svg::{parse_svg, to_svg, SvgDocument};
pub use wallfit::WallRect;
