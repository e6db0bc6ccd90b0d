//! End-to-end vectorization: binarize, detect corners, snap and align the
//! grid, fit walls, clean up.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corners::{detect_corners, CornerParams, CornerPoint};
use crate::error::PipelineError;
use crate::postprocess::{postprocess, VectorPlan};
use crate::raster::{binarize, to_grayscale, BinaryImage, RasterImage, DEFAULT_THRESHOLD};
use crate::snap::{align_grid, snap_corners, AxisGrid};
use crate::wallfit::{build_sat, enumerate_candidates, select_walls, FitParams};

/// Width at which the size-dependent defaults (snap tolerance, wall
/// thickness and length bounds) are specified; other widths scale them by
/// `width / REFERENCE_WIDTH`.
pub const REFERENCE_WIDTH: f64 = 1024.0;

/// Snap tolerance at the reference width.
pub const DEFAULT_SNAP_TOL: f64 = 6.0;

/// Which image the corner detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerSource {
    /// The thresholded mask rendered back to 0/255.
    #[default]
    Binary,
    /// The grayscale input before thresholding.
    Grayscale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: u8,
    pub corners: CornerParams,
    pub snap_tol: f64,
    /// Move snapped lines onto the nearest ink boundary.
    pub align_edges: bool,
    pub fit: FitParams,
    pub postprocess: bool,
    pub corner_source: CornerSource,
}

impl PipelineConfig {
    /// Defaults for an image `width` pixels wide.
    pub fn scaled(width: usize) -> Self {
        let k = width as f64 / REFERENCE_WIDTH;
        Self {
            threshold: DEFAULT_THRESHOLD,
            corners: CornerParams::default(),
            snap_tol: DEFAULT_SNAP_TOL * k,
            align_edges: true,
            fit: FitParams::scaled(width),
            postprocess: true,
            corner_source: CornerSource::Binary,
        }
    }

    /// Search radius used when aligning grid lines to ink boundaries.
    pub fn align_radius(&self) -> usize {
        (self.snap_tol.ceil() as usize).max(3)
    }
}

/// Human-readable table of the defaults and how they scale.
pub fn defaults_table() -> String {
    let c = CornerParams::default();
    let f = FitParams::default();
    let rows = [
        ("threshold", format!("{DEFAULT_THRESHOLD}"), "fixed"),
        ("quality-level", format!("{}", c.quality_level), "fixed"),
        ("min-distance", format!("{} px", c.min_distance), "fixed"),
        ("window-radius", format!("{} px", c.window_radius), "fixed"),
        ("snap-tol", format!("{DEFAULT_SNAP_TOL} px"), "x width/1024"),
        ("min-fill", format!("{}", f.min_fill), "fixed"),
        ("min-gain", format!("{}", f.min_gain), "fixed"),
        ("min-thickness", format!("{} px", f.min_thickness), "x width/1024"),
        ("max-thickness", format!("{} px", f.max_thickness), "x width/1024"),
        ("min-length", format!("{} px", f.min_length), "x width/1024"),
    ];
    let mut out = String::from("Defaults (scaled values given at 1024 px width):\n");
    for (name, value, scaling) in rows {
        out.push_str(&format!("  {name:<14} {value:<8} {scaling}\n"));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorizeOutput {
    pub plan: VectorPlan,
    pub corners: Vec<CornerPoint>,
    pub grid: AxisGrid,
    pub candidate_count: usize,
    pub selected_count: usize,
    pub elapsed_seconds: f64,
}

/// Vectorizes a 1- or 3-channel raster.
pub fn vectorize(img: &RasterImage, cfg: &PipelineConfig) -> Result<VectorizeOutput, PipelineError> {
    let start = Instant::now();
    let gray = if img.channels() == 1 { img.clone() } else { to_grayscale(img)? };
    let binary = binarize(&gray, cfg.threshold)?;
    let detector_input = match cfg.corner_source {
        CornerSource::Binary => None,
        CornerSource::Grayscale => Some(&gray),
    };
    let mut out = run(&binary, detector_input, cfg)?;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Vectorizes an already thresholded mask.
pub fn vectorize_binary(binary: &BinaryImage, cfg: &PipelineConfig) -> Result<VectorizeOutput, PipelineError> {
    let start = Instant::now();
    let mut out = run(binary, None, cfg)?;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

fn run(binary: &BinaryImage, gray: Option<&RasterImage>, cfg: &PipelineConfig) -> Result<VectorizeOutput, PipelineError> {
    if !(cfg.snap_tol.is_finite() && cfg.snap_tol > 0.0) {
        return Err(PipelineError::SnapTolerance(cfg.snap_tol));
    }
    let (w, h) = (binary.width(), binary.height());
    let rendered;
    let detector_input = match gray {
        Some(g) => g,
        None => {
            rendered = binary.to_gray();
            &rendered
        }
    };
    // Walls drawn flush with the canvas edge have no gradient under
    // edge-replicate borders; a background margin gives their outer corners
    // a response.
    let pad = cfg.corners.window_radius + 2;
    let corners: Vec<CornerPoint> = detect_corners(&pad_with_background(detector_input, pad), &cfg.corners)?
        .into_iter()
        .map(|c| CornerPoint { x: c.x - pad as f64, y: c.y - pad as f64, ..c })
        .collect();
    let (mut grid, snapped) = snap_corners(&corners, cfg.snap_tol);
    if cfg.align_edges {
        grid = align_grid(&grid, &corners, &snapped, binary, cfg.align_radius());
    }
    let candidates = enumerate_candidates(&grid, &cfg.fit, (w, h))?;
    let sat = build_sat(binary);
    let walls = select_walls(&candidates, &sat, &cfg.fit);
    let selected_count = walls.len();
    let mut plan = VectorPlan::new(w as u32, h as u32, walls);
    if cfg.postprocess {
        plan = postprocess(&plan);
    }
    Ok(VectorizeOutput {
        plan,
        corners,
        grid,
        candidate_count: candidates.len(),
        selected_count,
        elapsed_seconds: 0.0,
    })
}

fn pad_with_background(gray: &RasterImage, pad: usize) -> RasterImage {
    let (w, h) = (gray.width(), gray.height());
    let pw = w + 2 * pad;
    let mut data = vec![255u8; pw * (h + 2 * pad)];
    for (y, row) in gray.data().chunks_exact(w).enumerate() {
        let start = (y + pad) * pw + pad;
        data[start..start + w].copy_from_slice(row);
    }
    RasterImage::new(pw, h + 2 * pad, 1, data).expect("padded buffer matches its dimensions")
}
