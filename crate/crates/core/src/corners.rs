//! Shi-Tomasi corner detection.
//!
//! Gradients come from 3x3 Sobel kernels with edge-replicated borders. The
//! structure tensor at each pixel is an unweighted box sum of gradient
//! products over a `(2r+1)^2` window (clipped at the image border), and the
//! corner score is the tensor's smaller eigenvalue. Candidates above a
//! fraction of the strongest score go through greedy non-maximum suppression.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CornerError;
use crate::raster::RasterImage;

/// Sobel responses of a gray image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<i32>,
    pub gy: Vec<i32>,
}

/// A detected corner. Coordinates are pixel indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerPoint {
    pub x: f64,
    pub y: f64,
    pub response: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    /// Fraction of the strongest response a pixel needs to become a candidate.
    pub quality_level: f64,
    /// Minimum Euclidean distance between two accepted corners.
    pub min_distance: f64,
    /// `None` keeps every corner that survives suppression.
    pub max_corners: Option<usize>,
    /// Half-size of the structure tensor window.
    pub window_radius: usize,
}

impl Default for CornerParams {
    fn default() -> Self {
        Self { quality_level: 0.05, min_distance: 8.0, max_corners: None, window_radius: 2 }
    }
}

impl CornerParams {
    pub fn validate(&self) -> Result<(), CornerError> {
        if !(self.quality_level > 0.0 && self.quality_level <= 1.0) {
            return Err(CornerError::InvalidParams("quality_level must be in (0, 1]"));
        }
        if self.min_distance.is_nan() || self.min_distance < 1.0 {
            return Err(CornerError::InvalidParams("min_distance must be at least 1 pixel"));
        }
        if self.window_radius < 1 {
            return Err(CornerError::InvalidParams("window_radius must be at least 1"));
        }
        Ok(())
    }
}

/// Applies the 3x3 Sobel operator with edge-replicate borders.
pub fn sobel_gradients(gray: &RasterImage) -> Result<GradientField, CornerError> {
    if gray.channels() != 1 {
        return Err(CornerError::NotGray(gray.channels()));
    }
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Err(CornerError::TooSmall { width: w, height: h, min: 3 });
    }
    let px = |x: isize, y: isize| -> i32 {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        gray.get(xc, yc, 0) as i32
    };
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let right = px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1);
            let left = px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1);
            let bottom = px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1);
            let top = px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1);
            let i = y as usize * w + x as usize;
            gx[i] = right - left;
            gy[i] = bottom - top;
        }
    }
    Ok(GradientField { width: w, height: h, gx, gy })
}

/// Smaller eigenvalue of the symmetric tensor `[[a, b], [b, c]]`.
#[inline]
pub fn shi_tomasi_response(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    mean - (half_diff * half_diff + b * b).sqrt()
}

/// Cumulative table with one row and column of zero padding.
fn integral(values: &[i64], w: usize, h: usize) -> Vec<i64> {
    let stride = w + 1;
    let mut table = vec![0i64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0i64;
        for x in 0..w {
            row += values[y * w + x];
            table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
        }
    }
    table
}

/// Minimum-eigenvalue map of the box-summed structure tensor, row-major.
pub fn response_map(grad: &GradientField, window_radius: usize) -> Vec<f64> {
    let (w, h) = (grad.width, grad.height);
    let products = |f: fn(i64, i64) -> i64| -> Vec<i64> {
        grad.gx.iter().zip(&grad.gy).map(|(&x, &y)| f(x as i64, y as i64)).collect()
    };
    let sxx = integral(&products(|x, _| x * x), w, h);
    let sxy = integral(&products(|x, y| x * y), w, h);
    let syy = integral(&products(|_, y| y * y), w, h);
    let stride = w + 1;
    let r = window_radius;

    let mut out = vec![0f64; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y0 = y.saturating_sub(r);
        let y1 = (y + r + 1).min(h);
        for (x, slot) in row.iter_mut().enumerate() {
            let x0 = x.saturating_sub(r);
            let x1 = (x + r + 1).min(w);
            let sum = |t: &[i64]| t[y1 * stride + x1] - t[y0 * stride + x1] - t[y1 * stride + x0] + t[y0 * stride + x0];
            *slot = shi_tomasi_response(sum(&sxx) as f64, sum(&sxy) as f64, sum(&syy) as f64);
        }
    });
    out
}

/// Detects corners, strongest first.
pub fn detect_corners(gray: &RasterImage, params: &CornerParams) -> Result<Vec<CornerPoint>, CornerError> {
    params.validate()?;
    let min_side = 2 * params.window_radius + 3;
    if gray.width() < min_side || gray.height() < min_side {
        return Err(CornerError::TooSmall { width: gray.width(), height: gray.height(), min: min_side });
    }
    let grad = sobel_gradients(gray)?;
    let responses = response_map(&grad, params.window_radius);
    Ok(suppress(&responses, grad.width, grad.height, params))
}

/// Thresholds the response map and runs greedy non-maximum suppression.
/// Equal responses are ordered by `(y, x)`.
pub(crate) fn suppress(responses: &[f64], width: usize, height: usize, params: &CornerParams) -> Vec<CornerPoint> {
    let max = responses.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = params.quality_level * max;
    let mut candidates: Vec<usize> = (0..responses.len()).filter(|&i| responses[i] >= floor).collect();
    // Index order is (y, x) order, so a stable sort keeps the tie-break.
    candidates.sort_by(|&a, &b| responses[b].total_cmp(&responses[a]));

    let limit = params.max_corners.unwrap_or(usize::MAX);
    let cell = params.min_distance;
    let cols = (width as f64 / cell).ceil() as usize + 1;
    let rows = (height as f64 / cell).ceil() as usize + 1;
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cols * rows];
    let min_sq = params.min_distance * params.min_distance;

    let mut accepted = Vec::new();
    for idx in candidates {
        if accepted.len() >= limit {
            break;
        }
        let (x, y) = ((idx % width) as f64, (idx / width) as f64);
        let (cx, cy) = ((x / cell) as usize, (y / cell) as usize);
        let crowded = (cy.saturating_sub(1)..=(cy + 1).min(rows - 1)).any(|by| {
            (cx.saturating_sub(1)..=(cx + 1).min(cols - 1)).any(|bx| {
                buckets[by * cols + bx].iter().any(|&(ax, ay)| (ax - x).powi(2) + (ay - y).powi(2) < min_sq)
            })
        });
        if crowded {
            continue;
        }
        buckets[cy * cols + cx].push((x, y));
        accepted.push(CornerPoint { x, y, response: responses[idx] });
    }
    accepted
}
