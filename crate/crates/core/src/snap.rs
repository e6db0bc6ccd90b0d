//! Collapsing corner coordinates onto shared axis lines.
//!
//! Each axis is clustered independently by single linkage on the sorted
//! values and every cluster is replaced by its mean, so corners that belong
//! to one straight wall face end up on exactly the same line.

use serde::{Deserialize, Serialize};

use crate::corners::CornerPoint;
use crate::raster::BinaryImage;

/// Sorted, strictly increasing x- and y-line coordinates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// A corner expressed as indices into an [`AxisGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SnappedCorner {
    pub x_index: usize,
    pub y_index: usize,
}

/// Clusters `values` (gap `<= tol` joins) and returns the cluster means in
/// increasing order. Panics if `tol` is not positive.
pub fn snap_axis(values: &[f64], tol: f64) -> Vec<f64> {
    assert!(tol > 0.0, "snap tolerance must be positive, got {tol}");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centers = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            let cluster = &sorted[start..i];
            if !cluster.is_empty() {
                centers.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            }
            start = i;
        }
    }
    centers
}

/// Index of the line closest to `v`; `lines` must be non-empty and sorted.
fn nearest(lines: &[f64], v: f64) -> usize {
    let i = lines.partition_point(|&l| l < v);
    if i == 0 {
        0
    } else if i == lines.len() || (v - lines[i - 1]) <= (lines[i] - v) {
        i - 1
    } else {
        i
    }
}

/// Builds the axis grid from corner coordinates and maps each corner onto it.
pub fn snap_corners(corners: &[CornerPoint], tol: f64) -> (AxisGrid, Vec<SnappedCorner>) {
    let xs = snap_axis(&corners.iter().map(|c| c.x).collect::<Vec<_>>(), tol);
    let ys = snap_axis(&corners.iter().map(|c| c.y).collect::<Vec<_>>(), tol);
    let snapped = corners
        .iter()
        .map(|c| SnappedCorner { x_index: nearest(&xs, c.x), y_index: nearest(&ys, c.y) })
        .collect();
    (AxisGrid { xs, ys }, snapped)
}

/// Per-boundary running counts of ink/background transitions.
///
/// `vertical[k * (h + 1) + y]` counts rows `< y` where pixels `k - 1` and `k`
/// differ (outside the image counts as background); `horizontal` is the
/// transpose for boundaries between rows.
struct TransitionTable {
    width: usize,
    height: usize,
    vertical: Vec<u32>,
    horizontal: Vec<u32>,
}

impl TransitionTable {
    fn new(img: &BinaryImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let ink = |x: isize, y: isize| -> bool {
            x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && img.get(x as usize, y as usize)
        };
        let mut vertical = vec![0u32; (w + 1) * (h + 1)];
        for k in 0..=w {
            let base = k * (h + 1);
            for y in 0..h {
                let edge = ink(k as isize - 1, y as isize) != ink(k as isize, y as isize);
                vertical[base + y + 1] = vertical[base + y] + edge as u32;
            }
        }
        let mut horizontal = vec![0u32; (h + 1) * (w + 1)];
        for k in 0..=h {
            let base = k * (w + 1);
            for x in 0..w {
                let edge = ink(x as isize, k as isize - 1) != ink(x as isize, k as isize);
                horizontal[base + x + 1] = horizontal[base + x] + edge as u32;
            }
        }
        Self { width: w, height: h, vertical, horizontal }
    }

    /// Transitions across vertical boundary `k` within rows `[y0, y1)`.
    fn vertical_count(&self, k: usize, y0: usize, y1: usize) -> u32 {
        let base = k * (self.height + 1);
        self.vertical[base + y1] - self.vertical[base + y0]
    }

    fn horizontal_count(&self, k: usize, x0: usize, x1: usize) -> u32 {
        let base = k * (self.width + 1);
        self.horizontal[base + x1] - self.horizontal[base + x0]
    }
}

/// Moves every grid line onto the ink/background boundaries within `radius`
/// pixels: the new position is the mean boundary index weighted by the number
/// of transitions across it, rounded to a whole pixel.
///
/// Corner peaks sit a pixel or two inside the corner's wedge, so cluster
/// means land near, not on, the wall faces. Transitions are counted only over
/// the span covered by the corners that produced the line, so a face that
/// wanders by a pixel is placed at its average position. Lines with no
/// transition nearby are kept as they are; lines that land on the same
/// boundary are merged.
pub fn align_grid(
    grid: &AxisGrid,
    corners: &[CornerPoint],
    snapped: &[SnappedCorner],
    img: &BinaryImage,
    radius: usize,
) -> AxisGrid {
    let table = TransitionTable::new(img);
    let (w, h) = (img.width(), img.height());

    let mut spans_x = vec![(f64::INFINITY, f64::NEG_INFINITY); grid.xs.len()];
    let mut spans_y = vec![(f64::INFINITY, f64::NEG_INFINITY); grid.ys.len()];
    for (c, s) in corners.iter().zip(snapped) {
        let sx = &mut spans_x[s.x_index];
        *sx = (sx.0.min(c.y), sx.1.max(c.y));
        let sy = &mut spans_y[s.y_index];
        *sy = (sy.0.min(c.x), sy.1.max(c.x));
    }

    let align = |lines: &[f64], spans: &[(f64, f64)], extent: usize, across: usize, count: &dyn Fn(usize, usize, usize) -> u32| {
        let mut out: Vec<f64> = lines
            .iter()
            .zip(spans)
            .map(|(&line, &(lo, hi))| {
                if !lo.is_finite() {
                    return line;
                }
                let a0 = (lo.floor() as isize - radius as isize).max(0) as usize;
                let a1 = ((hi.ceil() as usize) + radius + 1).min(across);
                // A pixel index p has its centre at p + 0.5 in boundary coordinates.
                let centre = (line + 0.5).round() as isize;
                if centre + (radius as isize) < 0 || centre - (radius as isize) > extent as isize {
                    return line;
                }
                let k0 = (centre - radius as isize).max(0) as usize;
                let k1 = ((centre + radius as isize) as usize).min(extent);
                let (mut n, mut sum) = (0u64, 0u64);
                for k in k0..=k1 {
                    let c = count(k, a0, a1) as u64;
                    n += c;
                    sum += c * k as u64;
                }
                if n == 0 {
                    line
                } else {
                    (sum as f64 / n as f64).round()
                }
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    };

    AxisGrid {
        xs: align(&grid.xs, &spans_x, w, h, &|k, a0, a1| table.vertical_count(k, a0, a1)),
        ys: align(&grid.ys, &spans_y, h, w, &|k, a0, a1| table.horizontal_count(k, a0, a1)),
    }
}
