//! Wall rectangle search over the snapped grid.
//!
//! Every pair of x-lines and pair of y-lines spans a candidate rectangle.
//! Candidates with wall-like proportions are scored by their ink fill ratio
//! (constant time through a summed-area table) and then accepted greedily,
//! best first, as long as each one still explains enough ink that earlier
//! walls did not.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::raster::BinaryImage;
use crate::snap::AxisGrid;

/// Upper bound on the number of candidates `enumerate_candidates` will build.
pub const CANDIDATE_CAP: u64 = 2_000_000;

/// Half-open axis-aligned rectangle `[x0, x1) x [y0, y1)` in pixels.
///
/// `fill` is an annotation (ink fraction measured during selection) and does
/// not take part in equality, ordering or hashing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WallRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
    pub fill: Option<f64>,
}

impl WallRect {
    pub const fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1, fill: None }
    }

    pub fn with_fill(mut self, fill: f64) -> Self {
        self.fill = Some(fill);
        self
    }

    #[inline]
    pub fn coords(&self) -> (u32, u32, u32, u32) {
        (self.x0, self.y0, self.x1, self.y1)
    }

    pub fn width(&self) -> u32 {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> u32 {
        self.y1.saturating_sub(self.y0)
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn is_valid(&self) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.is_valid() && self.x1 as usize <= width && self.y1 as usize <= height
    }

    /// `other` lies inside `self` (shared boundaries allowed).
    pub fn contains(&self, other: &WallRect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn intersection_area(&self, other: &WallRect) -> u64 {
        let w = self.x1.min(other.x1).saturating_sub(self.x0.max(other.x0)) as u64;
        let h = self.y1.min(other.y1).saturating_sub(self.y0.max(other.y0)) as u64;
        w * h
    }
}

impl PartialEq for WallRect {
    fn eq(&self, other: &Self) -> bool {
        self.coords() == other.coords()
    }
}

impl Eq for WallRect {}

impl Hash for WallRect {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords().hash(state);
    }
}

impl PartialOrd for WallRect {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WallRect {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coords().cmp(&other.coords())
    }
}

/// Cumulative ink counts: `get(i, j)` is the ink inside `[0, i) x [0, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummedAreaTable {
    width: usize,
    height: usize,
    table: Vec<u32>,
}

impl SummedAreaTable {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.table[j * (self.width + 1) + i]
    }

    #[inline]
    fn count(&self, r: &WallRect) -> u64 {
        let (x0, y0, x1, y1) = (r.x0 as usize, r.y0 as usize, r.x1 as usize, r.y1 as usize);
        (self.get(x1, y1) + self.get(x0, y0)) as u64 - self.get(x0, y1) as u64 - self.get(x1, y0) as u64
    }

    #[inline]
    fn is_ink(&self, x: usize, y: usize) -> bool {
        self.count(&WallRect::new(x as u32, y as u32, x as u32 + 1, y as u32 + 1)) == 1
    }
}

pub fn build_sat(binary: &BinaryImage) -> SummedAreaTable {
    let (w, h) = (binary.width(), binary.height());
    let stride = w + 1;
    let mut table = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += binary.get(x, y) as u32;
            table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
        }
    }
    SummedAreaTable { width: w, height: h, table }
}

/// Ink pixels inside `r`, by four-entry inclusion-exclusion.
pub fn rect_ink(sat: &SummedAreaTable, r: &WallRect) -> Result<u64, FitError> {
    if !r.fits_in(sat.width, sat.height) {
        return Err(FitError::OutOfBounds {
            x0: r.x0,
            y0: r.y0,
            x1: r.x1,
            y1: r.y1,
            width: sat.width,
            height: sat.height,
        });
    }
    Ok(sat.count(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Minimum ink fraction inside a candidate.
    pub min_fill: f64,
    /// Minimum fraction of a candidate's ink not yet covered by accepted walls.
    pub min_gain: f64,
    pub min_thickness: f64,
    pub max_thickness: f64,
    pub min_length: f64,
}

impl Default for FitParams {
    /// Values for a 1024 px wide image; see [`FitParams::scaled`].
    fn default() -> Self {
        Self { min_fill: 0.85, min_gain: 0.30, min_thickness: 3.0, max_thickness: 40.0, min_length: 12.0 }
    }
}

impl FitParams {
    /// Defaults with pixel sizes scaled to an image `width` pixels wide.
    pub fn scaled(width: usize) -> Self {
        let k = width as f64 / 1024.0;
        let d = Self::default();
        Self {
            min_thickness: d.min_thickness * k,
            max_thickness: d.max_thickness * k,
            min_length: d.min_length * k,
            ..d
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.min_fill > 0.0 && self.min_fill <= 1.0) {
            return Err(FitError::InvalidParams("min_fill must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.min_gain) {
            return Err(FitError::InvalidParams("min_gain must be in [0, 1]"));
        }
        if !(self.min_thickness > 0.0 && self.min_thickness <= self.max_thickness) {
            return Err(FitError::InvalidParams("thickness range must satisfy 0 < min <= max"));
        }
        if self.min_length.is_nan() || self.min_length < 0.0 {
            return Err(FitError::InvalidParams("min_length must be non-negative"));
        }
        Ok(())
    }

    fn accepts(&self, w: u32, h: u32) -> bool {
        let (short, long) = (w.min(h) as f64, w.max(h) as f64);
        short >= self.min_thickness && short <= self.max_thickness && long >= self.min_length
    }
}

fn rounded_lines(lines: &[f64], bound: usize) -> Vec<u32> {
    let mut out: Vec<u32> = lines
        .iter()
        .filter(|v| v.is_finite())
        .map(|&v| v.round().clamp(0.0, bound as f64) as u32)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Gaps between every pair of lines, as `(start, end)` with `end - start` ascending.
fn pairs_by_length(lines: &[u32]) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> =
        lines.iter().enumerate().flat_map(|(i, &a)| lines[i + 1..].iter().map(move |&b| (a, b))).collect();
    pairs.sort_by_key(|&(a, b)| (b - a, a));
    pairs
}

/// All grid rectangles with wall-like proportions, sorted by coordinates.
///
/// Grid coordinates are rounded to whole pixels and clipped to `bounds`
/// before pairing. Fails with [`FitError::TooDense`] rather than building
/// more than [`CANDIDATE_CAP`] rectangles.
pub fn enumerate_candidates(
    grid: &AxisGrid,
    params: &FitParams,
    bounds: (usize, usize),
) -> Result<Vec<WallRect>, FitError> {
    params.validate()?;
    let xs = rounded_lines(&grid.xs, bounds.0);
    let ys = rounded_lines(&grid.ys, bounds.1);
    let xpairs = pairs_by_length(&xs);
    let ypairs = pairs_by_length(&ys);
    if xpairs.is_empty() || ypairs.is_empty() {
        return Ok(Vec::new());
    }

    // For each x-pair, the matching y-pairs form at most two contiguous runs
    // of the length-sorted list; count them before allocating anything.
    let ylen: Vec<u32> = ypairs.iter().map(|&(a, b)| b - a).collect();
    let first_at_least = |v: f64| ylen.partition_point(|&l| (l as f64) < v);
    let first_above = |v: f64| ylen.partition_point(|&l| (l as f64) <= v);
    let runs = |w: u32| -> [(usize, usize); 2] {
        let wf = w as f64;
        // Rectangles whose short side is the width.
        let tall = if wf >= params.min_thickness && wf <= params.max_thickness {
            (first_at_least(wf.max(params.min_length)), ylen.len())
        } else {
            (0, 0)
        };
        // Rectangles whose short side is the height (strictly shorter than w).
        let wide = if wf >= params.min_length {
            let lo = first_at_least(params.min_thickness);
            let hi = first_above(params.max_thickness).min(ylen.partition_point(|&l| l < w));
            (lo, hi.max(lo))
        } else {
            (0, 0)
        };
        [tall, wide]
    };

    let count: u64 = xpairs
        .iter()
        .map(|&(a, b)| runs(b - a).iter().map(|&(lo, hi)| (hi - lo) as u64).sum::<u64>())
        .sum();
    if count > CANDIDATE_CAP {
        return Err(FitError::TooDense { xs: xs.len(), ys: ys.len(), count, cap: CANDIDATE_CAP });
    }

    let mut out = Vec::with_capacity(count as usize);
    for &(x0, x1) in &xpairs {
        for (lo, hi) in runs(x1 - x0) {
            out.extend(ypairs[lo..hi].iter().map(|&(y0, y1)| WallRect::new(x0, y0, x1, y1)));
        }
    }
    debug_assert!(out.iter().all(|r| params.accepts(r.width(), r.height())));
    out.sort_unstable();
    Ok(out)
}

/// 2-D Fenwick tree over pixel counts.
struct Fenwick2d {
    width: usize,
    height: usize,
    tree: Vec<u32>,
}

impl Fenwick2d {
    fn new(width: usize, height: usize) -> Self {
        Self { width, height, tree: vec![0; (width + 1) * (height + 1)] }
    }

    fn add(&mut self, x: usize, y: usize) {
        let mut j = y + 1;
        while j <= self.height {
            let mut i = x + 1;
            while i <= self.width {
                self.tree[j * (self.width + 1) + i] += 1;
                i += i & i.wrapping_neg();
            }
            j += j & j.wrapping_neg();
        }
    }

    /// Sum over `[0, x) x [0, y)`.
    fn prefix(&self, x: usize, y: usize) -> u64 {
        let mut total = 0u64;
        let mut j = y;
        while j > 0 {
            let mut i = x;
            while i > 0 {
                total += self.tree[j * (self.width + 1) + i] as u64;
                i -= i & i.wrapping_neg();
            }
            j -= j & j.wrapping_neg();
        }
        total
    }

    fn rect(&self, r: &WallRect) -> u64 {
        let (x0, y0, x1, y1) = (r.x0 as usize, r.y0 as usize, r.x1 as usize, r.y1 as usize);
        self.prefix(x1, y1) + self.prefix(x0, y0) - self.prefix(x0, y1) - self.prefix(x1, y0)
    }
}

/// Greedy wall selection.
///
/// Candidates below `min_fill` are dropped; the rest are visited by fill
/// (descending), area (descending), then coordinates. A candidate is accepted
/// when at least `min_gain` of its ink is not yet covered by earlier walls.
/// Candidates outside the table's image are ignored.
pub fn select_walls(candidates: &[WallRect], sat: &SummedAreaTable, params: &FitParams) -> Vec<WallRect> {
    let mut unique: Vec<WallRect> =
        candidates.iter().filter(|r| r.fits_in(sat.width, sat.height)).map(|r| WallRect { fill: None, ..*r }).collect();
    unique.sort_unstable();
    unique.dedup();

    let mut scored: Vec<(WallRect, u64)> = unique
        .par_iter()
        .filter_map(|r| {
            let ink = sat.count(r);
            let fill = ink as f64 / r.area() as f64;
            (ink > 0 && fill >= params.min_fill).then_some((r.with_fill(fill), ink))
        })
        .collect();
    scored.sort_by(|(a, _), (b, _)| {
        let (fa, fb) = (a.fill.unwrap_or(0.0), b.fill.unwrap_or(0.0));
        fb.total_cmp(&fa).then(b.area().cmp(&a.area())).then(a.cmp(b))
    });

    let mut covered = vec![false; sat.width * sat.height];
    let mut covered_ink = Fenwick2d::new(sat.width, sat.height);
    let mut accepted = Vec::new();
    for (rect, ink) in scored {
        let fresh = ink - covered_ink.rect(&rect);
        if (fresh as f64 / ink as f64) < params.min_gain {
            continue;
        }
        for y in rect.y0 as usize..rect.y1 as usize {
            for x in rect.x0 as usize..rect.x1 as usize {
                let i = y * sat.width + x;
                if !covered[i] && sat.is_ink(x, y) {
                    covered[i] = true;
                    covered_ink.add(x, y);
                }
            }
        }
        accepted.push(rect);
    }
    accepted
}
