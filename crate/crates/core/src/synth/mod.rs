//! Synthetic ground-truth floor plans, their rasterization, corruption, and
//! scoring of vectorizer output against them.

mod matching;
mod rng;

pub use matching::{match_walls, rect_iou, MatchReport, MatchedPair};
pub use rng::SplitMix64;

use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::raster::{BinaryImage, RasterImage};
use crate::wallfit::WallRect;

/// Parameters for [`generate_plan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub canvas_width: u32,
    pub canvas_height: u32,
    /// Wall thickness in pixels.
    pub thickness: u32,
    /// Width of the opening left in every interior wall.
    pub door_width: u32,
    /// Inclusive range for the number of interior partitions.
    pub min_partitions: u32,
    pub max_partitions: u32,
    /// Minimum room side.
    pub min_room: u32,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            canvas_width: 512,
            canvas_height: 512,
            thickness: 8,
            door_width: 24,
            min_partitions: 3,
            max_partitions: 5,
            min_room: 96,
        }
    }
}

impl PlanConfig {
    /// Shortest wall piece on either side of a door.
    pub fn min_segment(&self) -> u32 {
        5 * self.thickness
    }

    /// Required clearance between parallel lines of different walls.
    pub fn line_margin(&self) -> u32 {
        2 * self.thickness
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let t = self.thickness;
        if t == 0 {
            return Err(SynthError::InfeasibleConfig("wall thickness must be positive".into()));
        }
        if self.door_width == 0 {
            return Err(SynthError::InfeasibleConfig("door width must be positive".into()));
        }
        if self.min_partitions > self.max_partitions {
            return Err(SynthError::InfeasibleConfig("partition range is empty".into()));
        }
        let inner = self.min_room.max(1);
        if self.canvas_width < 2 * t + inner || self.canvas_height < 2 * t + inner {
            return Err(SynthError::InfeasibleConfig(format!(
                "canvas {}x{} cannot hold walls of thickness {t} around a {inner} px room",
                self.canvas_width, self.canvas_height
            )));
        }
        Ok(())
    }
}

/// A generated plan with its reproducibility seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthPlan {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub walls: Vec<WallRect>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Room {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

/// Axis of the lines a partition wall adds: a vertical wall adds x-lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Vertical,
    Horizontal,
}

struct Layout {
    cfg: PlanConfig,
    walls: Vec<WallRect>,
    rooms: Vec<Room>,
    x_lines: Vec<u32>,
    y_lines: Vec<u32>,
    openings: Vec<WallRect>,
}

impl Layout {
    fn new(cfg: PlanConfig) -> Self {
        let (w, h, t) = (cfg.canvas_width, cfg.canvas_height, cfg.thickness);
        let walls = vec![
            WallRect::new(0, 0, w, t),
            WallRect::new(0, h - t, w, h),
            WallRect::new(0, t, t, h - t),
            WallRect::new(w - t, t, w, h - t),
        ];
        Self {
            cfg,
            walls,
            rooms: vec![Room { x0: t, y0: t, x1: w - t, y1: h - t }],
            x_lines: vec![0, t, w - t, w],
            y_lines: vec![0, t, h - t, h],
            openings: Vec::new(),
        }
    }

    fn clear_of(lines: &[u32], candidates: &[u32], margin: u32) -> bool {
        candidates.iter().all(|&c| lines.iter().all(|&l| c.abs_diff(l) >= margin))
    }

    /// Tries to split one room with a wall; returns whether it succeeded.
    fn try_partition(&mut self, rng: &mut SplitMix64) -> bool {
        let cfg = self.cfg;
        let (t, door, seg, margin) = (cfg.thickness, cfg.door_width, cfg.min_segment(), cfg.line_margin());
        let room_idx = rng.below(self.rooms.len() as u64) as usize;
        let room = self.rooms[room_idx];
        let (rw, rh) = (room.x1 - room.x0, room.y1 - room.y0);
        let prefer_vertical = rw >= rh;
        let axis = if (rng.next_f64() < 0.75) == prefer_vertical { Axis::Vertical } else { Axis::Horizontal };

        // (extent being split, start of it, span of the new wall, start of span)
        let (split_len, split_start, span_len, span_start) = match axis {
            Axis::Vertical => (rw, room.x0, rh, room.y0),
            Axis::Horizontal => (rh, room.y0, rw, room.x0),
        };
        if split_len < 2 * cfg.min_room + t || span_len < seg + door {
            return false;
        }
        let pos = split_start + cfg.min_room + rng.below((split_len - 2 * cfg.min_room - t + 1) as u64) as u32;

        // Door placement along the span: interior gap, or an opening at one end.
        let interior_ok = span_len >= 2 * seg + door;
        let gap_start = if interior_ok && rng.next_f64() < 0.8 {
            span_start + seg + rng.below((span_len - 2 * seg - door + 1) as u64) as u32
        } else if rng.next_f64() < 0.5 {
            span_start
        } else {
            span_start + span_len - door
        };
        let gap_end = gap_start + door;
        let span_end = span_start + span_len;

        let (own, cross) = match axis {
            Axis::Vertical => (&self.x_lines, &self.y_lines),
            Axis::Horizontal => (&self.y_lines, &self.x_lines),
        };
        if !Self::clear_of(own, &[pos, pos + t], t + margin) {
            return false;
        }
        let new_cross: Vec<u32> = [gap_start, gap_end].into_iter().filter(|&g| g != span_start && g != span_end).collect();
        if !Self::clear_of(cross, &new_cross, margin) {
            return false;
        }

        let rect = |a0: u32, a1: u32| match axis {
            Axis::Vertical => WallRect::new(pos, a0, pos + t, a1),
            Axis::Horizontal => WallRect::new(a0, pos, a1, pos + t),
        };
        // Closed wall ends must butt against solid wall, not an opening.
        let end_caps = [(span_start, gap_start > span_start), (span_end, gap_end < span_end)];
        for (at, closed) in end_caps {
            if !closed {
                continue;
            }
            let cap = match axis {
                Axis::Vertical => WallRect::new(pos.saturating_sub(t), at.saturating_sub(t), pos + 2 * t, at + t),
                Axis::Horizontal => WallRect::new(at.saturating_sub(t), pos.saturating_sub(t), at + t, pos + 2 * t),
            };
            if self.openings.iter().any(|o| o.intersection_area(&cap) > 0) {
                return false;
            }
        }

        if gap_start > span_start {
            self.walls.push(rect(span_start, gap_start));
        }
        if gap_end < span_end {
            self.walls.push(rect(gap_end, span_end));
        }
        self.openings.push(rect(gap_start, gap_end));
        let (first, second) = match axis {
            Axis::Vertical => (Room { x1: pos, ..room }, Room { x0: pos + t, ..room }),
            Axis::Horizontal => (Room { y1: pos, ..room }, Room { y0: pos + t, ..room }),
        };
        self.rooms[room_idx] = first;
        self.rooms.push(second);
        let (own, cross) = match axis {
            Axis::Vertical => (&mut self.x_lines, &mut self.y_lines),
            Axis::Horizontal => (&mut self.y_lines, &mut self.x_lines),
        };
        own.extend([pos, pos + t]);
        cross.extend(new_cross);
        true
    }
}

/// Generates a rectangular frame of four walls plus recursive partitions,
/// each interior wall broken by one door opening.
///
/// Parallel lines of different walls keep at least
/// [`PlanConfig::line_margin`] pixels apart and wall ends never open onto a
/// door. When a requested partition cannot be placed after a bounded number
/// of attempts, generation stops early, so plans may hold fewer partitions
/// than drawn.
pub fn generate_plan(seed: u64, cfg: &PlanConfig) -> Result<GroundTruthPlan, SynthError> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(seed);
    let wanted = rng.range_inclusive(cfg.min_partitions as u64, cfg.max_partitions as u64);
    let mut layout = Layout::new(*cfg);
    'partitions: for _ in 0..wanted {
        for _ in 0..64 {
            if layout.try_partition(&mut rng) {
                continue 'partitions;
            }
        }
        break;
    }
    Ok(GroundTruthPlan {
        canvas_width: cfg.canvas_width,
        canvas_height: cfg.canvas_height,
        walls: layout.walls,
        seed,
    })
}

/// Ink wherever a wall covers the pixel.
pub fn rasterize(plan: &GroundTruthPlan) -> BinaryImage {
    let (w, h) = (plan.canvas_width as usize, plan.canvas_height as usize);
    let mut img = BinaryImage::blank(w.max(1), h.max(1)).expect("non-empty canvas");
    for r in &plan.walls {
        for y in r.y0 as usize..(r.y1 as usize).min(h) {
            for x in r.x0 as usize..(r.x1 as usize).min(w) {
                img.set(x, y, true);
            }
        }
    }
    img
}

/// Corruption applied by [`add_noise`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Probability that a background pixel becomes a gray speckle.
    pub speckle_rate: f64,
    /// Maximum inward/outward displacement of wall faces, in pixels.
    pub edge_jitter: u32,
    /// Intensity of the (non-speckled) background.
    pub gray_level: u8,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { speckle_rate: 0.0005, edge_jitter: 1, gray_level: 245 }
    }
}

impl NoiseConfig {
    pub const CLEAN: NoiseConfig = NoiseConfig { speckle_rate: 0.0, edge_jitter: 0, gray_level: 255 };

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(0.0..=1.0).contains(&self.speckle_rate) {
            return Err(SynthError::InvalidNoise(format!("speckle rate {} outside [0, 1]", self.speckle_rate)));
        }
        Ok(())
    }
}

/// Speckle intensities are drawn uniformly from this band around mid-gray;
/// the darker half survives the default threshold as isolated ink.
pub const SPECKLE_RANGE: (u8, u8) = (96, 160);

/// Displaces wall faces: every maximal straight stretch of boundary (a face
/// between two junctions or corners) moves outward or inward as a unit by an
/// offset drawn from `[-jitter, jitter]`, so collinear pieces of a wall end up
/// slightly out of line.
fn jitter_edges(img: &BinaryImage, jitter: u32, rng: &mut SplitMix64) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let j = jitter as i64;

    // Vertical faces between columns k-1 and k, walked down each column
    // boundary; then horizontal faces, walked along each row boundary.
    for vertical in [true, false] {
        let (across, along) = if vertical { (w, h) } else { (h, w) };
        let ink = |k: usize, a: usize| if vertical { img.get(k, a) } else { img.get(a, k) };
        for k in 1..across {
            let mut a = 0;
            while a < along {
                let side = |a: usize| (ink(k - 1, a), ink(k, a));
                let (left, right) = side(a);
                if left == right {
                    a += 1;
                    continue;
                }
                let offset = rng.range_inclusive(0, 2 * j as u64) as i64 - j;
                let end = (a..along).take_while(|&b| side(b) == (left, right)).last().unwrap_or(a) + 1;
                // Positive offsets grow the ink into the background side.
                let ink_on_low = left;
                for b in a..end {
                    for step in 0..offset.unsigned_abs() as usize {
                        let pos = if (offset > 0) == ink_on_low {
                            k + step
                        } else {
                            (k - 1).checked_sub(step).unwrap_or(usize::MAX)
                        };
                        if pos >= across {
                            continue;
                        }
                        let value = offset > 0;
                        if vertical {
                            out.set(pos, b, value);
                        } else {
                            out.set(b, pos, value);
                        }
                    }
                }
                a = end;
            }
        }
    }
    out
}

/// Renders a binary plan as a noisy gray raster: optional face jitter, a
/// lifted background level, and random gray speckles on the background.
pub fn add_noise(img: &BinaryImage, seed: u64, cfg: &NoiseConfig) -> Result<RasterImage, SynthError> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(seed ^ 0x6E6F_6973_6521_0001);
    let shaped = if cfg.edge_jitter > 0 { jitter_edges(img, cfg.edge_jitter, &mut rng) } else { img.clone() };
    let data = shaped
        .data()
        .iter()
        .map(|&ink| {
            if ink {
                0
            } else if cfg.speckle_rate > 0.0 && rng.next_f64() < cfg.speckle_rate {
                rng.range_inclusive(SPECKLE_RANGE.0 as u64, SPECKLE_RANGE.1 as u64) as u8
            } else {
                cfg.gray_level
            }
        })
        .collect();
    Ok(RasterImage::new(img.width(), img.height(), 1, data).expect("same dimensions as the input"))
}
