//! Cleanup of the selected walls: drop walls that sit inside another wall and
//! fuse pairs that together form one rectangle.

use serde::{Deserialize, Serialize};

use crate::wallfit::WallRect;

/// A set of wall rectangles on a canvas.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VectorPlan {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub walls: Vec<WallRect>,
}

impl VectorPlan {
    pub fn new(canvas_width: u32, canvas_height: u32, walls: Vec<WallRect>) -> Self {
        Self { canvas_width, canvas_height, walls }
    }

    pub fn is_within_canvas(&self) -> bool {
        self.walls.iter().all(|w| w.fits_in(self.canvas_width as usize, self.canvas_height as usize))
    }
}

/// Drops every wall lying inside another wall. Of several identical walls
/// only the first is kept; survivors keep their input order.
pub fn remove_contained(walls: &[WallRect]) -> Vec<WallRect> {
    walls
        .iter()
        .enumerate()
        .filter(|&(i, w)| {
            !walls.iter().enumerate().any(|(j, other)| j != i && other.contains(w) && (other != w || j < i))
        })
        .map(|(_, w)| *w)
        .collect()
}

/// The union of `a` and `b` when it is exactly a rectangle sharing a full
/// side extent: equal y-extent with touching or overlapping x-intervals, or
/// the transpose.
pub fn rect_union(a: &WallRect, b: &WallRect) -> Option<WallRect> {
    let same_rows = a.y0 == b.y0 && a.y1 == b.y1 && a.x0 <= b.x1 && b.x0 <= a.x1;
    let same_cols = a.x0 == b.x0 && a.x1 == b.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
    if !(same_rows || same_cols) {
        return None;
    }
    let mut merged = WallRect::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1));
    if let (Some(fa), Some(fb)) = (a.fill, b.fill) {
        if a.intersection_area(b) == 0 {
            let ink = fa * a.area() as f64 + fb * b.area() as f64;
            merged.fill = Some(ink / merged.area() as f64);
        }
    }
    Some(merged)
}

/// Merges mergeable pairs until none remain. Pairs are scanned in coordinate
/// order and the scan restarts after each merge; the result is sorted.
pub fn merge_rects(walls: &[WallRect]) -> Vec<WallRect> {
    let mut current = walls.to_vec();
    current.sort();
    'scan: loop {
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                if let Some(union) = rect_union(&current[i], &current[j]) {
                    current.remove(j);
                    current.remove(i);
                    let at = current.partition_point(|r| r < &union);
                    current.insert(at, union);
                    continue 'scan;
                }
            }
        }
        return current;
    }
}

/// Alternates containment removal and merging until the wall list is stable.
pub fn postprocess(plan: &VectorPlan) -> VectorPlan {
    let mut walls = plan.walls.clone();
    loop {
        let next = merge_rects(&remove_contained(&walls));
        if next == walls {
            break;
        }
        walls = next;
    }
    VectorPlan { walls, ..plan.clone() }
}
