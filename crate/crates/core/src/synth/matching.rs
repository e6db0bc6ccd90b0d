use serde::{Deserialize, Serialize};

use crate::wallfit::WallRect;

/// Intersection over union of two rectangles; 0 when either is empty.
pub fn rect_iou(a: &WallRect, b: &WallRect) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred_index: usize,
    pub truth_index: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matches: Vec<MatchedPair>,
    pub path_count_pred: usize,
    pub path_count_truth: usize,
    /// Filled in by callers that time the vectorization; 0 otherwise.
    pub elapsed_seconds: f64,
}

/// One-to-one greedy matching of predicted to true walls.
///
/// Pairs with IoU at or above `threshold` are taken in order of decreasing
/// IoU, ties by predicted then true index. An empty denominator counts as a
/// perfect score, so two empty plans score 1 everywhere.
pub fn match_walls(pred: &[WallRect], truth: &[WallRect], threshold: f64) -> MatchReport {
    let mut pairs: Vec<MatchedPair> = Vec::new();
    for (p, a) in pred.iter().enumerate() {
        for (t, b) in truth.iter().enumerate() {
            if a.intersection_area(b) == 0 {
                continue;
            }
            let iou = rect_iou(a, b);
            if iou >= threshold {
                pairs.push(MatchedPair { pred_index: p, truth_index: t, iou });
            }
        }
    }
    pairs.sort_by(|x, y| {
        y.iou.total_cmp(&x.iou).then(x.pred_index.cmp(&y.pred_index)).then(x.truth_index.cmp(&y.truth_index))
    });
    let mut pred_used = vec![false; pred.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut matches = Vec::new();
    for pair in pairs {
        if !pred_used[pair.pred_index] && !truth_used[pair.truth_index] {
            pred_used[pair.pred_index] = true;
            truth_used[pair.truth_index] = true;
            matches.push(pair);
        }
    }
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    let precision = ratio(matches.len(), pred.len());
    let recall = ratio(matches.len(), truth.len());
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    MatchReport {
        precision,
        recall,
        f1,
        matches,
        path_count_pred: pred.len(),
        path_count_truth: truth.len(),
        elapsed_seconds: 0.0,
    }
}
