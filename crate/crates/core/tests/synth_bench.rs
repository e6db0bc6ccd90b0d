use planvec_core::postprocess::{postprocess, VectorPlan};
use planvec_core::synth::{generate_plan, match_walls, rasterize, rect_iou, GroundTruthPlan, PlanConfig};
use planvec_core::wallfit::WallRect;
use proptest::prelude::*;

#[derive(serde::Deserialize)]
struct Golden {
    canvas_width: u32,
    canvas_height: u32,
    seed: u64,
    walls: Vec<[u32; 4]>,
}

#[test]
fn seed_one_matches_golden_plan() {
    let golden: Golden = serde_json::from_str(include_str!("data/plan_seed1.json")).unwrap();
    let cfg = PlanConfig { min_partitions: 3, max_partitions: 3, ..PlanConfig::default() };
    let plan = generate_plan(golden.seed, &cfg).unwrap();
    assert_eq!((plan.canvas_width, plan.canvas_height), (golden.canvas_width, golden.canvas_height));
    let walls: Vec<[u32; 4]> = plan.walls.iter().map(|r| [r.x0, r.y0, r.x1, r.y1]).collect();
    assert_eq!(walls, golden.walls);
}

#[test]
fn plans_are_fixed_points_of_postprocessing() {
    for seed in 0..100 {
        let plan = generate_plan(seed, &PlanConfig::default()).unwrap();
        let vp = VectorPlan::new(plan.canvas_width, plan.canvas_height, plan.walls.clone());
        let mut walls = plan.walls.clone();
        walls.sort();
        assert_eq!(postprocess(&vp).walls, walls, "seed {seed}");
    }
}

#[test]
fn iou_arithmetic() {
    assert_eq!(rect_iou(&WallRect::new(0, 0, 2, 2), &WallRect::new(1, 0, 3, 2)), 1.0 / 3.0);
}

#[test]
fn perfect_prediction_scores_one() {
    let plan = generate_plan(8, &PlanConfig::default()).unwrap();
    let rep = match_walls(&plan.walls, &plan.walls, 0.7);
    assert_eq!((rep.precision, rep.recall, rep.f1), (1.0, 1.0, 1.0));
    assert_eq!(rep.path_count_pred, plan.walls.len());
    assert!(rep.matches.iter().all(|m| m.pred_index == m.truth_index && m.iou == 1.0));
}

fn arb_rect() -> impl Strategy<Value = WallRect> {
    (0u32..40, 0u32..40, 1u32..20, 1u32..20).prop_map(|(x, y, w, h)| WallRect::new(x, y, x + w, y + h))
}

proptest! {
    #[test]
    fn rasterized_ink_is_the_union(walls in proptest::collection::vec(arb_rect(), 0..6)) {
        let plan = GroundTruthPlan { canvas_width: 64, canvas_height: 64, walls: walls.clone(), seed: 0 };
        let img = rasterize(&plan);
        for y in 0..64u32 {
            for x in 0..64u32 {
                let inside = walls.iter().any(|r| r.x0 <= x && x < r.x1 && r.y0 <= y && y < r.y1);
                prop_assert_eq!(img.get(x as usize, y as usize), inside);
            }
        }
    }

    #[test]
    fn matching_is_one_to_one_and_bounded(
        pred in proptest::collection::vec(arb_rect(), 0..8),
        truth in proptest::collection::vec(arb_rect(), 0..8),
        thr in 0.05f64..1.0,
    ) {
        let rep = match_walls(&pred, &truth, thr);
        let mut ps: Vec<usize> = rep.matches.iter().map(|m| m.pred_index).collect();
        let mut ts: Vec<usize> = rep.matches.iter().map(|m| m.truth_index).collect();
        ps.sort();
        ps.dedup();
        ts.sort();
        ts.dedup();
        prop_assert_eq!(ps.len(), rep.matches.len());
        prop_assert_eq!(ts.len(), rep.matches.len());
        prop_assert!(rep.matches.iter().all(|m| m.iou >= thr));
        for v in [rep.precision, rep.recall, rep.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        // Swapping roles swaps precision and recall when no IoU ties exist.
        let mut ious: Vec<u64> = rep.matches.iter().map(|m| m.iou.to_bits()).collect();
        let n = ious.len();
        ious.sort();
        ious.dedup();
        let all: Vec<f64> = pred.iter().flat_map(|p| truth.iter().map(move |t| rect_iou(p, t))).filter(|&v| v >= thr).collect();
        let mut distinct = all.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        distinct.sort();
        distinct.dedup();
        if ious.len() == n && distinct.len() == all.len() {
            let back = match_walls(&truth, &pred, thr);
            prop_assert_eq!((back.precision, back.recall), (rep.recall, rep.precision));
        }
    }
}
