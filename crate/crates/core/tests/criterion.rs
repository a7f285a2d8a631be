mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use whkit::consistency::{analyze_partial, induce_partial, CONSISTENCY_RTOL};
use whkit::criterion::{
    ct_masks, threshold_fast, threshold_naive, wormhole_masks, MetricScale, ThresholdAlgo,
};
use whkit::geodesics::{distance_matrix, multi_source, DistanceToBoundary};

use common::{floyd_warshall, grid, random_partial};

#[test]
fn dijkstra_matches_floyd_warshall_on_grid() {
    let g = grid(10, 10);
    let d = distance_matrix(&g).unwrap();
    let fw = floyd_warshall(&g);
    assert!((d.as_matrix() - &fw).amax() < 1e-12);
}

#[test]
fn boundary_distance_agrees_with_multi_source() {
    let full = grid(12, 12);
    let sel = random_partial(&full, 12, 12, 3);
    let (g, b) = induce_partial(&full, &sel).unwrap();
    let d = distance_matrix(&g).unwrap();
    let from_d = DistanceToBoundary::from_matrix(&d, &b);
    let direct = multi_source(&g, &b);
    for (x, y) in from_d.as_slice().iter().zip(direct.as_slice()) {
        assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }
}

#[test]
fn distances_do_not_depend_on_worker_count() {
    let g = grid(15, 15);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let d = distance_matrix(&g).unwrap();
                let b = whkit::geometry::BoundarySet::new((0..15).collect(), g.n_vertices()).unwrap();
                let k = threshold_naive(&d, &b, g.coords(), MetricScale::euclidean(), 7).unwrap();
                (d, k)
            })
    };
    let (d1, k1) = run(1);
    let (d4, k4) = run(4);
    assert_eq!(d1, d4);
    assert_eq!(k1, k4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn naive_and_fast_agree(seed in 0u64..1000, rows in 6usize..12, cols in 6usize..12) {
        let full = grid(rows, cols);
        let sel = random_partial(&full, rows, cols, seed);
        let (g, b) = induce_partial(&full, &sel).unwrap();
        let d = distance_matrix(&g).unwrap();
        let scale = MetricScale::euclidean();
        let k = threshold_naive(&d, &b, g.coords(), scale, 1 + seed as usize % 50).unwrap();
        let kt = threshold_fast(&g, &b, scale).unwrap();
        for j in 0..d.n() {
            for i in 0..d.n() {
                let want = k[(i, j)].min(d.get(i, j));
                prop_assert!((kt[(i, j)] - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
        let naive = wormhole_masks(&g, &d, &b, scale, ThresholdAlgo::Naive { batch: 64 }).unwrap();
        let fast = wormhole_masks(&g, &d, &b, scale, ThresholdAlgo::Fast).unwrap();
        prop_assert_eq!(naive.binary, fast.binary);
    }

    #[test]
    fn guaranteed_pairs_are_consistent(seed in 0u64..1000) {
        let full = grid(10, 10);
        let d_full = distance_matrix(&full).unwrap();
        let sel = random_partial(&full, 10, 10, seed);
        // analyze_partial fails on any guaranteed-but-inconsistent pair
        let a = analyze_partial(&full, &d_full, &sel, MetricScale::euclidean(), ThresholdAlgo::Fast, CONSISTENCY_RTOL).unwrap();
        prop_assert!(a.report.n_cw >= a.report.n_ct);
        prop_assert!(a.report.n_cw <= a.report.n_consistent);
    }

    #[test]
    fn masks_grow_with_metric_floor(seed in 0u64..1000, lo in 0.0f64..2.0, gap in 0.0f64..2.0) {
        let full = grid(8, 8);
        let sel = random_partial(&full, 8, 8, seed);
        let (g, b) = induce_partial(&full, &sel).unwrap();
        let d = distance_matrix(&g).unwrap();
        let small = wormhole_masks(&g, &d, &b, MetricScale::new(lo).unwrap(), ThresholdAlgo::Fast).unwrap();
        let large = wormhole_masks(&g, &d, &b, MetricScale::new(lo + gap).unwrap(), ThresholdAlgo::Fast).unwrap();
        prop_assert!(small.binary.iter().zip(large.binary.iter()).all(|(&s, &l)| !s || l));
        let ct = ct_masks(&d, &b).unwrap();
        prop_assert!(ct.binary.iter().zip(small.binary.iter()).all(|(&t, &w)| !t || w));
    }

    #[test]
    fn soft_mask_is_one_exactly_on_binary_mask(seed in 0u64..1000) {
        let full = grid(8, 8);
        let sel = random_partial(&full, 8, 8, seed);
        let (g, b) = induce_partial(&full, &sel).unwrap();
        let d = distance_matrix(&g).unwrap();
        let m = wormhole_masks(&g, &d, &b, MetricScale::euclidean(), ThresholdAlgo::Fast).unwrap();
        for (s, &bin) in m.soft.iter().zip(m.binary.iter()) {
            prop_assert!((0.0..=1.0).contains(s));
            prop_assert_eq!(*s == 1.0, bin);
        }
    }
}

#[test]
fn zero_metric_floor_is_the_boundary_criterion() {
    for seed in 0..5 {
        let full = grid(10, 10);
        let sel = random_partial(&full, 10, 10, seed);
        let (g, b) = induce_partial(&full, &sel).unwrap();
        let d = distance_matrix(&g).unwrap();
        let ct = ct_masks(&d, &b).unwrap();
        let zero = MetricScale::new(0.0).unwrap();
        let naive = wormhole_masks(&g, &d, &b, zero, ThresholdAlgo::Naive { batch: 1000 }).unwrap();
        assert_eq!(naive.threshold, ct.threshold);
        assert_eq!(naive.binary, ct.binary);
        let fast = wormhole_masks(&g, &d, &b, zero, ThresholdAlgo::Fast).unwrap();
        assert_eq!(fast.binary, ct.binary);
    }
}

#[test]
fn closed_surface_has_no_wormholes() {
    let g = grid(6, 6);
    let d = distance_matrix(&g).unwrap();
    let empty = whkit::geometry::BoundarySet::empty();
    let m = wormhole_masks(&g, &d, &empty, MetricScale::euclidean(), ThresholdAlgo::Fast).unwrap();
    assert!(m.binary.iter().all(|&x| x));
    assert_eq!(m.threshold, d.as_matrix().clone());
    let naive = threshold_naive(&d, &empty, g.coords(), MetricScale::euclidean(), 10).unwrap();
    assert!(naive.iter().all(|x| x.is_infinite()));
    assert_eq!(m.soft, DMatrix::from_element(36, 36, 1.0));
}
