//! Property tests for the crate's stated invariants.

mod support;

use proptest::prelude::*;

use dropsample::classifier::{ensemble_combine, EnsembleMode, FeatureVector, SoftmaxModel};
use dropsample::features::{
    build_feature_stack, directional_maps, signature_maps, FeatureConfig, Signature, SignatureTruncation,
    CONTENT_OFFSET, DIRECTIONS, GRID,
};
use dropsample::sampler::{classify_group, GroupThresholds, QuotaTable, SampleGroup, UpdateRule};
use dropsample::strokes::{
    generate_synthetic, load_dataset, normalize_sample, write_dataset, Dataset, DatasetFormat, Point, Stroke,
    StrokeSample,
};

fn arb_points(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), len)
}

fn sample_from(points: &[(f64, f64)]) -> StrokeSample {
    let pts = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
    StrokeSample::new(0, 0, vec![Stroke::new(pts)])
}

proptest! {
    #[test]
    fn normalization_is_idempotent(points in arb_points(2..12)) {
        prop_assume!(points.windows(2).any(|w| w[0] != w[1]));
        let s = sample_from(&points);
        if let Ok(once) = normalize_sample(&s) {
            let twice = normalize_sample(&once).unwrap();
            for (a, b) in once.points().zip(twice.points()) {
                prop_assert!((a.x - b.x).abs() < 1e-9);
                prop_assert!((a.y - b.y).abs() < 1e-9);
            }
            // All coordinates inside the closed normalized square.
            for p in once.points() {
                prop_assert!(p.x >= -1e-9 && p.x <= 48.0 + 1e-9);
                prop_assert!(p.y >= -1e-9 && p.y <= 48.0 + 1e-9);
            }
        }
    }

    #[test]
    fn synthetic_generation_is_reproducible(
        k in 2usize..6,
        per_class in 1usize..8,
        seed in 0u64..1000,
        mislabel in 0.0..0.9f64,
        jitter in 0.0..0.1f64,
    ) {
        let a = generate_synthetic(k, per_class, seed, mislabel, jitter).unwrap();
        let b = generate_synthetic(k, per_class, seed, mislabel, jitter).unwrap();
        prop_assert_eq!(&a, &b);
        let expected_flips = (mislabel * (k * per_class) as f64).floor() as usize;
        let flips = a.noise_mask.as_ref().unwrap().iter().filter(|&&m| m).count();
        prop_assert_eq!(flips, expected_flips);
    }

    #[test]
    fn jsonl_roundtrip_is_lossless(
        k in 2usize..5,
        per_class in 1usize..5,
        seed in 0u64..100,
        mislabel in 0.0..0.5f64,
    ) {
        let d = generate_synthetic(k, per_class, seed, mislabel, 0.05).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&d, f.path(), DatasetFormat::Jsonl).unwrap();
        let back = load_dataset(f.path(), DatasetFormat::Jsonl).unwrap();
        // Class count is inferred from labels on load; align it before
        // comparing the rest (flips can leave the top class unused).
        let back = back.with_class_count(d.k).unwrap();
        prop_assert_eq!(&d, &back);
    }

    #[test]
    fn csv_roundtrip_is_lossless_without_mask(
        k in 2usize..5,
        per_class in 1usize..5,
        seed in 0u64..100,
    ) {
        let mut d = generate_synthetic(k, per_class, seed, 0.0, 0.05).unwrap();
        d.noise_mask = None;
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&d, f.path(), DatasetFormat::Csv).unwrap();
        let back = load_dataset(f.path(), DatasetFormat::Csv).unwrap().with_class_count(d.k).unwrap();
        prop_assert_eq!(&d, &back);
    }

    #[test]
    fn classification_partitions_the_unit_interval(p in 0.0..=1.0f64, k in 2usize..50) {
        let th = GroupThresholds::for_classes(k);
        let g = classify_group(p, &th);
        let expected = if p > th.t2 {
            SampleGroup::WellRecognized
        } else if p < th.t1 {
            SampleGroup::Noisy
        } else {
            SampleGroup::Confusing
        };
        prop_assert_eq!(g, expected);
    }

    #[test]
    fn quotas_stay_bounded_under_any_update_sequence(
        m in 1usize..20,
        updates in prop::collection::vec((0usize..20, 0.0..=1.0f64, prop::bool::ANY), 0..200),
    ) {
        let th = GroupThresholds::for_classes(10);
        let ds1 = UpdateRule::ds1();
        let ds2 = UpdateRule::ds2(&th);
        let mut qt = QuotaTable::new(m, 5, 1e-6).unwrap();
        for (raw_index, p, use_ds2) in updates {
            qt.advance_iteration();
            let index = raw_index % m;
            let rule = if use_ds2 { &ds2 } else { &ds1 };
            qt.apply_update(index, p, rule, &th).unwrap();
        }
        for &q in qt.quotas() {
            prop_assert!((1e-6..=1.0).contains(&q), "quota {q} escaped [q_min, 1]");
        }
        // Index total matches a from-scratch sum.
        let direct: f64 = qt.quotas().iter().sum();
        prop_assert!((qt.equivalent_set_size() - direct).abs() <= 1e-9 * m as f64);
    }

    #[test]
    fn confusing_confidence_always_resets_to_one(
        q_start in 0.0..=1.0f64,
        p_unit in 0.0..=1.0f64,
    ) {
        let th = GroupThresholds::for_classes(10);
        let p = th.t1 + p_unit * (th.t2 - th.t1); // inside the closed confusing interval
        let q_start = q_start.clamp(1e-6, 1.0);
        let mut qt = QuotaTable::with_quotas(vec![q_start], 0, 1e-6).unwrap();
        qt.advance_iteration();
        let q = qt.apply_update(0, p, &UpdateRule::ds1(), &th).unwrap();
        prop_assert_eq!(q, 1.0);
    }

    #[test]
    fn indexed_draw_matches_linear_scan(
        quotas in prop::collection::vec(0.01..=1.0f64, 1..9),
        u_unit in 0.0..1.0f64,
    ) {
        let qt = QuotaTable::with_quotas(quotas.clone(), 0, 0.01).unwrap();
        let total: f64 = quotas.iter().sum();
        let u = u_unit * total;
        prop_assert_eq!(qt.select(u), support::linear_scan_select(&quotas, u));
    }

    #[test]
    fn chen_identity_on_random_three_segment_paths(
        points in arb_points(4..5),
    ) {
        // Scale into a modest box to keep level-3 magnitudes tame.
        let path: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x / 25.0, y / 25.0)).collect();
        let trunc = SignatureTruncation::new(3).unwrap();
        let mut sig = Signature::identity(trunc);
        for pair in path.windows(2) {
            let seg = Signature::segment(pair[1].0 - pair[0].0, pair[1].1 - pair[0].1, trunc);
            sig = sig.concatenate(&seg).unwrap();
        }
        let (l1, l2, l3) = support::integrate_signature(&path, 256);
        for i in 0..2 {
            prop_assert!((sig.level1[i] - l1[i]).abs() < 1e-8);
        }
        for i in 0..4 {
            prop_assert!((sig.level2[i] - l2[i]).abs() < 1e-8);
        }
        for i in 0..8 {
            prop_assert!((sig.level3[i] - l3[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn collinear_paths_have_no_signed_area(
        dir in 0.0..std::f64::consts::TAU,
        steps in prop::collection::vec(0.01..2.0f64, 1..6),
    ) {
        let trunc = SignatureTruncation::new(2).unwrap();
        let mut sig = Signature::identity(trunc);
        for step in steps {
            let seg = Signature::segment(step * dir.cos(), step * dir.sin(), trunc);
            sig = sig.concatenate(&seg).unwrap();
        }
        let antisym = (sig.level2[1] - sig.level2[2]) / 2.0;
        prop_assert!(antisym.abs() < 1e-9, "area {antisym}");
    }

    #[test]
    fn predictions_are_distributions(
        seed in 0u64..500,
        k in 2usize..6,
        n in 1usize..8,
        x in prop::collection::vec(-3.0..3.0f64, 8),
    ) {
        let model = SoftmaxModel::with_hidden(k, n, 5, seed);
        let fv = FeatureVector::from_dense(&x[..n]).unwrap();
        let p = model.predict(&fv).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn ensemble_average_ignores_common_scaling(
        probs in prop::collection::vec(prop::collection::vec(0.01..1.0f64, 4), 1..5),
        scale in 0.1..10.0f64,
    ) {
        let normalized: Vec<Vec<f64>> = probs
            .iter()
            .map(|p| {
                let s: f64 = p.iter().sum();
                p.iter().map(|v| v / s).collect()
            })
            .collect();
        let base = ensemble_combine(&normalized, EnsembleMode::Average).unwrap();
        let scaled: Vec<Vec<f64>> = normalized.iter().map(|p| p.iter().map(|v| v * scale).collect()).collect();
        let same = ensemble_combine(&scaled, EnsembleMode::Average).unwrap();
        prop_assert_eq!(base, same);
    }
}

#[test]
fn signature_map_values_ignore_raw_translation() {
    let base = sample_from(&[(3.0, 1.0), (40.0, 20.0), (25.0, 60.0), (70.0, 55.0)]);
    let shifted = {
        let pts = base.strokes[0].points.iter().map(|p| Point::new(p.x + 1234.5, p.y - 678.9)).collect();
        StrokeSample::new(0, 0, vec![Stroke::new(pts)])
    };
    let trunc = SignatureTruncation::new(2).unwrap();
    let a = signature_maps(&normalize_sample(&base).unwrap(), trunc, 4).unwrap();
    let b = signature_maps(&normalize_sample(&shifted).unwrap(), trunc, 4).unwrap();
    assert_eq!(a.channels(), b.channels());
    for c in 0..a.channels() {
        for (va, vb) in a.channel(c).iter().zip(b.channel(c)) {
            assert!((va - vb).abs() < 1e-4, "channel {c}: {va} vs {vb}");
        }
    }
}

#[test]
fn directional_masses_are_cyclically_equivariant_under_45_degree_rotation() {
    // Rotating the input by 45° shifts each direction's mass into the
    // next channel, up to rasterization tolerance.
    let pts = [(10.0, 10.0), (30.0, 14.0), (26.0, 38.0), (44.0, 44.0)];
    let base = normalize_sample(&sample_from(&pts)).unwrap();
    let rotated_raw: Vec<(f64, f64)> = {
        let angle = std::f64::consts::FRAC_PI_4;
        pts.iter()
            .map(|&(x, y)| (x * angle.cos() - y * angle.sin(), x * angle.sin() + y * angle.cos()))
            .collect()
    };
    let rotated = normalize_sample(&sample_from(&rotated_raw)).unwrap();

    let a = directional_maps(&base).unwrap();
    let b = directional_maps(&rotated).unwrap();
    // Normalization rescales lengths; compare mass fractions per channel.
    let totals = |t: &dropsample::features::FeatureTensor| {
        let sum: f64 = (0..DIRECTIONS).map(|c| t.channel_mass(c)).sum();
        let fracs: Vec<f64> = (0..DIRECTIONS).map(|c| t.channel_mass(c) / sum).collect();
        fracs
    };
    let fa = totals(&a);
    let fb = totals(&b);
    for d in 0..DIRECTIONS {
        let rotated_channel = (d + 1) % DIRECTIONS;
        assert!(
            (fa[d] - fb[rotated_channel]).abs() < 0.02,
            "channel {d}: {} vs rotated {}",
            fa[d],
            fb[rotated_channel]
        );
    }
}

#[test]
fn all_feature_stacks_are_finite_with_unit_bitmap_range() {
    let d = generate_synthetic(4, 6, 3, 0.0, 0.06).unwrap();
    let cfg = FeatureConfig::fusion();
    for s in &d.samples {
        let t = build_feature_stack(&normalize_sample(s).unwrap(), &cfg).unwrap();
        assert!(t.is_finite());
        for &v in t.channel(0) {
            assert!((0.0..=1.0).contains(&v));
        }
        for &v in t.channel(1) {
            assert!((0.0..=1.0).contains(&v));
        }
        // Content stays inside the centered 48×48 region.
        for c in 0..t.channels() {
            for (i, &v) in t.channel(c).iter().enumerate() {
                if v != 0.0 {
                    let (y, x) = (i / GRID, i % GRID);
                    let lo = CONTENT_OFFSET;
                    let hi = CONTENT_OFFSET + 48;
                    assert!((lo..hi).contains(&y) && (lo..hi).contains(&x));
                }
            }
        }
    }
}

#[test]
fn dataset_validation_enforces_mask_length() {
    let d = generate_synthetic(2, 2, 0, 0.0, 0.0).unwrap();
    let broken = Dataset { noise_mask: Some(vec![false]), ..d };
    assert!(broken.validate().is_err());
}
