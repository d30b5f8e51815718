//! The whole estimation pipeline is generic over the scalar; run it at
//! `f32` and check it agrees with the `f64` instantiation (which the crate
//! root aliases pin) to single-precision accuracy.

use tailcv::bounds::{bernstein_tail, cv_exponential_main_term};
use tailcv::learners::{build_angular_grid, erm, HammingCost};
use tailcv::masks::kfold_masks;
use tailcv::risk::{cv_risk, ThresholdPolicy};
use tailcv::sim::{sample, true_quantile, AngularLaw, GeneratorSpec, LabelModel};
use tailcv::{data::order_stat_threshold, Dataset64, GeneratorSpec64};

fn spec32() -> GeneratorSpec<f32> {
    GeneratorSpec::new(
        3,
        2.0f32,
        AngularLaw::UniformSphere,
        LabelModel::HalfspaceNoise {
            direction: vec![1.0, 0.0, 0.0],
            eps: 0.2,
        },
    )
    .unwrap()
}

fn spec64() -> GeneratorSpec64 {
    GeneratorSpec::new(
        3,
        2.0f64,
        AngularLaw::UniformSphere,
        LabelModel::HalfspaceNoise {
            direction: vec![1.0, 0.0, 0.0],
            eps: 0.2,
        },
    )
    .unwrap()
}

#[test]
fn f32_pipeline_tracks_f64() {
    // Draws are made in f64 and narrowed, so both instantiations consume
    // the same stream and see the same data up to rounding.
    let ds32 = sample(&spec32(), 40, 11).unwrap();
    let ds64: Dataset64 = sample(&spec64(), 40, 11).unwrap();
    for (a, b) in ds32.points().iter().zip(ds64.points()) {
        assert_eq!(a.y, b.y);
        for (xa, xb) in a.x.iter().zip(&b.x) {
            assert!((*xa as f64 - xb).abs() < 1e-3 * xb.abs().max(1.0));
        }
    }

    let class32 = build_angular_grid::<f32>(3, 4, &[0.0, 0.3], 7).unwrap();
    let class64 = build_angular_grid::<f64>(3, 4, &[0.0, 0.3], 7).unwrap();
    let masks = kfold_masks(40, 4, None).unwrap();

    let thr32 = order_stat_threshold(&ds32, 0.2f32).unwrap();
    let thr64 = order_stat_threshold(&ds64, 0.2f64).unwrap();
    assert_eq!(thr32.rank_k, thr64.rank_k);
    assert!((thr32.value as f64 - thr64.value).abs() < 1e-3 * thr64.value);

    let all: Vec<usize> = (0..40).collect();
    let fit32 = erm(&class32, &HammingCost, &ds32, &all, 0.2, &thr32).unwrap();
    let fit64 = erm(&class64, &HammingCost, &ds64, &all, 0.2, &thr64).unwrap();
    assert_eq!(fit32.classifier_id, fit64.classifier_id);
    assert!((fit32.risk as f64 - fit64.risk).abs() < 1e-4);

    let cv32 = cv_risk(
        &class32,
        &HammingCost,
        &ds32,
        &masks,
        0.2,
        &ThresholdPolicy::FullSampleOrderStat,
    )
    .unwrap();
    let cv64 = cv_risk(
        &class64,
        &HammingCost,
        &ds64,
        &masks,
        0.2,
        &ThresholdPolicy::FullSampleOrderStat,
    )
    .unwrap();
    assert!((cv32.estimate as f64 - cv64.estimate).abs() < 1e-4);

    let q32 = true_quantile(&spec32(), 0.01f32).unwrap();
    assert!((q32 - 10.0).abs() < 1e-4);

    let t32: f32 = bernstein_tail(100, 0.1f32, 1.0);
    let t64: f64 = bernstein_tail(100, 0.1f64, 1.0);
    assert!((t32 as f64 - t64).abs() < 1e-6);
    let e32: f32 = cv_exponential_main_term(90, 10, 0.1f32, 1.0, 4.0).unwrap();
    assert!((e32 as f64 - 47.0 / 9.0).abs() < 1e-5);
}
