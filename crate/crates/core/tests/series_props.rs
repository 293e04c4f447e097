mod common;

use common::{gauss_2f1, pfq, rel, BruteKdf};
use kdf_core::series::{
    classify_convergence, in_region, kdf_eval, kdf_eval_derivative, kdf_term,
};
use kdf_core::shape::validate_shape;
use kdf_core::{EvalPoint, KdFShape, KdfError, SeriesStatus, TruncationPolicy};
use proptest::prelude::*;

fn pt(x: f64, y: f64) -> EvalPoint {
    EvalPoint { x, y }
}

fn brute(shape: &KdFShape) -> BruteKdf {
    BruteKdf {
        upper_joint: shape.upper_joint.clone(),
        upper_x: shape.upper_x.clone(),
        upper_y: shape.upper_y.clone(),
        lower_joint: shape.lower_joint.clone(),
        lower_x: shape.lower_x.clone(),
        lower_y: shape.lower_y.clone(),
    }
}

fn upper() -> impl Strategy<Value = f64> {
    -2.5f64..2.5
}

fn lower() -> impl Strategy<Value = f64> {
    0.2f64..3.5
}

fn shape_strategy() -> impl Strategy<Value = KdFShape> {
    (
        prop::collection::vec(upper(), 0..3),
        prop::collection::vec(upper(), 0..3),
        prop::collection::vec(upper(), 0..3),
        prop::collection::vec(lower(), 0..3),
        prop::collection::vec(lower(), 0..3),
        prop::collection::vec(lower(), 0..3),
    )
        .prop_map(|(a, b, c, d, e, f)| KdFShape::new(a, b, c, d, e, f).unwrap())
}

proptest! {
    #[test]
    fn origin_is_exactly_one(shape in shape_strategy()) {
        let r = kdf_eval(&shape, pt(0.0, 0.0), &TruncationPolicy::default()).unwrap();
        prop_assert_eq!(r.value, 1.0);
    }

    #[test]
    fn converged_status_bounds_the_tail(shape in shape_strategy(), x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let policy = TruncationPolicy::default();
        if in_region(&classify_convergence(&shape), pt(x, y)) {
            let r = kdf_eval(&shape, pt(x, y), &policy).unwrap();
            if r.status == SeriesStatus::Converged {
                prop_assert!(r.tail_estimate <= policy.rel_tol * r.value.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn gauss_reduction(b in -2.0f64..2.0, c in -2.0f64..2.0, e in 0.3f64..3.0, x in -0.6f64..0.6) {
        let shape = KdFShape::new(vec![], vec![b, c], vec![], vec![e], vec![], vec![]).unwrap();
        let v = kdf_eval(&shape, pt(x, 0.0), &TruncationPolicy::default()).unwrap().value;
        let oracle = gauss_2f1(b, c, e, x);
        prop_assert!((v - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{} vs {}", v, oracle);
    }

    #[test]
    fn swapping_x_numerators_is_invisible(b in -2.0f64..2.0, c in -2.0f64..2.0, x in -0.5f64..0.5, y in -1.0f64..1.0) {
        let s1 = KdFShape::new(vec![0.4], vec![b, c], vec![0.9], vec![1.3, 1.9], vec![], vec![0.7]).unwrap();
        let s2 = KdFShape::new(vec![0.4], vec![c, b], vec![0.9], vec![1.9, 1.3], vec![], vec![0.7]).unwrap();
        let p = TruncationPolicy::default();
        let v1 = kdf_eval(&s1, pt(x, y), &p).unwrap().value;
        let v2 = kdf_eval(&s2, pt(x, y), &p).unwrap().value;
        prop_assert!((v1 - v2).abs() <= 4.0 * f64::EPSILON * v1.abs().max(1.0));
    }

    #[test]
    fn derivatives_match_termwise_oracle(
        x in -0.5f64..0.5, y in -1.0f64..1.0, dx in 0u32..3, dy in 0u32..3,
    ) {
        let shape = KdFShape::new(vec![0.3], vec![0.7, 0.45], vec![1.1], vec![1.2, 1.7], vec![], vec![0.4]).unwrap();
        let v = kdf_eval_derivative(&shape, pt(x, y), dx, dy, &TruncationPolicy::default()).unwrap().value;
        let oracle = brute(&shape).eval(x, y, dx, dy, 200);
        prop_assert!((v - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3), "{} vs {}", v, oracle);
    }
}

#[test]
fn f1211_on_x_axis_is_3f2() {
    let shape = KdFShape::new(vec![0.3], vec![0.7, 0.45], vec![1.1], vec![1.2, 1.7], vec![], vec![0.4]).unwrap();
    for x in [-0.5, -0.2, 0.0, 0.25, 0.5] {
        let v = kdf_eval(&shape, pt(x, 0.0), &TruncationPolicy::default()).unwrap().value;
        assert!(rel(v, pfq(&[0.3, 0.7, 0.45], &[1.2, 1.7], x)) < 1e-12);
    }
}

#[test]
fn f0211_on_y_axis_is_1f2() {
    let (d, e, g) = (0.8, 1.6, 2.3);
    let shape = KdFShape::new(vec![], vec![0.35, 1.25], vec![d], vec![e], vec![], vec![g]).unwrap();
    for y in [-2.0, -0.7, 0.5, 1.5, 3.0] {
        let v = kdf_eval(&shape, pt(0.0, y), &TruncationPolicy::default()).unwrap().value;
        assert!(rel(v, pfq(&[d], &[e, g], y)) < 1e-12);
    }
}

#[test]
fn terminating_series_is_a_polynomial() {
    let shape = KdFShape::new(vec![-3.0], vec![0.5], vec![1.5], vec![2.5], vec![], vec![0.75]).unwrap();
    assert!(validate_shape(&shape).is_polynomial());
    for (x, y) in [(2.0, -3.0), (10.0, 7.0), (-0.4, 0.9)] {
        let r = kdf_eval(&shape, pt(x, y), &TruncationPolicy::default()).unwrap();
        assert_eq!(r.status, SeriesStatus::Terminating);
        let oracle = brute(&shape).eval(x, y, 0, 0, 3);
        assert!(rel(r.value, oracle) < 1e-13, "{} vs {oracle}", r.value);
    }
}

#[test]
fn outside_the_unit_disc_diverges() {
    let shape = KdFShape::new(vec![], vec![0.5, 0.5], vec![], vec![1.5], vec![], vec![]).unwrap();
    let err = kdf_eval(&shape, pt(1.5, 0.0), &TruncationPolicy::default()).unwrap_err();
    assert!(matches!(err, KdfError::Divergence { .. }));
}

#[test]
fn small_cap_is_reported() {
    let shape = KdFShape::new(vec![], vec![0.5, 0.5], vec![], vec![1.5], vec![], vec![]).unwrap();
    let policy = TruncationPolicy {
        max_diagonal: 10,
        ..TruncationPolicy::default()
    };
    let r = kdf_eval(&shape, pt(0.9, 0.0), &policy).unwrap();
    assert_eq!(r.status, SeriesStatus::TruncatedAtCap);
    assert!(r.tail_estimate > 0.0);
}

#[test]
fn large_order_terms_stay_finite() {
    let shape = KdFShape::new(vec![0.5], vec![0.5], vec![0.5], vec![1.5], vec![], vec![]).unwrap();
    let t = kdf_term(&shape, 400, 300, pt(0.5, 0.5)).unwrap();
    assert!(t.is_finite() && t > 0.0);
}
