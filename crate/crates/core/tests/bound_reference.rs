mod common;

use occucert::bounds::{bound_lower1, bound_lower2, bound_upper, clamp_probability};
use proptest::prelude::*;

#[test]
fn closed_forms_match_50_digit_reference() {
    let r = common::bound_reference();
    assert_eq!(
        (r.upper.len(), r.lower1.len(), r.lower2.len()),
        (100, 100, 100)
    );
    for e in common::bound_reference_errors() {
        assert!(e <= 1e-12, "relative error {e:e}");
    }
}

proptest! {
    #[test]
    fn upper_grows_with_v0_and_beta(
        v0 in 0.0..2.0f64, dv in 0.0..1.0f64, beta in 0.0..1e-2f64, db in 0.0..1e-2f64,
        lambda in 1e-6..2.0f64, k in 0.1..5.0f64, extra in 0.0..5.0f64,
    ) {
        let h = k + extra;
        let b = bound_upper(v0, lambda, beta, h, k).unwrap();
        prop_assert!(bound_upper(v0 + dv, lambda, beta, h, k).unwrap() >= b);
        prop_assert!(bound_upper(v0, lambda, beta + db, h, k).unwrap() >= b);
    }

    #[test]
    fn lower_bounds_grow_with_v0(
        v0 in -1.0..1.0f64, dv in 0.0..1.0f64, beta in 0.0..1e-2f64,
        lambda in 1e-3..2.0f64, k in 0.1..2.0f64, extra in 1.0..10.0f64,
    ) {
        let h = k + extra;
        if let Ok(b) = bound_lower1(v0, -beta, 1.0, lambda, h, k) {
            prop_assert!(bound_lower1(v0 + dv, -beta, 1.0, lambda, h, k).unwrap() >= b);
        }
        if let Ok(b) = bound_lower2(v0, beta, 1.0, lambda, h, k) {
            prop_assert!(bound_lower2(v0 + dv, beta, 1.0, lambda, h, k).unwrap() >= b);
        }
    }

    #[test]
    fn clamped_bounds_are_probabilities(x in prop::num::f64::ANY) {
        let c = clamp_probability(x);
        prop_assert!((0.0..=1.0).contains(&c));
    }
}
