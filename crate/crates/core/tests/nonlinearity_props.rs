use affineflow::nonlinearity::{a_minus, a_plus, affine_a, sgn};
use affineflow::RegularizationParams;
use proptest::prelude::*;

fn magnitude() -> impl Strategy<Value = f64> {
    (any::<bool>(), -6.0f64..6.0).prop_map(|(neg, e)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
}

fn arg() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 12 => magnitude()]
}

fn caps() -> impl Strategy<Value = RegularizationParams> {
    (0.0f64..4.0, 0.0f64..6.0).prop_map(|(k, l)| RegularizationParams::new(10f64.powf(k), 10f64.powf(l)).unwrap())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn splitting_identity(p in arg(), q in arg()) {
        let lhs = -affine_a(p, q);
        let rhs = a_plus(p.abs(), -q) + a_minus(-p.abs(), -q);
        prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn regularized_splitting_identity(p in arg(), q in arg(), r in caps()) {
        let lhs = -r.apply(p, q);
        let rhs = r.plus(p.abs(), -q) + r.minus(-p.abs(), -q);
        prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn split_parts_are_nondecreasing(p in arg(), q in arg(), dp in 0.0f64..10.0, dq in 0.0f64..10.0, r in caps()) {
        prop_assert!(a_plus(p + dp, q) >= a_plus(p, q));
        prop_assert!(a_plus(p, q + dq) >= a_plus(p, q));
        prop_assert!(a_minus(p + dp, q) >= a_minus(p, q));
        prop_assert!(a_minus(p, q + dq) >= a_minus(p, q));
        prop_assert!(r.plus(p + dp, q) >= r.plus(p, q));
        prop_assert!(r.plus(p, q + dq) >= r.plus(p, q));
        prop_assert!(r.minus(p + dp, q) >= r.minus(p, q));
        prop_assert!(r.minus(p, q + dq) >= r.minus(p, q));
    }

    #[test]
    fn lipschitz_bound(p1 in arg(), q1 in arg(), p2 in arg(), q2 in arg(), r in caps()) {
        let diff = (r.apply(p1, q1) - r.apply(p2, q2)).abs();
        let bound = r.k * (p1 - p2).abs() + r.l * (q1 - q2).abs();
        prop_assert!(diff <= bound * (1.0 + 1e-12), "{diff} > {bound}");
    }

    #[test]
    fn regularization_error(p in arg(), q in arg(), r in caps()) {
        let err = (r.apply(p, q) - affine_a(p, q)).abs();
        let bound = r.error_bound(p, q);
        prop_assert!(err <= bound * (1.0 + 1e-12) + 1e-300, "{err} > {bound}");
    }

    #[test]
    fn parity(p in arg(), q in arg(), r in caps()) {
        prop_assert_eq!(affine_a(-p, q), affine_a(p, q));
        prop_assert_eq!(affine_a(p, -q), -affine_a(p, q));
        prop_assert_eq!(r.apply(-p, q), r.apply(p, q));
        prop_assert_eq!(r.apply(p, -q), -r.apply(p, q));
    }

    #[test]
    fn real_cube_root(x in magnitude()) {
        let c = affine_a(1.0, x);
        prop_assert!(c.is_finite());
        prop_assert_eq!(sgn(c), sgn(x));
        prop_assert!(close(c * c * c, x) || (c * c * c - x).abs() <= 4.0 * f64::EPSILON * x.abs());
    }

    #[test]
    fn no_curvature_no_motion(p in arg(), r in caps()) {
        prop_assert_eq!(r.apply(p, 0.0), 0.0);
        prop_assert_eq!(affine_a(p, 0.0), 0.0);
    }
}

#[test]
fn regularization_inactive_near_the_diagonal() {
    let r = RegularizationParams::new(10.0, 100.0).unwrap();
    // |A(1, 1)| = 1 < min(K, L)
    assert_eq!(r.apply(1.0, 1.0), affine_a(1.0, 1.0));
    assert_eq!(r.apply(1e-4, 1.0), 10.0 * 1e-4);
    assert_eq!(r.apply(1.0, -1e-4), -100.0 * 1e-4);
    assert!(RegularizationParams::new(0.1, 1.0).is_err());
}
