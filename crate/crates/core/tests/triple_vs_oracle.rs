use approx::assert_relative_eq;
use proptest::prelude::*;
use sbf_overlap::oracle::{oscillatory_integral, QuadratureConfig};
use sbf_overlap::specfun::Order;
use sbf_overlap::triple_sbf::{mehrem_even_k2, reduce_triple, reference_001_n2, TripleSpec};

fn oracle(orders: [u32; 3], radii: [f64; 3], n: i32, cfg: &QuadratureConfig) -> f64 {
    let o: Vec<Order> = orders.iter().copied().map(Order).collect();
    oscillatory_integral(&o, &radii, n, cfg).unwrap().value
}

#[test]
fn mehrem_higher_orders_match_damping() {
    let cfg = QuadratureConfig::damping();
    for (l1, l2, big_l) in [(1, 1, 2), (2, 2, 2), (1, 2, 1), (2, 1, 3)] {
        for &(r1, r2, u) in &[(1.0, 1.0, 1.0), (0.8, 1.1, 0.6), (0.8, 1.1, 1.7), (1.3, 0.5, 1.0)] {
            let m = mehrem_even_k2(Order(l1), Order(l2), Order(big_l), r1, r2, u).unwrap();
            let o = oracle([l1, l2, big_l], [r1, r2, u], 2, &cfg);
            assert_relative_eq!(m, o, max_relative = 1e-4, epsilon = 1e-8);
        }
        let out = mehrem_even_k2(Order(l1), Order(l2), Order(big_l), 0.5, 0.6, 1.5).unwrap();
        assert_eq!(out, 0.0);
    }
}

#[test]
fn reduce_matches_oracle_on_convergent_specs() {
    let cfg = QuadratureConfig::default();
    let pts = [(0.7, 1.0, 0.5), (0.3, 0.9, 1.1), (1.5, 0.6, 1.2), (0.4, 0.45, 0.3), (1.9, 1.2, 0.35)];
    for spec in [TripleSpec::new(0, 0, 1, 2), TripleSpec::new(0, 0, 0, 2), TripleSpec::new(1, 1, 0, 2), TripleSpec::new(1, 2, 2, 2)] {
        for &(r1, r2, r3) in &pts {
            let v = reduce_triple(spec, r1, r2, r3).unwrap().value;
            let o = oracle([spec.ell1.0, spec.ell2.0, spec.ell3.0], [r1, r2, r3], 2, &cfg);
            assert_relative_eq!(v, o, max_relative = 1e-6, epsilon = 1e-10);
        }
    }
}

#[test]
fn damping_oracle_reproduces_001_reference() {
    let o = oracle([0, 0, 1], [0.7, 1.0, 0.5], 2, &QuadratureConfig::damping());
    assert_relative_eq!(o, reference_001_n2(0.7, 1.0, 0.5), max_relative = 1e-4);
}

#[test]
fn delta_supported_middle_inside_triangle_matches_abel_sum() {
    let cfg = QuadratureConfig::damping();
    for &(r1, r2, r3) in &[(0.7, 1.0, 0.5), (1.0, 1.0, 1.0), (0.6, 0.9, 1.2)] {
        let v = reduce_triple(TripleSpec::new(0, 0, 2, 4), r1, r2, r3).unwrap();
        assert!(v.triangle_ok && v.delta_supported);
        let o = oracle([0, 0, 2], [r1, r2, r3], 4, &cfg);
        assert_relative_eq!(v.value, o, max_relative = 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reference_equals_reduction(r1 in 0.2f64..2.0, r2 in 0.2f64..2.0, r3 in 0.2f64..2.0) {
        let w = ((r1 - r2).abs(), r1 + r2);
        prop_assume!((r3 - w.0).abs() > 1e-3 && (r3 - w.1).abs() > 1e-3);
        let v = reduce_triple(TripleSpec::new(0, 0, 1, 2), r1, r2, r3).unwrap().value;
        let reference = reference_001_n2(r1, r2, r3);
        prop_assert!((v - reference).abs() <= 1e-8 * reference.abs().max(1e-6), "{} vs {}", v, reference);
    }

    #[test]
    fn delta_supported_vanishes_outside_triangle(r1 in 0.2f64..2.0, r2 in 0.2f64..2.0, gap in 0.01f64..1.0, above in any::<bool>()) {
        let r3 = if above { r1 + r2 + gap } else { (r1 - r2).abs() - gap };
        prop_assume!(r3 > 0.0);
        let v = reduce_triple(TripleSpec::new(0, 0, 2, 4), r1, r2, r3).unwrap();
        prop_assert_eq!(v.value, 0.0);
    }

    #[test]
    fn swapping_first_two_is_invariant(r1 in 0.3f64..1.8, r2 in 0.3f64..1.8, r3 in 0.3f64..1.8) {
        let w = ((r1 - r2).abs(), r1 + r2);
        prop_assume!((r3 - w.0).abs() > 1e-3 && (r3 - w.1).abs() > 1e-3);
        let a = reduce_triple(TripleSpec::new(1, 0, 1, 2), r1, r2, r3).unwrap().value;
        let b = reduce_triple(TripleSpec::new(0, 1, 1, 2), r2, r1, r3).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-8));
    }
}
