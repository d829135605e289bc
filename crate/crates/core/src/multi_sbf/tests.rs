use super::*;
use crate::oracle::{oscillatory_integral, QuadratureConfig};
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn oracle(orders: &[u32], radii: &[f64]) -> f64 {
    let o: Vec<Order> = orders.iter().map(|&l| Order(l)).collect();
    oscillatory_integral(&o, radii, 2, &QuadratureConfig::damping()).unwrap().value
}

#[test]
fn plan_shapes() {
    let t = plan(&MultiSpec::new(&[0, 0, 0, 0], &[1.0; 4], 2)).unwrap();
    assert_eq!(t.auxiliaries(), 1);
    assert!(t.leaves().iter().all(|l| matches!(l, ReductionTree::Mehrem { .. })));

    let t = plan(&MultiSpec::new(&[1, 0, 2, 1, 0], &[1.0; 5], 2)).unwrap();
    assert_eq!(t.auxiliaries(), 2);
    assert_eq!(t.leaves().len(), 3);

    let t = plan(&MultiSpec::new(&[0; 6], &[1.0; 6], 2)).unwrap();
    let ReductionTree::Split { head, tail, support, .. } = &t else { panic!("{t:?}") };
    assert_eq!(head.auxiliaries(), 1);
    assert_eq!(tail.auxiliaries(), 1);
    assert_eq!(*support, [0.0, 3.0]);

    for n_f in 4..=MAX_FACTORS {
        let t = plan(&MultiSpec::new(&vec![1; n_f], &vec![0.7; n_f], 2)).unwrap();
        assert_eq!(t.auxiliaries(), n_f - 3);
    }
}

#[test]
fn parity_flag() {
    let t = plan(&MultiSpec::new(&[0, 1, 0, 0], &[1.0; 4], 2)).unwrap();
    assert!(matches!(t, ReductionTree::Split { parity_mismatch: true, .. }));
    let t = plan(&MultiSpec::new(&[0, 1, 1, 0], &[1.0; 4], 2)).unwrap();
    assert!(matches!(t, ReductionTree::Split { parity_mismatch: false, .. }));
}

#[test]
fn four_zeros_at_unit_radii() {
    // int sin^4 k / k^2 dk
    let v = evaluate_multi(&MultiSpec::new(&[0; 4], &[1.0; 4], 2)).unwrap();
    assert_relative_eq!(v.value, PI / 4.0, max_relative = 1e-7);
    assert_eq!(v.refinement_levels.len(), 1);
}

#[test]
fn four_factors_against_oracle() {
    for (orders, radii) in [
        ([0, 0, 0, 0], [1.0, 1.2, 0.8, 1.5]),
        ([1, 1, 0, 2], [1.0, 0.9, 1.3, 0.7]),
        ([0, 1, 0, 0], [1.0, 1.1, 0.6, 1.4]),
    ] {
        let ours = evaluate_multi(&MultiSpec::new(&orders, &radii, 2)).unwrap().value;
        let want = oracle(&orders, &radii);
        assert_relative_eq!(ours, want, max_relative = 1e-3, epsilon = 1e-6);
    }
}

#[test]
fn five_factors_against_oracle() {
    let (orders, radii) = ([0, 0, 0, 0, 0], [1.0, 1.1, 0.9, 1.2, 0.8]);
    let ours = evaluate_multi(&MultiSpec::new(&orders, &radii, 2)).unwrap().value;
    assert_relative_eq!(ours, oracle(&orders, &radii), max_relative = 1e-3);
}

#[test]
fn pairing_does_not_matter() {
    let a = evaluate_multi(&MultiSpec::new(&[0, 1, 1, 2], &[1.0, 0.8, 1.3, 0.9], 2)).unwrap();
    let b = evaluate_multi(&MultiSpec::new(&[1, 2, 0, 1], &[1.3, 0.9, 1.0, 0.8], 2)).unwrap();
    let c = evaluate_multi(&MultiSpec::new(&[0, 1, 1, 2], &[1.0, 1.3, 0.8, 0.9], 2).permuted(&[0, 2, 1, 3])).unwrap();
    assert_relative_eq!(a.value, b.value, max_relative = 1e-6);
    assert_relative_eq!(a.value, c.value, max_relative = 1e-6);
}

#[test]
fn no_closed_polygon_gives_zero() {
    let v = evaluate_multi(&MultiSpec::new(&[0, 0, 0, 0], &[1.0, 1.0, 1.0, 5.0], 2)).unwrap();
    assert_eq!(v.value, 0.0);
}

#[test]
fn rejects() {
    assert!(matches!(
        evaluate_multi(&MultiSpec::new(&[0; 4], &[1.0; 4], 3)),
        Err(Error::Unsupported(_))
    ));
    assert!(matches!(plan(&MultiSpec::new(&[0; 9], &[1.0; 9], 2)), Err(Error::InvalidInput(_))));
    assert!(matches!(plan(&MultiSpec::new(&[0; 3], &[1.0; 3], 2)), Err(Error::InvalidInput(_))));
    assert!(matches!(plan(&MultiSpec::new(&[0; 4], &[1.0; 4], 1)), Err(Error::InvalidInput(_))));
    assert!(matches!(plan(&MultiSpec::new(&[0; 4], &[1.0, -1.0, 1.0, 1.0], 2)), Err(Error::InvalidInput(_))));
}
