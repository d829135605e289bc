use super::*;
use crate::double_sbf::base_expr;
use proptest::prelude::*;

fn term(region: RegionFactor, n: i64, d: i64, pi: i32, pr: i32, prp: i32, hyper: Option<HyperDescriptor>) -> Term {
    Term {
        region,
        coeff: ExactCoeff::new(BigRational::new(n.into(), d.into()), pi),
        gamma: None,
        pow_r: pr,
        pow_rp: prp,
        hyper,
    }
}

fn expr(terms: Vec<Term>) -> DistExpr {
    DistExpr {
        terms,
        ..DistExpr::empty(Order(1), Order(2), 1)
    }
}

#[test]
fn empty_stays_empty() {
    let e = DistExpr::empty(Order(0), Order(0), 0);
    assert!(e.canonicalize().terms.is_empty());
    assert!(e.apply_d().terms.is_empty());
    assert_eq!(e.apply_d().current_n, 2);
}

#[test]
fn opposite_terms_cancel() {
    let h = Some(HyperDescriptor::base(Orientation::Primed));
    let e = expr(vec![
        term(RegionFactor::HeavisidePrimeGreater, 1, 2, 0, 1, -3, h),
        term(RegionFactor::HeavisidePrimeGreater, -1, 2, 0, 1, -3, h),
    ]);
    assert!(e.canonicalize().terms.is_empty());
}

#[test]
fn regions_do_not_merge() {
    let e = expr(vec![
        term(RegionFactor::HeavisidePrimeGreater, 1, 1, 0, 0, 0, None),
        term(RegionFactor::HeavisideGreater, 1, 1, 0, 0, 0, None),
    ]);
    assert_eq!(e.canonicalize().terms.len(), 2);
}

#[test]
fn mixed_gamma_tags_are_dropped_on_merge() {
    let mut a = term(RegionFactor::HeavisideGreater, 1, 1, 0, -2, 0, None);
    let mut b = a.clone();
    a.gamma = Some(GammaTag { kind: GammaKind::CGammaGreater, base_n: 1 });
    b.gamma = Some(GammaTag { kind: GammaKind::CGammaPrimeGreater, base_n: 1 });
    let c = expr(vec![a, b]).canonicalize();
    assert_eq!(c.terms.len(), 1);
    assert_eq!(c.terms[0].gamma, None);
    assert_eq!(c.terms[0].coeff, ExactCoeff::rational(2, 1));
}

#[test]
fn ladder_on_l0_base_collapses_to_delta() {
    let base = base_expr(Order(0), Order(0), 0).unwrap();
    let raw = base.apply_d_raw(JumpWeight::Full);
    // the raw expansion still carries regular-looking pieces
    assert!(raw.terms.len() > 1);
    let c = raw.canonicalize();
    assert_eq!(
        c.terms,
        vec![term(RegionFactor::DeltaDerivative(0), 1, 2, 1, -1, -1, None)]
    );
}

#[test]
fn half_jump_weight_breaks_closure() {
    let base = base_expr(Order(0), Order(0), 0).unwrap();
    let full = base.apply_d_with(JumpWeight::Full);
    let half = base.apply_d_with(JumpWeight::Half);
    assert_ne!(full, half);
    let coeff = |e: &DistExpr| {
        e.delta_terms()
            .filter(|t| t.region == RegionFactor::DeltaDerivative(0))
            .map(|t| t.coeff.to_f64() * 1.7f64.powi(t.pow_r + t.pow_rp))
            .sum::<f64>()
    };
    let f = coeff(&full);
    let h = coeff(&half);
    assert!((f - std::f64::consts::PI / 2.0 / 1.7 / 1.7).abs() < 1e-15);
    assert!((h - f).abs() > 0.1 * f.abs());
}

#[test]
fn equal_orders_n0_derivative_kernels_vanish() {
    for l in 0..5 {
        let e = base_expr(Order(l), Order(l), 0).unwrap();
        for h in [Orientation::Primed, Orientation::Unprimed] {
            let (_, b, _) = e.kernel_params(&HyperDescriptor::base(h).raised());
            let (a, bb, c) = e.kernel_params(&HyperDescriptor::base(h));
            assert!(!b.is_zero());
            // d_103 = a b / c vanishes because b = 0 at base
            assert!(bb.is_zero() || a.is_zero(), "l={l} a={a} b={bb} c={c}");
        }
    }
}

#[test]
fn delta_coefficients_are_moved_onto_r() {
    // r'^2 d/dr delta(r - r') = r^2 delta' + 2 r delta
    let e = expr(vec![term(RegionFactor::DeltaDerivative(1), 1, 1, 0, 0, 2, None)]).canonicalize();
    assert_eq!(
        e.terms,
        vec![
            term(RegionFactor::DeltaDerivative(0), 2, 1, 0, 1, 0, None),
            term(RegionFactor::DeltaDerivative(1), 1, 1, 0, 2, 0, None),
        ]
    );
}

#[test]
fn swap_is_an_involution_on_closed_forms() {
    for (l, lp, n) in [(0, 1, 2), (2, 1, 3), (1, 1, 4), (3, 0, 5)] {
        let e = crate::double_sbf::closed_form(crate::double_sbf::DoubleSpec::new(l, lp, n)).unwrap();
        let strip = |e: DistExpr| {
            let mut e = e;
            for t in &mut e.terms {
                t.gamma = None;
            }
            e
        };
        assert_eq!(strip(e.swapped().swapped()), strip(e.clone()));
    }
}

#[test]
fn rendering() {
    assert_eq!(render_coeff(&ExactCoeff::new(BigRational::new(1.into(), 2.into()), 1)), "+1/2·π");
    assert_eq!(render_coeff(&ExactCoeff::rational(-3, 1)), "-3");
    assert_eq!(render_coeff(&ExactCoeff::new(BigRational::new(4.into(), 3.into()), -1)), "+4/3·π^-1");
    assert_eq!(display_split(-2), (-1, -1));
    assert_eq!(display_split(-3), (-2, -1));
}

#[test]
fn json_rejects_bad_input() {
    assert!(serde_json::from_str::<DistExpr>(r#"{"ell":0,"ellp":0,"n":1,"base_n":0,"terms":[]}"#).is_err());
    let bad_region = r#"{"ell":0,"ellp":0,"n":0,"base_n":0,"terms":[{"region":"H(x)","coeff":{"num":1,"den":1,"pi_pow":0},"gamma":null,"pow_r":0,"pow_rp":0,"hyper":null}]}"#;
    assert!(serde_json::from_str::<DistExpr>(bad_region).is_err());
}

#[test]
fn json_big_integers_are_strings() {
    let big = BigInt::from(10).pow(30);
    let e = expr(vec![Term {
        coeff: ExactCoeff::new(BigRational::from_integer(big), 0),
        ..term(RegionFactor::HeavisideGreater, 1, 1, 0, 0, 0, None)
    }]);
    let s = serde_json::to_string(&e).unwrap();
    assert!(s.contains("\"1000000000000000000000000000000\""));
    assert_eq!(serde_json::from_str::<DistExpr>(&s).unwrap(), e);
}

fn arb_term() -> impl Strategy<Value = Term> {
    (
        prop_oneof![
            Just(RegionFactor::HeavisidePrimeGreater),
            Just(RegionFactor::HeavisideGreater),
            (0u32..3).prop_map(RegionFactor::DeltaDerivative),
        ],
        -20i64..20,
        1i64..12,
        -1i32..2,
        -6i32..4,
        -6i32..4,
        prop::option::of((any::<bool>(), 0i32..3)),
    )
        .prop_map(|(region, n, d, pi, pr, prp, h)| {
            let hyper = if region.is_delta() {
                None
            } else {
                h.map(|(p, k)| {
                    let o = if p { Orientation::Primed } else { Orientation::Unprimed };
                    let mut d = HyperDescriptor::base(o);
                    for _ in 0..k {
                        d = d.raised();
                    }
                    d
                })
            };
            term(region, n, d, pi, pr, prp, hyper)
        })
}

fn arb_expr() -> impl Strategy<Value = DistExpr> {
    prop::collection::vec(arb_term(), 0..8).prop_map(|t| expr(t).canonicalize())
}

proptest! {
    #[test]
    fn json_round_trip(e in arb_expr()) {
        let s = serde_json::to_string(&e).unwrap();
        prop_assert_eq!(serde_json::from_str::<DistExpr>(&s).unwrap(), e);
    }

    #[test]
    fn canonicalize_is_idempotent(e in prop::collection::vec(arb_term(), 0..10).prop_map(expr)) {
        let c = e.canonicalize();
        prop_assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn ladder_is_linear(a in arb_expr(), b in arb_expr(), k in -5i64..5) {
        let k = BigRational::from_integer(k.into());
        let lhs = a.add_scaled(&b, &k).apply_d();
        let rhs = a.apply_d().add_scaled(&b.apply_d(), &k);
        let strip = |mut e: DistExpr| { for t in &mut e.terms { t.gamma = None; } e };
        prop_assert_eq!(strip(lhs), strip(rhs));
    }

    #[test]
    fn regular_part_is_unchanged_by_canonicalize(
        e in prop::collection::vec(arb_term(), 0..8).prop_map(expr),
        r in 0.2f64..3.0, rp in 0.2f64..3.0,
    ) {
        prop_assume!((r - rp).abs() > 0.05 && r.max(rp) / r.min(rp) > 1.2);
        let before = eval_regular(&e, r, rp);
        let after = eval_regular(&e.canonicalize(), r, rp);
        if let (Ok(x), Ok(y)) = (before, after) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn ladder_keeps_parity(l in 0u32..4, lp in 0u32..4, base in 0i32..2, steps in 0usize..4) {
        let mut e = base_expr(Order(l), Order(lp), base).unwrap();
        for _ in 0..steps {
            e = e.apply_d();
            prop_assert_eq!((e.current_n - e.base_n) % 2, 0);
        }
        prop_assert_eq!(e.current_n, base + 2 * steps as i32);
    }
}

