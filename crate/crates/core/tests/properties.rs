use proptest::prelude::*;

use darbo::engine::{classic_darbo_run, EngineConfig, Outcome};
use darbo::expr::{parse_expr, BinOp, Expr};
use darbo::mnc::{
    convex_combination, hausdorff_mnc, scale_translate, GeomTerm, TailBox, TailForm, TailPoint,
};
use darbo::operators::{DiagonalAffineOperator, OperatorSpec};
use darbo::scalar::ratio;
use darbo::scenarios::unit_box;
use darbo::shifting::{check_condition_i, check_condition_ii, SampleGrid, Verdict};
use darbo::{BigRational, ExactTailBox, ExactTailForm};

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=8).prop_map(|(p, q)| ratio(p, q))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..=50, 1i64..=4).prop_map(|(p, q)| Expr::constant(ratio(p, q))),
        Just(Expr::T),
        Just(Expr::N),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

/// Ratios are multiples of 1/8 so exact sign decisions stay small.
fn form(nonneg: bool, beta: BigRational) -> impl Strategy<Value = ExactTailForm> {
    let alpha = if nonneg { (0i64..=160).boxed() } else { (-160i64..=160).boxed() };
    prop::collection::vec((alpha, 1i64..=7), 0..=2).prop_map(move |terms| {
        let terms = terms
            .into_iter()
            .map(|(a, r)| GeomTerm { alpha: ratio(a, 16), rho: ratio(r, 8) })
            .collect();
        TailForm::new(terms, beta.clone()).unwrap()
    })
}

/// Center with vanishing tail plus nonnegative radius forms.
fn exact_box() -> impl Strategy<Value = ExactTailBox> {
    let head = prop::collection::vec((-160i64..=160, 0i64..=160, 0i64..=160), 0..=2);
    (head, 0i64..=160, 0i64..=160)
        .prop_flat_map(|(head, blo, bhi)| {
            (Just(head), form(false, ratio(0, 1)), form(true, ratio(blo, 16)), form(true, ratio(bhi, 16)))
        })
        .prop_map(|(head, center, r_lo, r_hi)| {
            let lo = head.iter().map(|&(m, a, _)| ratio(m - a, 16)).collect();
            let hi = head.iter().map(|&(m, _, b)| ratio(m + b, 16)).collect();
            TailBox::new(lo, hi, &center - &r_lo, &center + &r_hi).unwrap()
        })
}

fn exact_operator() -> impl Strategy<Value = DiagonalAffineOperator<BigRational>> {
    (
        prop::collection::vec(-16i64..=16, 0..=2),
        -16i64..=16,
        prop::collection::vec((-16i64..=16, 1i64..=7), 0..=1),
    )
        .prop_map(|(d_head, c, e_terms)| {
            let e_terms = e_terms
                .into_iter()
                .map(|(a, r)| GeomTerm { alpha: ratio(a, 16), rho: ratio(r, 8) })
                .collect();
            DiagonalAffineOperator::new(
                d_head.into_iter().map(|d| ratio(d, 16)).collect(),
                TailForm::constant(ratio(c, 16)),
                Vec::new(),
                TailForm::new(e_terms, ratio(0, 1)).unwrap(),
            )
            .unwrap()
        })
}

fn same_box(a: &ExactTailBox, b: &ExactTailBox, upto: u64) -> bool {
    (1..=upto).all(|i| a.coordinate(i) == b.coordinate(i))
        && a.tail_lo().asym() == b.tail_lo().asym()
        && a.tail_hi().asym() == b.tail_hi().asym()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_expressions_parse_back(e in expr(), t in small_rational(), n in 1u64..50) {
        let back = parse_expr(&e.to_string()).unwrap();
        prop_assert_eq!(back.eval_at(&t, n), e.eval_at(&t, n));
    }

    #[test]
    fn convex_combination_is_subadditive(a in exact_box(), b in exact_box(), l in 0i64..=16) {
        let lambda = ratio(l, 16);
        let c = convex_combination(&lambda, &a, &b).unwrap();
        let rhs = lambda.clone() * hausdorff_mnc(&a).into_inner()
            + (ratio(1, 1) - lambda) * hausdorff_mnc(&b).into_inner();
        prop_assert!(hausdorff_mnc(&c).into_inner() <= rhs);
    }

    #[test]
    fn measure_is_absolutely_homogeneous(a in exact_box(), c in small_rational()) {
        let scaled = scale_translate(&a, &c, &TailPoint::origin());
        prop_assert_eq!(
            hausdorff_mnc(&scaled).into_inner(),
            num_traits::Signed::abs(&c) * hausdorff_mnc(&a).into_inner()
        );
    }

    #[test]
    fn affine_maps_commute_with_combination(
        t in exact_operator(), a in exact_box(), b in exact_box(), l in 0i64..=16,
    ) {
        let lambda = ratio(l, 16);
        let lhs = t.apply_to_box(&convex_combination(&lambda, &a, &b).unwrap()).unwrap();
        let rhs = convex_combination(&lambda, &t.apply_to_box(&a).unwrap(), &t.apply_to_box(&b).unwrap()).unwrap();
        prop_assert!(same_box(&lhs, &rhs, 40));
    }

    #[test]
    fn grid_refinement_never_hides_a_failure(
        a in 0i64..=4, b in 0i64..=3, c in 0i64..=4, d in 0i64..=3, step in 1u32..=4,
    ) {
        let psi = parse_expr(&format!("{a}*t+{b}")).unwrap();
        let phi = parse_expr(&format!("{c}*t+{d}")).unwrap();
        let pair = darbo::shifting::FunctionSequencePair::new(psi.clone(), phi.clone()).with_limits(psi, phi);
        let h = step as f64 / 4.0;
        let coarse = SampleGrid::new(4.0, h, vec![1, 2]).unwrap();
        let fine = SampleGrid::new(4.0, h / 2.0, vec![1, 2]).unwrap();
        for check in [check_condition_i::<f64>, check_condition_ii::<f64>] {
            if check(&pair, &coarse).unwrap().verdict == Verdict::Fail {
                prop_assert_eq!(check(&pair, &fine).unwrap().verdict, Verdict::Fail);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classic_run_matches_scaling_factor(c in 0u32..=15, k in 0u32..=15) {
        let grid = SampleGrid::new(2.0, 0.5, vec![1, 2, 4]).unwrap();
        let cfg = EngineConfig::with_grid(grid);
        let scale = c as f64 / 16.0;
        let op = OperatorSpec::Single(DiagonalAffineOperator::scaling(scale));
        let cert = classic_darbo_run(&op, &unit_box(), &(k as f64 / 16.0), &cfg).unwrap();
        if c <= k {
            prop_assert_eq!(cert.outcome, Outcome::Certified);
            for w in cert.trace.windows(2) {
                prop_assert!(w[1].mu <= (k as f64 / 16.0) * w[0].mu + 1e-12);
            }
        } else {
            prop_assert_eq!(cert.outcome, Outcome::Refuted);
            prop_assert_eq!(cert.steps, 0);
        }
    }
}
