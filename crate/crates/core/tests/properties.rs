mod common;

use banachkit::space::format;
use banachkit::{
    gauge2_qpm, gauge_qpm, parse, sb_norm, sb_norm_oracle, threshold_split, DavisParams, DavisSpace, FVec, GaugeParams,
    Lp, SbMode, Schedule, SpaceExpr, Truncation,
};
use common::lp_vec;
use proptest::prelude::*;

fn fvec(max_supp: usize, max_index: usize) -> impl Strategy<Value = FVec> {
    proptest::collection::btree_map(1..=max_index, -1.0f64..1.0, 1..=max_supp)
        .prop_map(|m| FVec::from_pairs(m).unwrap())
        .prop_filter("nonzero", |x| !x.is_zero())
}

fn gauge_params() -> impl Strategy<Value = GaugeParams> {
    (1.0f64..3.0, 0.1f64..3.0, 1.0f64..8.0).prop_map(|(q, d, m)| GaugeParams::new(q, q + d, m).unwrap())
}

fn space() -> impl Strategy<Value = SpaceExpr> {
    let leaf = (1.0f64..4.0).prop_map(|p| SpaceExpr::lp((p * 4.0).round() / 4.0));
    leaf.prop_recursive(3, 6, 1, |inner| {
        prop_oneof![
            (inner.clone(), 0.0f64..2.0).prop_map(|(c, dr)| {
                let r = (dr * 4.0).round() / 4.0 + 1.0;
                SpaceExpr::sb(c, r)
            }),
            (inner, 1.1f64..2.0, 0.25f64..2.0, 1usize..6).prop_map(|(c, q, d, k)| {
                let q = (q * 8.0).round() / 8.0;
                SpaceExpr::davis(c, q, q + d.max(0.125), Schedule::Pow2, Some(Truncation::Fixed(k)))
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_a_norm(x in fvec(8, 12), y in fvec(8, 12), c in -4.0f64..4.0, pr in gauge_params()) {
        let g = |v: &FVec| gauge_qpm(v, pr, 1e-10).unwrap().value;
        let gx = g(&x);
        prop_assert!(gx > 0.0);
        prop_assert!((g(&x.scale(c)) - c.abs() * gx).abs() <= 1e-8 * gx.max(1.0));
        prop_assert!(g(&x.add(&y)) <= gx + g(&y) + 1e-8);
    }

    #[test]
    fn gauge_lower_bound_certifies(x in fvec(8, 12), pr in gauge_params()) {
        let r = gauge2_qpm(&x, pr, 1e-8).unwrap();
        prop_assert!(r.lower_bound <= r.value);
        prop_assert!(r.value - r.lower_bound <= 1e-7 * r.value.max(1.0));
    }

    #[test]
    fn gauge_between_scaled_lp_norms(x in fvec(10, 20), pr in gauge_params()) {
        let g = gauge_qpm(&x, pr, 1e-10).unwrap().value;
        let np = lp_vec(&x, pr.p);
        prop_assert!(g >= np / (pr.m + 1.0 / pr.m) - 1e-8);
        prop_assert!(g <= pr.m * np + 1e-8);
    }

    #[test]
    fn sb_exact_agrees_with_oracle(x in fvec(7, 10), p in 1.0f64..3.0, dr in 0.0f64..2.0) {
        let base = Lp::new(p).unwrap();
        let exact = sb_norm(&x, &base, p + dr, SbMode::Exact).unwrap();
        prop_assert_eq!(exact.value, sb_norm_oracle(&x, &base, p + dr).unwrap());
        exact.partition.validate().unwrap();
    }

    #[test]
    fn sb_heuristic_is_a_lower_bound(x in fvec(10, 14), p in 1.0f64..3.0) {
        let base = Lp::new(p).unwrap();
        let h = sb_norm(&x, &base, p, SbMode::Heuristic).unwrap().value;
        let e = sb_norm(&x, &base, p, SbMode::Exact).unwrap().value;
        prop_assert!(h <= e * (1.0 + 1e-12));
        let sup = x.iter().fold(0.0_f64, |a, (_, v)| a.max(v.abs()));
        prop_assert!(h >= sup * (1.0 - 1e-12));
    }

    #[test]
    fn davis_truncation_is_monotone(x in fvec(6, 8), q in 1.1f64..2.0, d in 0.2f64..2.0, k in 1usize..8) {
        let space = DavisSpace::new(Lp::new(2.0).unwrap(), DavisParams::new(q, q + d, Schedule::Pow2)).unwrap();
        let a = space.evaluate_with_k(&x, k).unwrap();
        let b = space.evaluate_with_k(&x, k + 1).unwrap();
        prop_assert!(b.value >= a.value);
        prop_assert!(b.value - a.value <= a.tail_bound);
    }

    #[test]
    fn threshold_split_reconstructs(x in fvec(10, 20), delta in 0.0f64..1.0) {
        let (y, z) = threshold_split(&x, delta).unwrap();
        prop_assert_eq!(y.add(&z), x);
        prop_assert!(y.iter().all(|(_, v)| v.abs() > delta));
        prop_assert!(z.iter().all(|(_, v)| v.abs() <= delta));
    }

    #[test]
    fn format_then_parse_round_trips(expr in space()) {
        let text = format(&expr);
        let back = parse(&text).unwrap();
        prop_assert_eq!(format(&back), text);
        prop_assert_eq!(back, expr);
    }
}
