use num_traits::{One, Zero};
use proptest::prelude::*;

use lebesgue::cantor::{build_stage, unit_index, CantorKind, RationalEnumeration};
use lebesgue::fubini::section_identity_check;
use lebesgue::lebesgue::{indicator_of, integrate_bounded};
use lebesgue::qc::QcFunction;
use lebesgue::rational::{format_rational, int, parse_rational, rat, Endpoint, Rational};
use lebesgue::riemann::darboux;
use lebesgue::set::{
    disjointify_1d, dyadic_decompose, inner_measure_bound, outer_measure_bound, Interval, Multirectangle, OpenSet, Rectangle, Topology,
};
use lebesgue::tietze::{extend_1d, ClosedComplementDomain};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-64i64..64, 1i64..17).prop_map(|(p, q)| rat(p, q))
}

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::Open), Just(Topology::Closed), Just(Topology::HalfOpenLo), Just(Topology::HalfOpenHi)]
}

fn interval() -> impl Strategy<Value = Interval> {
    (small_rational(), 0i64..32, 1i64..9, topology())
        .prop_map(|(lo, w, q, t)| Interval::new(Endpoint::Finite(lo.clone()), Endpoint::Finite(lo + rat(w, q)), t).unwrap())
}

fn multiinterval() -> impl Strategy<Value = Multirectangle> {
    prop::collection::vec(interval(), 1..7).prop_map(Multirectangle::from_intervals)
}

fn multirectangle(dim: usize) -> impl Strategy<Value = Multirectangle> {
    prop::collection::vec(prop::collection::vec(interval(), dim), 1..5)
        .prop_map(move |rs| Multirectangle::new(dim, rs.into_iter().map(Rectangle::new).collect()).unwrap())
}

fn finite(m: &Multirectangle) -> Rational {
    m.measure().finite().cloned().expect("bounded")
}

proptest! {
    #[test]
    fn rational_text_round_trips(r in small_rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn union_measure_is_bounded_by_total_length(m in multiinterval()) {
        let mu = finite(&m);
        prop_assert!(mu <= m.length().finite().cloned().unwrap());
        prop_assert_eq!(disjointify_1d(&m).length().finite().cloned().unwrap(), mu.clone());
        let d = disjointify_1d(&m);
        prop_assert!(d.is_disjoint());
        prop_assert_eq!(finite(&d), mu);
    }

    #[test]
    fn measure_is_subadditive_and_monotone(a in multiinterval(), b in multiinterval()) {
        let ab = a.concat(&b).unwrap();
        let (ma, mb, mab) = (finite(&a), finite(&b), finite(&ab));
        prop_assert!(mab <= &ma + &mb);
        prop_assert!(mab >= ma && mab >= mb);
    }

    #[test]
    fn planar_measure_is_subadditive(m in multirectangle(2)) {
        let mu = finite(&m);
        prop_assert!(mu <= m.length().finite().cloned().unwrap());
        for r in m.rects() {
            prop_assert!(r.volume().finite().cloned().unwrap() <= mu);
        }
    }

    #[test]
    fn outer_and_inner_bounds_bracket_the_measure(m in multiinterval(), k in 1u32..8) {
        let eps = rat(1, 1 << k);
        let mu = finite(&m);
        let outer = outer_measure_bound(&m, &eps).unwrap();
        prop_assert!(outer.is_open());
        prop_assert!(finite(&outer) >= mu);
        prop_assert!(outer.length().finite().cloned().unwrap() < m.length().finite().cloned().unwrap() + &eps);
        let inner = inner_measure_bound(&m, &eps).unwrap();
        prop_assert!(inner.is_closed());
        prop_assert!(inner.length().finite().cloned().unwrap() > m.length().finite().cloned().unwrap() - &eps);
        for iv in inner.intervals() {
            if let Endpoint::Finite(x) = iv.lo() {
                prop_assert!(m.contains(std::slice::from_ref(x)));
            }
        }
    }

    #[test]
    fn section_identity_holds_in_three_dimensions(m in multirectangle(3), axis in 0usize..3) {
        let r = section_identity_check(&m, axis).unwrap();
        prop_assert!(r.agree);
        prop_assert_eq!(r.volume, finite(&m));
    }

    #[test]
    fn dyadic_lengths_grow_with_depth_and_stay_inside(m in multiinterval(), depth in 1u32..7) {
        let open = Multirectangle::from_intervals(m.intervals().map(|i| i.interior()).filter(|i| !i.is_empty()).collect());
        prop_assume!(!open.is_empty());
        let o = OpenSet::new(open.clone()).unwrap();
        let bx = Rectangle::closed(&[(int(-64), int(96))]);
        let shallow = dyadic_decompose(&o, &bx, depth).unwrap();
        let deep = dyadic_decompose(&o, &bx, depth + 1).unwrap();
        prop_assert!(shallow.length() <= deep.length());
        prop_assert!(deep.length() <= finite(&open));
    }

    #[test]
    fn cantor_stages_partition_the_unit_interval(j in 1u32..12, ternary in any::<bool>()) {
        let kind = if ternary { CantorKind::Ternary } else { CantorKind::SmithVolterra };
        let st = build_stage(kind, j).unwrap();
        prop_assert_eq!(st.measure_removed() + st.measure_retained(), Rational::one());
        prop_assert_eq!(st.components(), 1usize << j);
        prop_assert_eq!(st.measure_retained(), finite(st.retained()));
        prop_assert!(st.retained().is_disjoint());
    }

    #[test]
    fn unit_index_inverts_the_enumeration(k in 0usize..2000) {
        let r = RationalEnumeration::new(Rational::zero(), Rational::one()).nth(k).unwrap();
        prop_assert_eq!(unit_index(&r), Some(k as u64 + 1));
    }

    #[test]
    fn tietze_extension_respects_bounds_and_order(
        gaps in prop::collection::vec((0i64..30, 1i64..6), 1..4),
        a in -8i64..9, b in -8i64..9, c in 0i64..9, x in 0i64..=64,
    ) {
        let removed = Multirectangle::from_intervals(gaps.iter().map(|&(s, w)| Interval::open(rat(s, 32), rat((s + w).min(31), 32))).collect());
        let k = ClosedComplementDomain::new(Rectangle::parse("[0,1]").unwrap(), removed).unwrap();
        let (a, b, c) = (rat(a, 4), rat(b, 4), rat(c, 4));
        let f = |t: &Rational| &a * t + &b;
        let g = |t: &Rational| {
            let (u, v) = (&a * t + &b, &c - t);
            if u > v { u } else { v }
        };
        let on_k: Vec<Rational> = (0..=64).map(|i| rat(i, 64)).filter(|t| k.contains(std::slice::from_ref(t))).collect();
        let lo = on_k.iter().map(&f).min().unwrap();
        let hi = on_k.iter().map(&f).max().unwrap();
        let x = rat(x, 64);
        let fx = extend_1d(&k, f, &x).unwrap();
        prop_assert!(lo <= fx && fx <= hi);
        prop_assert!(fx <= extend_1d(&k, g, &x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_is_linear_on_polynomials(c in prop::collection::vec(-8i64..9, 1..4), d in prop::collection::vec(-8i64..9, 1..4)) {
        let poly = |v: &[i64]| format!("poly:{}", v.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
        let (p, q) = (poly(&c), poly(&d));
        let f = QcFunction::parse(&p).unwrap();
        let g = QcFunction::parse(&q).unwrap();
        let fg = QcFunction::parse(&format!("sum({p},{q})")).unwrap();
        let unit = [(int(0), int(1))];
        let i = |h: &QcFunction| integrate_bounded(h, &unit, 4, 1e-10).unwrap().exact.unwrap();
        prop_assert_eq!(i(&fg), i(&f) + i(&g));
    }

    #[test]
    fn integral_is_monotone(m in multiinterval()) {
        let ind = indicator_of(&m);
        let hull = m.intervals().fold((int(64), int(-64)), |(lo, hi), iv| {
            let (a, b) = (iv.lo().finite().unwrap().clone(), iv.hi().finite().unwrap().clone());
            (if a < lo { a } else { lo }, if b > hi { b } else { hi })
        });
        let bx = [hull];
        let small = integrate_bounded(&ind, &bx, 4, 1e-10).unwrap();
        let big = integrate_bounded(&QcFunction::parse("const:1").unwrap(), &bx, 4, 1e-10).unwrap();
        prop_assert!(small.exact.unwrap() <= big.exact.unwrap());
    }

    #[test]
    fn darboux_sums_bracket_the_integral(c in prop::collection::vec(-4i64..5, 1..4), n in 1u32..64) {
        let p = format!("poly:{}", c.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
        let f = QcFunction::parse(&p).unwrap();
        let pair = darboux(&f.expr, &int(0), &int(1), n).unwrap();
        let exact: f64 = c.iter().enumerate().map(|(k, a)| *a as f64 / (k + 1) as f64).sum();
        prop_assert!(pair.lower <= exact + 1e-12 && exact <= pair.upper + 1e-12);
    }
}
