use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use sunflower_core::clique::Graph;
use sunflower_core::codes::{Monomial, Polynomial};
use sunflower_core::monotone::{
    closure, closure_with_order, is_closed, ClosureParams, Gate, MonotoneCircuit, MonotoneFunction,
    ScanOrder,
};
use sunflower_core::probability::{CoverageQuery, Engine, McConfig, DEFAULT_WORK_CAP};
use sunflower_core::rational::{self, ratio, Rational};
use sunflower_core::sunflower::find_sunflower;
use sunflower_core::{SetFamily, SubsetMask};

const N: usize = 8;

fn arb_family(max_size: usize) -> impl Strategy<Value = SetFamily> {
    prop::collection::vec(prop::collection::btree_set(1..=N, 1..=max_size), 1..8).prop_map(|sets| {
        SetFamily::new(N, sets.into_iter().map(SubsetMask::from_elements)).unwrap()
    })
}

fn arb_bias() -> impl Strategy<Value = Rational> {
    (1i64..8).prop_map(|k| ratio(k, 8))
}

fn bits(m: &SubsetMask) -> u64 {
    m.as_u64().unwrap()
}

/// Sum of `p^|W| (1-p)^{n-|W|}` over every `W` with `W ∪ given` covering a member.
fn brute_coverage(n: usize, family: &SetFamily, given: &SubsetMask, p: &Rational) -> Rational {
    let q = Rational::one() - p;
    let ms: Vec<u64> = family.iter().map(bits).collect();
    let y = bits(given);
    (0u64..1 << n)
        .filter(|w| ms.iter().any(|&m| m & !(w | y) == 0))
        .map(|w| {
            let k = w.count_ones() as usize;
            rational::pow(p, k) * rational::pow(&q, n - k)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_routes_match_brute_force(f in arb_family(4), p in arb_bias(), given in prop::collection::btree_set(1..=N, 0..3)) {
        let given = SubsetMask::from_elements(given);
        let query = CoverageQuery::for_family(&f, &given, p.clone()).unwrap();
        let oracle = brute_coverage(N, &f, &given, &p);
        prop_assert_eq!(&query.exact(DEFAULT_WORK_CAP).unwrap().value, &oracle);
        prop_assert_eq!(&query.inclusion_exclusion().unwrap().value, &oracle);
    }

    #[test]
    fn coverage_grows_with_bias(f in arb_family(4), a in 1i64..8, b in 1i64..8) {
        let (lo, hi) = (a.min(b), a.max(b));
        let at = |k| CoverageQuery::for_family(&f, &SubsetMask::empty(), ratio(k, 8)).unwrap().exact(DEFAULT_WORK_CAP).unwrap().value;
        prop_assert!(at(lo) <= at(hi));
    }

    #[test]
    fn lifting_preserves_coverage(f in arb_family(3), p in arb_bias(), t in prop::collection::btree_set(1..=N, 1..3)) {
        let t = SubsetMask::from_elements(t);
        let link = f.link(&t);
        prop_assume!(!link.is_empty());
        let lifted = link.lift(&t);
        let lhs = brute_coverage(N, &lifted, &t, &p);
        let rhs = brute_coverage(N, &link, &SubsetMask::empty(), &p);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn monte_carlo_stays_in_unit_interval(f in arb_family(4), p in arb_bias(), seed in any::<u64>()) {
        let query = CoverageQuery::for_family(&f, &SubsetMask::empty(), p).unwrap();
        let est = query.monte_carlo(&McConfig::new(500, 0.95, seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.value));
        prop_assert!(est.half_width > 0.0);
        let again = query.monte_carlo(&McConfig::new(500, 0.95, seed)).unwrap();
        prop_assert_eq!(est.value, again.value);
    }

    #[test]
    fn found_sunflowers_are_sunflowers(f in arb_family(3), r in 2usize..4) {
        if let Ok(s) = find_sunflower(&f, r) {
            let petals = s.petals.members();
            prop_assert!(petals.len() >= r);
            let kernel = petals.iter().fold(SubsetMask::full(N), |acc, p| acc.intersection(p));
            prop_assert_eq!(&kernel, &s.kernel);
            for (i, a) in petals.iter().enumerate() {
                prop_assert!(f.contains(a));
                for b in &petals[i + 1..] {
                    prop_assert_eq!(&a.intersection(b), &kernel);
                }
            }
        }
    }

    #[test]
    fn closure_is_a_closed_upper_bound(sets in prop::collection::vec(prop::collection::btree_set(1usize..=6, 1..4), 1..5), c in 2usize..4) {
        let f = MonotoneFunction::from_sets(6, sets.into_iter().map(SubsetMask::from_elements)).unwrap();
        let params = ClosureParams::new(ratio(1, 8), c, ratio(1, 2)).unwrap();
        let engine = Engine::exact();
        let cl = closure(&f, &params, &engine).unwrap();
        prop_assert!(f.le(&cl));
        prop_assert!(is_closed(&cl, &params, &engine).unwrap().closed);
        prop_assert_eq!(&closure(&cl, &params, &engine).unwrap(), &cl);
        let rev = closure_with_order(&f, &params, &engine, ScanOrder::Reversed).unwrap();
        prop_assert_eq!(&rev.function, &cl);
    }

    #[test]
    fn spread_parameter_is_the_tightest_spread(f in arb_family(3)) {
        let r = f.spread_parameter().unwrap();
        prop_assert!(f.check_spread(r * (1.0 - 1e-9)).unwrap().is_spread);
        prop_assert!(!f.check_spread(r * (1.0 + 1e-6)).unwrap().is_spread);
    }

    #[test]
    fn family_text_round_trips(f in arb_family(5)) {
        prop_assert_eq!(SetFamily::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn graph_text_round_trips(edges in prop::collection::btree_set((1usize..=9, 1usize..=9), 0..20)) {
        let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
        let g = Graph::from_edges(9, edges).unwrap();
        prop_assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn polynomial_text_round_trips(terms in prop::collection::vec((prop::collection::btree_set(0u32..15, 0..4), -5i64..6, 1i64..4), 0..6)) {
        let p = Polynomial::from_terms(5, 3, terms.into_iter().map(|(vars, a, b)| (Monomial::from_vars(vars), Rational::new(BigInt::from(a), BigInt::from(b)))));
        prop_assert_eq!(Polynomial::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn circuit_text_round_trips(ops in prop::collection::vec((any::<bool>(), any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..10)) {
        let mut gates: Vec<Gate> = (1..=4).map(Gate::Input).collect();
        for (and, a, b) in ops {
            let (a, b) = (a.index(gates.len()), b.index(gates.len()));
            gates.push(if and { Gate::And(a, b) } else { Gate::Or(a, b) });
        }
        let out = gates.len() - 1;
        let c = MonotoneCircuit::new(4, gates, out).unwrap();
        let back = MonotoneCircuit::parse(&c.to_text()).unwrap();
        for x in 0u64..16 {
            let x = SubsetMask::from_bits(x);
            prop_assert_eq!(back.eval(&x), c.eval(&x));
        }
    }

    #[test]
    fn parsers_reject_garbage_without_panicking(text in "\\PC{0,80}") {
        let _ = SetFamily::parse(&text);
        let _ = Graph::parse(&text);
        let _ = Polynomial::parse(&text);
        let _ = MonotoneCircuit::parse(&text);
        let _ = sunflower_core::codes::Code::from_csv(5, &text);
    }
}

#[test]
fn star_coverage_matches_closed_form() {
    // Petals {1,i} for i = 2..=6 are covered unless 1 is absent or every
    // other element is: 1 - (1 - p) - p(1 - p)^5 at p = 1/2.
    let f = SetFamily::from_sets(6, &[[1, 2], [1, 3], [1, 4], [1, 5], [1, 6]]).unwrap();
    let query = CoverageQuery::for_family(&f, &SubsetMask::empty(), ratio(1, 2)).unwrap();
    assert_eq!(query.exact(DEFAULT_WORK_CAP).unwrap().value, ratio(31, 64));
}
