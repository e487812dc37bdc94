use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::MonotoneFunction;
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::probability::{exceeds, CoverageQuery, Engine, ProbabilityRecord};
use crate::rational::{self, Rational};

/// Largest number of candidate sets a closure scan will visit.
pub const SCAN_CAP: usize = 1 << 22;

/// Parameters of the closedness test `Pr[f(N ∨ x_A) = 1] > 1 − ε ⇒ f(x_A) = 1`
/// for every `|A| ≤ c`, with `N` drawn `noise_p`-biased.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureParams {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub eps: Rational,
    pub c: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub noise_p: Rational,
}

impl ClosureParams {
    pub fn new(eps: Rational, c: usize, noise_p: Rational) -> Result<Self> {
        let open = |x: &Rational| *x > Rational::zero() && *x < Rational::one();
        if !open(&eps) {
            return Err(Error::invalid(format!("ε = {eps} must lie in (0, 1)")));
        }
        if !open(&noise_p) {
            return Err(Error::invalid(format!(
                "noise bias {noise_p} must lie in (0, 1)"
            )));
        }
        Ok(Self { eps, c, noise_p })
    }

    /// `ε = n^{−2c}` with uniform noise.
    pub fn harnik_raz(n: usize, c: usize) -> Result<Self> {
        let eps = Rational::new(BigInt::one(), BigInt::from(n).pow(2 * c as u32));
        Self::new(eps, c, rational::ratio(1, 2))
    }

    /// Trimming keeps minterms of size at most `c/2`.
    pub fn trim_width(&self) -> usize {
        self.c / 2
    }
}

/// Order in which candidate sets are scanned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    Canonical,
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureCheck {
    pub closed: bool,
    pub witness: Option<SubsetMask>,
    /// Acceptance probability under noise at the witness.
    pub probability: Option<ProbabilityRecord>,
}

/// All subsets of `[n]` of size at most `c`, canonical order.
pub fn small_sets(n: usize, c: usize) -> Result<Vec<SubsetMask>> {
    let c = c.min(n);
    let count: u128 = (0..=c)
        .map(|j| rational::binomial(n as u64, j as u64))
        .sum::<BigInt>()
        .try_into()
        .unwrap_or(u128::MAX);
    if count > SCAN_CAP as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: SCAN_CAP as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    fn extend(
        n: usize,
        c: usize,
        next: usize,
        current: &mut SubsetMask,
        out: &mut Vec<SubsetMask>,
    ) {
        out.push(current.clone());
        if current.len() == c {
            return;
        }
        for e in next..=n {
            current.insert(e);
            extend(n, c, e + 1, current, out);
            current.remove(e);
        }
    }
    extend(n, c, 1, &mut SubsetMask::empty(), &mut out);
    out.sort();
    Ok(out)
}

/// `Pr[f(N ∨ x_A) = 1]` for `N` drawn `noise_p`-biased.
pub fn acceptance_under_noise(
    f: &MonotoneFunction,
    a: &SubsetMask,
    noise_p: &Rational,
    engine: &Engine,
) -> Result<ProbabilityRecord> {
    let query = CoverageQuery::for_family(f.minterms(), a, noise_p.clone())?;
    engine.evaluate(&query)
}

fn find_violation(
    f: &MonotoneFunction,
    candidates: &[SubsetMask],
    params: &ClosureParams,
    engine: &Engine,
) -> Result<Option<(SubsetMask, ProbabilityRecord)>> {
    for a in candidates {
        if f.eval(a) {
            continue;
        }
        let record = acceptance_under_noise(f, a, &params.noise_p, engine)?;
        match exceeds(&record, &params.eps) {
            Some(true) => return Ok(Some((a.clone(), record))),
            Some(false) => {}
            None => {
                return Err(Error::Indeterminate {
                    value: record.value(),
                    half_width: record.half_width(),
                    threshold: 1.0 - rational::to_f64(&params.eps),
                })
            }
        }
    }
    Ok(None)
}

fn scan_list(n: usize, params: &ClosureParams, order: ScanOrder) -> Result<Vec<SubsetMask>> {
    let mut sets = small_sets(n, params.c)?;
    if order == ScanOrder::Reversed {
        sets.reverse();
    }
    Ok(sets)
}

/// Scans `|A| ≤ c` in canonical order and reports the first violation.
pub fn is_closed(
    f: &MonotoneFunction,
    params: &ClosureParams,
    engine: &Engine,
) -> Result<ClosureCheck> {
    let sets = scan_list(f.n(), params, ScanOrder::Canonical)?;
    Ok(match find_violation(f, &sets, params, engine)? {
        Some((a, p)) => ClosureCheck {
            closed: false,
            witness: Some(a),
            probability: Some(p),
        },
        None => ClosureCheck {
            closed: true,
            witness: None,
            probability: None,
        },
    })
}

/// The closure together with the sets added on the way, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureRun {
    pub function: MonotoneFunction,
    pub added: Vec<SubsetMask>,
}

/// Adds `⌈A⌉` for the first violating `A` and rescans from the start until
/// no violation remains.
pub fn closure_with_order(
    f: &MonotoneFunction,
    params: &ClosureParams,
    engine: &Engine,
    order: ScanOrder,
) -> Result<ClosureRun> {
    let sets = scan_list(f.n(), params, order)?;
    let mut current = f.clone();
    let mut added = Vec::new();
    while let Some((a, _)) = find_violation(&current, &sets, params, engine)? {
        current = current.or(&MonotoneFunction::indicator(f.n(), a.clone())?)?;
        added.push(a);
    }
    Ok(ClosureRun {
        function: current,
        added,
    })
}

pub fn closure(
    f: &MonotoneFunction,
    params: &ClosureParams,
    engine: &Engine,
) -> Result<MonotoneFunction> {
    Ok(closure_with_order(f, params, engine, ScanOrder::Canonical)?.function)
}

/// `f ⊔ g = trim(cl(f ∨ g))`.
pub fn approx_or(
    f: &MonotoneFunction,
    g: &MonotoneFunction,
    params: &ClosureParams,
    engine: &Engine,
) -> Result<MonotoneFunction> {
    Ok(closure(&f.or(g)?, params, engine)?.trim(params.trim_width()))
}

/// `f ⊓ g = trim(cl(f ∧ g))`.
pub fn approx_and(
    f: &MonotoneFunction,
    g: &MonotoneFunction,
    params: &ClosureParams,
    engine: &Engine,
) -> Result<MonotoneFunction> {
    Ok(closure(&f.and(g)?, params, engine)?.trim(params.trim_width()))
}

/// Both sides of `Pr[f(N) = 0 ∧ cl(f)(N) = 1] ≤ ε·Σ_{j≤c} C(n, j)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureBound {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub lhs: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub rhs: Rational,
    pub holds: bool,
    pub closure_size: usize,
}

pub fn closure_error_bound_check(
    f: &MonotoneFunction,
    params: &ClosureParams,
    cap: usize,
) -> Result<ClosureBound> {
    let engine = Engine::Exact { cap };
    let closed = closure(f, params, &engine)?;
    let accept = |g: &MonotoneFunction| -> Result<Rational> {
        Ok(
            CoverageQuery::for_family(g.minterms(), &SubsetMask::empty(), params.noise_p.clone())?
                .exact(cap)?
                .value,
        )
    };
    // f ≤ cl(f), so the joint event is the difference of acceptances.
    let lhs = accept(&closed)? - accept(f)?;
    let n = f.n() as u64;
    let count: BigInt = (0..=params.c.min(f.n()) as u64)
        .map(|j| rational::binomial(n, j))
        .sum();
    let rhs = &params.eps * Rational::from_integer(count);
    Ok(ClosureBound {
        holds: lhs <= rhs,
        lhs,
        rhs,
        closure_size: closed.minterms().len(),
    })
}

/// `(ℓ, |M_ℓ(f)|, (6·B·c·ln n)^ℓ)` for `ℓ ∈ [c]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MintermCount {
    pub l: usize,
    pub count: usize,
    pub bound: f64,
}

pub fn closed_minterm_bound_check(f: &MonotoneFunction, c: usize, b: f64) -> Vec<MintermCount> {
    let base = 6.0 * b * c as f64 * (f.n() as f64).ln();
    (1..=c)
        .map(|l| MintermCount {
            l,
            count: f.minterms_of_size(l).len(),
            bound: base.powi(l as i32),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::enumerate_monotone;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    fn singletons(n: usize) -> MonotoneFunction {
        MonotoneFunction::from_sets(n, (1..=n).map(SubsetMask::singleton)).unwrap()
    }

    fn exact() -> Engine {
        Engine::exact()
    }

    #[test]
    fn small_sets_are_canonical() {
        let sets = small_sets(5, 3).unwrap();
        assert_eq!(sets.len(), 1 + 5 + 10 + 10);
        let mut sorted = sets.clone();
        sorted.sort();
        assert_eq!(sets, sorted);
        assert_eq!(sets[0], SubsetMask::empty());
        assert_eq!(small_sets(3, 7).unwrap().len(), 8);
        assert!(small_sets(4000, 4).is_err());
    }

    #[test]
    fn inputs_are_closed() {
        let n = 6;
        let params = ClosureParams::harnik_raz(n, 2).unwrap();
        for i in 1..=n {
            let f = MonotoneFunction::indicator(n, SubsetMask::singleton(i)).unwrap();
            assert!(is_closed(&f, &params, &exact()).unwrap().closed);
            assert_eq!(closure(&f, &params, &exact()).unwrap(), f);
        }
        let one = MonotoneFunction::one(n).unwrap();
        assert!(is_closed(&one, &params, &exact()).unwrap().closed);
        assert_eq!(closure(&one, &params, &exact()).unwrap(), one);
    }

    #[test]
    fn empty_set_witness() {
        let params = ClosureParams::new(ratio(9, 10), 1, ratio(1, 2)).unwrap();
        let check = is_closed(&singletons(8), &params, &exact()).unwrap();
        assert!(!check.closed);
        assert_eq!(check.witness, Some(SubsetMask::empty()));
        assert_eq!(
            check.probability.unwrap().exact(),
            Some(&(Rational::one() - rational::pow(&ratio(1, 2), 8)))
        );
    }

    #[test]
    fn singletons_close_to_one() {
        let params = ClosureParams::new(ratio(9, 10), 2, ratio(1, 2)).unwrap();
        let run =
            closure_with_order(&singletons(4), &params, &exact(), ScanOrder::Canonical).unwrap();
        assert!(run.function.is_one());
        assert_eq!(run.added, vec![SubsetMask::empty()]);
    }

    #[test]
    fn approximators_of_inputs() {
        let n = 6;
        let params = ClosureParams::harnik_raz(n, 4).unwrap();
        let x1 = MonotoneFunction::indicator(n, set(&[1])).unwrap();
        let x2 = MonotoneFunction::indicator(n, set(&[2])).unwrap();
        let or = approx_or(&x1, &x2, &params, &exact()).unwrap();
        assert_eq!(or, x1.or(&x2).unwrap());
        assert!(is_closed(&or, &params, &exact()).unwrap().closed);
        let zero = MonotoneFunction::zero(n).unwrap();
        assert!(approx_and(&zero, &x1, &params, &exact()).unwrap().is_zero());
        assert_eq!(approx_or(&or, &or, &params, &exact()).unwrap(), or);
    }

    #[test]
    fn closure_bound_examples() {
        let params = ClosureParams::new(ratio(1, 5), 2, ratio(1, 2)).unwrap();
        let b = closure_error_bound_check(&singletons(6), &params, 24).unwrap();
        assert_eq!(b.rhs, ratio(22, 5));
        assert!(b.holds);
        let x = MonotoneFunction::indicator(6, set(&[1])).unwrap();
        let b =
            closure_error_bound_check(&x, &ClosureParams::harnik_raz(6, 2).unwrap(), 24).unwrap();
        assert!(b.lhs.is_zero());
        // Tiny ε: nothing crosses the bar.
        let tiny = ClosureParams::new(ratio(1, 1 << 40), 2, ratio(1, 2)).unwrap();
        assert!(closure_error_bound_check(&singletons(6), &tiny, 24)
            .unwrap()
            .lhs
            .is_zero());
    }

    #[test]
    fn minterm_counts() {
        let f = MonotoneFunction::from_sets(10, [set(&[1, 2]), set(&[3, 4]), set(&[5])]).unwrap();
        let rows = closed_minterm_bound_check(&f, 3, 1.0);
        assert_eq!(
            rows.iter().map(|r| r.count).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
        assert!(rows.iter().all(|r| r.count as f64 <= r.bound));
        let one = closed_minterm_bound_check(&MonotoneFunction::one(10).unwrap(), 2, 1.0);
        assert!(one.iter().all(|r| r.count == 0));
    }

    /// Closure properties over every monotone function on four variables.
    fn check_all_at_four(params: &ClosureParams) {
        let all = enumerate_monotone(4).unwrap();
        let closed: Vec<bool> = all
            .iter()
            .map(|g| is_closed(g, params, &exact()).unwrap().closed)
            .collect();
        for f in &all {
            let cl = closure(f, params, &exact()).unwrap();
            assert!(f.le(&cl));
            assert_eq!(closure(&cl, params, &exact()).unwrap(), cl);
            let rev = closure_with_order(f, params, &exact(), ScanOrder::Reversed)
                .unwrap()
                .function;
            assert_eq!(rev, cl);
            for (g, &g_closed) in all.iter().zip(&closed) {
                if g_closed && f.le(g) {
                    assert!(cl.le(g), "cl({f:?}) = {cl:?} not below closed {g:?}");
                }
            }
        }
    }

    #[test]
    fn closure_is_minimal_at_four() {
        check_all_at_four(&ClosureParams::new(ratio(3, 10), 2, ratio(1, 2)).unwrap());
    }

    #[test]
    fn conjunction_of_closed_is_closed() {
        let params = ClosureParams::new(ratio(3, 10), 2, ratio(1, 2)).unwrap();
        let closed: Vec<MonotoneFunction> = enumerate_monotone(4)
            .unwrap()
            .into_iter()
            .filter(|g| is_closed(g, &params, &exact()).unwrap().closed)
            .collect();
        for f in &closed {
            for g in &closed {
                assert!(
                    is_closed(&f.and(g).unwrap(), &params, &exact())
                        .unwrap()
                        .closed
                );
            }
        }
    }

    fn arb_function(n: usize) -> impl Strategy<Value = MonotoneFunction> {
        prop::collection::vec(prop::collection::btree_set(1..=n, 1..4), 0..6).prop_map(
            move |sets| {
                MonotoneFunction::from_sets(n, sets.into_iter().map(SubsetMask::from_elements))
                    .unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn closure_dominates_pointwise(f in arb_function(8), e in 1i64..10) {
            let params = ClosureParams::new(ratio(e, 10), 2, ratio(1, 2)).unwrap();
            let cl = closure(&f, &params, &exact()).unwrap();
            for x in 0u64..256 {
                let x = SubsetMask::from_bits(x);
                prop_assert!(!f.eval(&x) || cl.eval(&x));
            }
            prop_assert_eq!(closure(&cl, &params, &exact()).unwrap(), cl.clone());
            prop_assert!(closure_error_bound_check(&f, &params, 24).unwrap().holds);
        }

        #[test]
        fn closure_is_order_invariant(f in arb_function(5), e in 1i64..10, c in 1usize..4) {
            let params = ClosureParams::new(ratio(e, 10), c, ratio(1, 2)).unwrap();
            let a = closure_with_order(&f, &params, &exact(), ScanOrder::Canonical).unwrap().function;
            let b = closure_with_order(&f, &params, &exact(), ScanOrder::Reversed).unwrap().function;
            prop_assert_eq!(a, b);
        }
    }
}
