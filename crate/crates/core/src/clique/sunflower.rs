use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::graph::{clique_edges, edge_count, has_k_clique, Graph};
use crate::check::{BoundCheck, Relation};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::probability::{
    estimate_event, exceeds, CoverageQuery, Engine, Estimate, McConfig, ProbabilityRecord,
};
use crate::rational::{self, Rational};

fn check_open(name: &str, x: &Rational) -> Result<()> {
    if *x > Rational::zero() && *x < Rational::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} must lie in (0, 1)")))
    }
}

fn check_positive(name: &str, x: &Rational) -> Result<()> {
    if *x > Rational::zero() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} must be positive")))
    }
}

/// `Pr[∃A ∈ S : K_A ⊆ G(n,p) ∪ K_Y]`.
pub fn clique_coverage(
    s: &SetFamily,
    y: &SubsetMask,
    p: &Rational,
    engine: &Engine,
) -> Result<ProbabilityRecord> {
    let members = s.iter().map(clique_edges).collect();
    engine.evaluate(&CoverageQuery::new(members, clique_edges(y), p.clone())?)
}

/// The joint event `∃A ∈ S : K_A ⊆ G(n,p) ∪ K_B ∧ A ⊆ U(n,q) ∪ B` as a
/// coverage query: edge `i` is element `i + 1`, vertex `v` is element `C(n,2) + v`
/// and carries bias `q`.
pub fn pq_coverage_query(
    s: &SetFamily,
    core: &SubsetMask,
    p: &Rational,
    q: &Rational,
) -> Result<CoverageQuery> {
    let offset = edge_count(s.n());
    let shift = |a: &SubsetMask| SubsetMask::from_elements(a.elements().map(|v| v + offset));
    let joint = |a: &SubsetMask| clique_edges(a).union(&shift(a));
    let members = s.iter().map(joint).collect();
    CoverageQuery::new(members, joint(core), p.clone())?
        .with_class_bias(shift(&SubsetMask::full(s.n())), q.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueSunflowerCheck {
    pub is_sunflower: bool,
    pub core: SubsetMask,
    pub probability: ProbabilityRecord,
    /// `1 − ε` as a float.
    pub threshold: f64,
}

/// Whether `S` is a `(p, ε)`-clique-sunflower with core `∩S`.
pub fn is_clique_sunflower(
    s: &SetFamily,
    p: &Rational,
    eps: &Rational,
    engine: &Engine,
) -> Result<CliqueSunflowerCheck> {
    check_open("p", p)?;
    check_positive("ε", eps)?;
    let core = s.core()?;
    let probability = clique_coverage(s, &core, p, engine)?;
    decide(core, probability, eps)
}

/// Whether `S` is a `(p, q, ε)`-clique-sunflower with core `∩S`.
pub fn is_pq_clique_sunflower(
    s: &SetFamily,
    p: &Rational,
    q: &Rational,
    eps: &Rational,
    engine: &Engine,
) -> Result<CliqueSunflowerCheck> {
    check_open("p", p)?;
    check_positive("q", q)?;
    check_positive("ε", eps)?;
    if *q > Rational::one() {
        return Err(Error::invalid(format!("q = {q} exceeds 1")));
    }
    let core = s.core()?;
    let probability = engine.evaluate(&pq_coverage_query(s, &core, p, q)?)?;
    decide(core, probability, eps)
}

fn decide(
    core: SubsetMask,
    probability: ProbabilityRecord,
    eps: &Rational,
) -> Result<CliqueSunflowerCheck> {
    let threshold = 1.0 - rational::to_f64(eps);
    let is_sunflower = exceeds(&probability, eps).ok_or(Error::Indeterminate {
        value: probability.value(),
        half_width: probability.half_width(),
        threshold,
    })?;
    Ok(CliqueSunflowerCheck {
        is_sunflower,
        core,
        probability,
        threshold,
    })
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `s_0, …, s_l` at `t`, where `s_0 = 1` and `s_l(t) = t·Σ_{j<l} C(l,j)·s_j(t)`.
pub fn s_sequence(l: usize, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    let mut s = vec![1.0];
    for m in 1..=l {
        let value = t * (0..m).map(|j| binomial_f64(m, j) * s[j]).sum::<f64>();
        if !value.is_finite() {
            return Err(Error::Overflow {
                what: format!("s_{m}({t})"),
            });
        }
        s.push(value);
    }
    Ok(s)
}

pub fn s_poly(l: usize, t: f64) -> Result<f64> {
    Ok(s_sequence(l, t)?[l])
}

/// `l!·(t + 1/2)^l`.
pub fn s_poly_bound(l: usize, t: f64) -> f64 {
    factorial_f64(l) * (t + 0.5).powi(l as i32)
}

/// `l!·(2 ln(1/ε))^l·(1/p)^{C(l,2)}`.
pub fn clique_sunflower_threshold(l: usize, p: f64, eps: f64) -> f64 {
    factorial_f64(l) * (2.0 * (1.0 / eps).ln()).powi(l as i32) * (1.0 / p).powf(binomial_f64(l, 2))
}

/// The threshold above is proved for `ε < e^{−1/2}`.
pub fn clique_lemma_regime(eps: f64) -> bool {
    eps < (-0.5f64).exp()
}

/// Number of ordered pairs `(A, A')` with `|A ∩ A'| = j`, for `j = 0..=l`,
/// pairs with `A = A'` included at `j = l`.
pub fn intersection_profile(s: &SetFamily) -> Result<Vec<u128>> {
    let l = match s.uniformity() {
        Some(l) => l,
        None if s.is_empty() => return Ok(vec![0]),
        None => return Err(Error::NotUniform(s.members()[0].len())),
    };
    // t_j = Σ_{|B| = j} deg(B)² = Σ_pairs C(|A ∩ A'|, j); invert the binomial transform.
    let mut t = vec![0i128; l + 1];
    for (j, tj) in t.iter_mut().enumerate() {
        let mut degrees: HashMap<SubsetMask, i128> = HashMap::new();
        for a in s {
            for b in subsets_of_size(a, j) {
                *degrees.entry(b).or_default() += 1;
            }
        }
        *tj = degrees.values().map(|d| d * d).sum();
    }
    let choose = |n: usize, k: usize| {
        rational::binomial(n as u64, k as u64)
            .to_i128()
            .unwrap_or(i128::MAX)
    };
    Ok((0..=l)
        .map(|i| {
            let exact: i128 = (i..=l)
                .map(|j| {
                    let sign = if (j - i) % 2 == 0 { 1 } else { -1 };
                    sign * choose(j, i) * t[j]
                })
                .sum();
            exact as u128
        })
        .collect())
}

/// All `j`-subsets of `a`, canonical order.
fn subsets_of_size(a: &SubsetMask, j: usize) -> Vec<SubsetMask> {
    let elems: Vec<usize> = a.elements().collect();
    let mut out = Vec::new();
    fn rec(
        elems: &[usize],
        j: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<SubsetMask>,
    ) {
        if cur.len() == j {
            out.push(SubsetMask::from_elements(cur.iter().copied()));
            return;
        }
        for i in start..elems.len() {
            cur.push(elems[i]);
            rec(elems, j, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(&elems, j, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JansonCertificate {
    pub mu: f64,
    pub delta_bar: f64,
    /// `μ² / (μ + Δ̄)`.
    pub exponent: f64,
    /// `exp(−exponent)`: upper bound on the probability that every member is missed.
    pub bound: f64,
}

/// Janson's bound for the joint event over `G(n,p)` and `U(n,q)`, with `Δ̄`
/// summed over ordered pairs meeting in `1..l−1` vertices.
pub fn janson_certificate(s: &SetFamily, p: f64, q: f64) -> Result<JansonCertificate> {
    if !(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!(
            "need p, q in (0, 1], got p = {p}, q = {q}"
        )));
    }
    if s.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let profile = intersection_profile(s)?;
    let l = profile.len() - 1;
    let c = |m: usize| binomial_f64(m, 2);
    let mu = s.len() as f64 * q.powi(l as i32) * p.powf(c(l));
    let delta_bar = (1..l)
        .map(|j| profile[j] as f64 * q.powi((2 * l - j) as i32) * p.powf(2.0 * c(l) - c(j)))
        .sum::<f64>();
    let exponent = mu * mu / (mu + delta_bar);
    Ok(JansonCertificate {
        mu,
        delta_bar,
        exponent,
        bound: (-exponent).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CliqueCase {
    Base,
    /// Recursed on the vertex-link of `b`, `|b| = j`.
    Link {
        j: usize,
        b: SubsetMask,
        degree: usize,
    },
    Janson,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueTraceStep {
    pub depth: usize,
    pub l: usize,
    pub family_size: usize,
    /// Vertex bias at this level.
    pub q: f64,
    pub case: CliqueCase,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CliqueCertificate {
    /// `(1 − q)^{|S|}` at the singleton level.
    BaseCase {
        #[serde(serialize_with = "crate::rational::serialize")]
        miss: Rational,
    },
    Janson(JansonCertificate),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueSunflowerResult {
    pub subfamily: SetFamily,
    pub core_set: SubsetMask,
    /// Post-verification decided the joint coverage exceeds `1 − ε`.
    pub verified: bool,
    /// Post-verification reached a decision either way.
    pub decided: bool,
    pub probability: Option<ProbabilityRecord>,
    pub certificate: CliqueCertificate,
    pub trace: Vec<CliqueTraceStep>,
}

/// `c_{l−j}·(1/(q p^j))^{l−j}·(1/p)^{C(l−j,2)}`.
fn link_threshold(c: &[f64], l: usize, j: usize, p: f64, q: f64) -> f64 {
    let m = l - j;
    c[m] * (1.0 / (q * p.powi(j as i32))).powi(m as i32) * (1.0 / p).powf(binomial_f64(m, 2))
}

struct Search<'a> {
    p: &'a Rational,
    eps: &'a Rational,
    c: Vec<f64>,
    trace: Vec<CliqueTraceStep>,
}

impl Search<'_> {
    fn run(
        &mut self,
        s: &SetFamily,
        q: &Rational,
        depth: usize,
    ) -> Result<(SetFamily, CliqueCertificate)> {
        let l = s
            .uniformity()
            .ok_or_else(|| Error::NotUniform(s.members().first().map_or(0, SubsetMask::len)))?;
        let qf = rational::to_f64(q);
        let step = |case| CliqueTraceStep {
            depth,
            l,
            family_size: s.len(),
            q: qf,
            case,
        };
        if l == 1 {
            let miss = rational::pow(&(Rational::one() - q), s.len());
            if miss >= *self.eps {
                return Err(Error::BaseCaseFailed {
                    bias: qf,
                    size: s.len(),
                    eps: rational::to_f64(self.eps),
                });
            }
            self.trace.push(step(CliqueCase::Base));
            return Ok((s.clone(), CliqueCertificate::BaseCase { miss }));
        }
        let p = rational::to_f64(self.p);
        for j in 1..l {
            let threshold = link_threshold(&self.c, l, j, p, qf);
            let mut degrees: HashMap<SubsetMask, usize> = HashMap::new();
            for a in s {
                for b in subsets_of_size(a, j) {
                    *degrees.entry(b).or_default() += 1;
                }
            }
            let mut heavy: Vec<(SubsetMask, usize)> = degrees
                .into_iter()
                .filter(|(_, d)| *d as f64 >= threshold)
                .collect();
            heavy.sort();
            if let Some((b, degree)) = heavy.into_iter().next() {
                self.trace.push(step(CliqueCase::Link {
                    j,
                    b: b.clone(),
                    degree,
                }));
                let q_next = q * rational::pow(self.p, j);
                let (inner, certificate) = self.run(&s.link(&b), &q_next, depth + 1)?;
                return Ok((inner.lift(&b), certificate));
            }
        }
        let certificate = janson_certificate(s, p, qf)?;
        let target = (1.0 / rational::to_f64(self.eps)).ln();
        if certificate.exponent <= target {
            return Err(Error::NeitherCaseApplies {
                exponent: certificate.exponent,
                target,
            });
        }
        self.trace.push(step(CliqueCase::Janson));
        Ok((s.clone(), CliqueCertificate::Janson(certificate)))
    }
}

/// Extracts a `(p, q, ε)`-clique-sunflower from an `l`-uniform family by
/// recursing on heavy vertex-links and falling back to Janson's inequality,
/// then re-checks the result with `engine` when one is given.
pub fn find_clique_sunflower(
    s: &SetFamily,
    p: &Rational,
    q: &Rational,
    eps: &Rational,
    engine: Option<&Engine>,
) -> Result<CliqueSunflowerResult> {
    check_open("p", p)?;
    check_open("ε", eps)?;
    check_positive("q", q)?;
    if *q > Rational::one() {
        return Err(Error::invalid(format!("q = {q} exceeds 1")));
    }
    if s.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let l = s
        .uniformity()
        .ok_or(Error::NotUniform(s.members()[0].len()))?;
    let c = s_sequence(l, (1.0 / rational::to_f64(eps)).ln())?;
    let mut search = Search {
        p,
        eps,
        c,
        trace: Vec::new(),
    };
    let (subfamily, certificate) = search.run(s, q, 0)?;
    let core_set = subfamily.core()?;
    let (verified, decided, probability) = match engine {
        None => (false, false, None),
        Some(engine) => match engine.evaluate(&pq_coverage_query(&subfamily, &core_set, p, q)?) {
            Ok(record) => {
                let decision = exceeds(&record, eps);
                (decision == Some(true), decision.is_some(), Some(record))
            }
            Err(Error::ExactIntractable { .. }) => (false, false, None),
            Err(e) => return Err(e),
        },
    };
    Ok(CliqueSunflowerResult {
        subfamily,
        core_set,
        verified,
        decided,
        probability,
        certificate,
        trace: search.trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueParams {
    pub n: usize,
    pub delta: f64,
    pub k: usize,
    /// `n^{−2/(k−1)}`.
    pub p: f64,
    /// `n^{−k}`.
    pub eps: f64,
}

impl CliqueParams {
    /// `n^{−k}` exactly.
    pub fn eps_exact(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(self.n).pow(self.k as u32))
    }
}

/// `k = round(n^{1/3 − δ})` (at least 2), `p = n^{−2/(k−1)}`, `ε = n^{−k}`.
pub fn clique_parameters(n: usize, delta: f64) -> Result<CliqueParams> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::invalid(format!("δ = {delta} outside (0, 1/3)")));
    }
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    let nf = n as f64;
    let k = (nf.powf(1.0 / 3.0 - delta).round() as usize).max(2);
    Ok(CliqueParams {
        n,
        delta,
        k,
        p: nf.powf(-2.0 / (k as f64 - 1.0)),
        eps: nf.powi(-(k as i32)),
    })
}

/// Sampled `Pr[G(n,p) contains a k-clique]`.
pub fn verify_no_kclique_bound(n: usize, k: usize, p: f64, config: &McConfig) -> Result<Estimate> {
    Graph::empty(n)?;
    estimate_event(edge_count(n), p, config, |edges| {
        Graph::from_edge_mask(n, edges.clone()).is_ok_and(|g| has_k_clique(&g, k))
    })
}

/// `Pr[G(n,p) contains a k-clique]` as a coverage of the `C(n,k)` cliques.
pub fn kclique_probability(
    n: usize,
    k: usize,
    p: &Rational,
    engine: &Engine,
) -> Result<ProbabilityRecord> {
    let cliques = crate::monotone::small_sets(n, k)?
        .into_iter()
        .filter(|a| a.len() == k);
    let members = cliques.map(|a| clique_edges(&a)).collect();
    engine.evaluate(&CoverageQuery::new(
        members,
        SubsetMask::empty(),
        p.clone(),
    )?)
}

/// `Pr[A ⊆ B] = C(n−|A|, k−|A|)/C(n,k)` for uniform `B ∈ C([n],k)`, against `(k/n)^{|A|}`.
pub fn clique_spread_check(n: usize, k: usize, a: &SubsetMask) -> Result<BoundCheck> {
    let l = a.len();
    if l > k || k > n || !a.fits_in(n) {
        return Err(Error::invalid(format!(
            "need A ⊆ [{n}] with |A| = {l} ≤ k = {k} ≤ n"
        )));
    }
    let value = Rational::new(
        rational::binomial((n - l) as u64, (k - l) as u64),
        rational::binomial(n as u64, k as u64),
    );
    let bound = rational::pow(&rational::ratio(k as i64, n as i64), l);
    Ok(BoundCheck::exact(value, Relation::AtMost, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_sets(n, sets).unwrap()
    }

    fn exact_of(r: ProbabilityRecord) -> Rational {
        r.exact().unwrap().clone()
    }

    #[test]
    fn coverage_examples() {
        let e = Engine::exact();
        let half = ratio(1, 2);
        assert_eq!(
            exact_of(clique_coverage(&fam(5, &[&[1, 2], &[1, 3]]), &set(&[1]), &half, &e).unwrap()),
            ratio(3, 4)
        );
        assert_eq!(
            exact_of(clique_coverage(&fam(5, &[&[1, 2, 3]]), &set(&[1, 2, 3]), &half, &e).unwrap()),
            ratio(1, 1)
        );
        let two = fam(5, &[&[1, 2, 3], &[1, 2, 4]]);
        assert_eq!(
            exact_of(clique_coverage(&two, &set(&[1, 2]), &half, &e).unwrap()),
            ratio(7, 16)
        );
    }

    #[test]
    fn q_one_reduces_to_plain() {
        let e = Engine::exact();
        for s in [
            fam(5, &[&[1, 2], &[1, 3]]),
            fam(5, &[&[1, 2, 3], &[1, 2, 4], &[3, 4, 5]]),
            fam(5, &[&[2, 5]]),
        ] {
            for (p, eps) in [
                (ratio(1, 2), ratio(1, 4)),
                (ratio(3, 4), ratio(1, 2)),
                (ratio(1, 4), ratio(9, 10)),
            ] {
                let plain = is_clique_sunflower(&s, &p, &eps, &e).unwrap();
                let joint = is_pq_clique_sunflower(&s, &p, &ratio(1, 1), &eps, &e).unwrap();
                assert_eq!(plain.probability, joint.probability);
                assert_eq!(plain.is_sunflower, joint.is_sunflower);
            }
        }
        assert!(
            is_clique_sunflower(&fam(5, &[&[1, 2], &[1, 3]]), &ratio(1, 2), &ratio(1, 1), &e)
                .unwrap()
                .is_sunflower
        );
    }

    #[test]
    fn joint_space_exact_against_sampling() {
        let s = fam(5, &[&[1, 2], &[3, 4], &[2, 5]]);
        let (p, q) = (ratio(1, 2), ratio(3, 4));
        let query = pq_coverage_query(&s, &SubsetMask::empty(), &p, &q).unwrap();
        let exact = query.exact(24).unwrap().value;
        assert_eq!(exact, query.inclusion_exclusion().unwrap().value);
        let mc = query.monte_carlo(&McConfig::new(100_000, 0.99, 5)).unwrap();
        assert!((mc.value - rational::to_f64(&exact)).abs() <= 3.0 * mc.half_width);
        // Single member {1,2}: edge present and both vertices kept.
        let one = pq_coverage_query(&fam(5, &[&[1, 2]]), &SubsetMask::empty(), &p, &q).unwrap();
        assert_eq!(one.exact(24).unwrap().value, ratio(1, 2) * ratio(9, 16));
    }

    #[test]
    fn s_values() {
        assert_eq!(s_poly(0, 0.7).unwrap(), 1.0);
        assert_eq!(s_poly(1, 0.7).unwrap(), 0.7);
        assert_eq!(s_poly(2, 1.0).unwrap(), 3.0);
        assert!((s_poly(2, 2.0).unwrap() - 2.0 * (1.0 + 4.0)).abs() < 1e-12);
        assert!(s_poly(2, 1.0).unwrap() <= s_poly_bound(2, 1.0));
        assert_eq!(s_poly_bound(2, 1.0), 4.5);
        assert!(s_poly(3, 0.0).is_err());
        assert!(matches!(s_poly(400, 10.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn s_bound_grid() {
        for t in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let s = s_sequence(16, t).unwrap();
            for (l, v) in s.iter().enumerate() {
                assert!(*v <= s_poly_bound(l, t) * (1.0 + 1e-9), "l={l} t={t}");
            }
        }
    }

    #[test]
    fn thresholds() {
        assert!((clique_sunflower_threshold(1, 0.5, 0.01) - 2.0 * 100f64.ln()).abs() < 1e-12);
        assert!((clique_sunflower_threshold(2, 0.5, (-1f64).exp()) - 16.0).abs() < 1e-9);
        assert!(clique_lemma_regime(0.5) && !clique_lemma_regime(0.7));
        // At l = 3 the robust threshold carries (log 1/ε)^l with exponent l against the clique C(l,2) on 1/p.
        let (p, eps) = (0.5, 0.01);
        let clique = clique_sunflower_threshold(3, p, eps);
        let expected = 6.0 * (2.0 * 100f64.ln()).powi(3) * 8.0;
        assert!((clique - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn intersection_profile_matches_pairs() {
        let s = fam(
            7,
            &[&[1, 2, 3], &[1, 2, 4], &[1, 5, 6], &[5, 6, 7], &[2, 3, 7]],
        );
        let mut brute = [0u128; 4];
        for a in &s {
            for b in &s {
                brute[a.intersection(b).len()] += 1;
            }
        }
        assert_eq!(intersection_profile(&s).unwrap(), brute.to_vec());
        assert!(intersection_profile(&fam(4, &[&[1], &[2, 3]])).is_err());
    }

    #[test]
    fn janson_examples() {
        let s = fam(4, &[&[1, 2], &[1, 3]]);
        let cert = janson_certificate(&s, 0.5, 1.0).unwrap();
        assert!((cert.mu - 1.0).abs() < 1e-12);
        assert!((cert.delta_bar - 0.5).abs() < 1e-12);
        assert!((cert.bound - (-1.0f64 / 1.5).exp()).abs() < 1e-12);
        let miss = 1.0
            - clique_coverage(&s, &SubsetMask::empty(), &ratio(1, 2), &Engine::exact())
                .unwrap()
                .value();
        assert_eq!(miss, 0.25);
        assert!(miss <= cert.bound);
        let disjoint = janson_certificate(&fam(6, &[&[1, 2], &[3, 4], &[5, 6]]), 0.5, 1.0).unwrap();
        assert_eq!(disjoint.delta_bar, 0.0);
        assert!((disjoint.bound - (-1.5f64).exp()).abs() < 1e-12);
        assert!(janson_certificate(&s, 0.5, 0.0).is_err());
    }

    #[test]
    fn janson_bounds_small_families_exactly() {
        let e = Engine::exact();
        let families = [
            fam(5, &[&[1, 2], &[1, 3], &[2, 3], &[4, 5]]),
            fam(6, &[&[1, 2, 3], &[1, 4, 5], &[2, 4, 6]]),
            fam(4, &[&[1, 2, 3]]),
        ];
        for s in &families {
            for p in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
                for q in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
                    let query = pq_coverage_query(s, &SubsetMask::empty(), &p, &q).unwrap();
                    let miss = Rational::one() - exact_of(e.evaluate(&query).unwrap());
                    assert_eq!(
                        Rational::one() - query.inclusion_exclusion().unwrap().value,
                        miss
                    );
                    let cert =
                        janson_certificate(s, rational::to_f64(&p), rational::to_f64(&q)).unwrap();
                    assert!(rational::to_f64(&miss) <= cert.bound + 1e-12);
                }
            }
        }
    }

    #[test]
    fn base_case_singletons() {
        let s = SetFamily::new(20, (1..=20).map(SubsetMask::singleton)).unwrap();
        let result = find_clique_sunflower(
            &s,
            &ratio(1, 2),
            &ratio(1, 2),
            &ratio(1, 1000),
            Some(&Engine::exact()),
        )
        .unwrap();
        assert_eq!(result.subfamily, s);
        assert!(result.core_set.is_empty());
        assert_eq!(
            result.certificate,
            CliqueCertificate::BaseCase {
                miss: ratio(1, 1 << 20)
            }
        );
        assert!(result.verified && result.decided);
        let small = SetFamily::new(5, (1..=5).map(SubsetMask::singleton)).unwrap();
        assert!(matches!(
            find_clique_sunflower(&small, &ratio(1, 2), &ratio(1, 2), &ratio(1, 1000), None),
            Err(Error::BaseCaseFailed { size: 5, .. })
        ));
    }

    #[test]
    fn star_recurses_on_center() {
        // {1, x} for x = 2..=13 at q = 1: c_1·(1/p) = ln(1/ε)/p ≈ 4.6 < 12.
        let s = SetFamily::new(13, (2..=13).map(|x| SubsetMask::from_elements([1, x]))).unwrap();
        let (p, eps) = (ratio(1, 2), ratio(1, 10));
        let result =
            find_clique_sunflower(&s, &p, &ratio(1, 1), &eps, Some(&Engine::exact())).unwrap();
        assert_eq!(result.core_set, set(&[1]));
        assert_eq!(result.subfamily, s);
        assert!(
            matches!(&result.trace[0].case, CliqueCase::Link { j: 1, b, degree: 12 } if *b == set(&[1]))
        );
        assert_eq!(result.trace[1].case, CliqueCase::Base);
        assert_eq!(result.trace[1].q, 0.5);
        // Coverage over 12 independent edges: 1 − 2^{−12}.
        let exact = exact_of(result.probability.clone().unwrap());
        assert_eq!(exact, Rational::one() - ratio(1, 4096));
        assert!(result.verified);
        let cov =
            clique_coverage(&result.subfamily, &result.core_set, &p, &Engine::exact()).unwrap();
        assert_eq!(exact_of(cov), exact);
    }

    #[test]
    fn disjoint_family_uses_janson() {
        // 30 disjoint edges on 60 vertices, p = q = 3/4, ε = 1/100.
        let s = SetFamily::new(
            60,
            (0..30).map(|i| SubsetMask::from_elements([2 * i + 1, 2 * i + 2])),
        )
        .unwrap();
        let (p, q, eps) = (ratio(3, 4), ratio(3, 4), ratio(1, 100));
        let engine = Engine::MonteCarlo(McConfig::new(100_000, 0.99, 3));
        let result = find_clique_sunflower(&s, &p, &q, &eps, Some(&engine)).unwrap();
        let CliqueCertificate::Janson(cert) = &result.certificate else {
            panic!("expected Janson case")
        };
        assert!(cert.bound < 0.01);
        assert!(result.core_set.is_empty());
        assert!(result.verified);
        // Exact miss: (1 − (3/4)^3)^30.
        let miss = (1.0 - 0.75f64.powi(3)).powi(30);
        assert!(miss <= cert.bound);
        let mc = result.probability.unwrap();
        assert!((mc.value() - (1.0 - miss)).abs() <= 3.0 * mc.half_width() + 1e-12);
    }

    #[test]
    fn sparse_family_fails_explicitly() {
        let s = fam(6, &[&[1, 2], &[3, 4]]);
        assert!(matches!(
            find_clique_sunflower(&s, &ratio(1, 2), &ratio(1, 1), &ratio(1, 1000), None),
            Err(Error::NeitherCaseApplies { .. })
        ));
        assert!(find_clique_sunflower(
            &fam(6, &[&[1, 2], &[3]]),
            &ratio(1, 2),
            &ratio(1, 1),
            &ratio(1, 2),
            None
        )
        .is_err());
    }

    #[test]
    fn lifted_results_are_subfamilies() {
        // Triangles through vertex 1 plus noise triangles.
        let mut sets: Vec<SubsetMask> = (2..=9)
            .flat_map(|a| ((a + 1)..=10).map(move |b| SubsetMask::from_elements([1, a, b])))
            .collect();
        sets.push(set(&[2, 3, 4]));
        let s = SetFamily::new(10, sets).unwrap();
        let result = find_clique_sunflower(
            &s,
            &ratio(3, 4),
            &ratio(1, 1),
            &ratio(1, 4),
            Some(&Engine::auto(McConfig::new(20_000, 0.99, 1))),
        );
        let result = result.unwrap();
        assert!(result.subfamily.iter().all(|a| s.contains(a)));
        assert_eq!(result.core_set, result.subfamily.core().unwrap());
        if let CliqueCase::Link { b, .. } = &result.trace[0].case {
            assert!(b.is_subset(&result.core_set));
            assert_eq!(result.subfamily.link(b).lift(b), result.subfamily);
        }
    }

    #[test]
    fn parameters() {
        let params = clique_parameters(64, 0.01).unwrap();
        assert_eq!(params.k, 4);
        assert!((params.p - 1.0 / 16.0).abs() < 1e-12);
        assert_eq!(
            params.eps_exact(),
            Rational::new(BigInt::one(), BigInt::from(64u32).pow(4))
        );
        assert!(clique_parameters(64, 0.5).is_err());
        let a = clique_parameters(1000, 0.1).unwrap();
        let b = clique_parameters(100_000, 0.1).unwrap();
        assert!(a.k <= b.k);
    }

    #[test]
    fn kclique_probability_routes_agree() {
        // n = 6, k = 3: exact coverage over 15 edges against sampling.
        let p = ratio(1, 2);
        let exact = kclique_probability(6, 3, &p, &Engine::exact()).unwrap();
        let brute = (0u64..1 << 15)
            .filter(|&bits| {
                has_k_clique(
                    &Graph::from_edge_mask(6, SubsetMask::from_bits(bits)).unwrap(),
                    3,
                )
            })
            .count();
        assert_eq!(exact_of(exact.clone()), ratio(brute as i64, 1 << 15));
        let mc = verify_no_kclique_bound(6, 3, 0.5, &McConfig::new(50_000, 0.99, 2)).unwrap();
        assert!((mc.value - exact.value()).abs() <= 3.0 * mc.half_width);
        let never = verify_no_kclique_bound(10, 3, 0.0, &McConfig::new(1_000, 0.99, 2)).unwrap();
        assert_eq!(never.value, 0.0);
    }

    #[test]
    fn spread_examples() {
        assert_eq!(
            clique_spread_check(10, 3, &set(&[])).unwrap().value.exact(),
            Some(&ratio(1, 1))
        );
        let one = clique_spread_check(10, 3, &set(&[1])).unwrap();
        assert_eq!(one.value.exact(), Some(&ratio(3, 10)));
        assert!(one.holds);
        let two = clique_spread_check(10, 3, &set(&[1, 2])).unwrap();
        assert_eq!(two.value.exact(), Some(&ratio(1, 15)));
        assert_eq!(two.exact_bound, Some(ratio(9, 100)));
        assert!(two.holds);
        assert!(clique_spread_check(10, 1, &set(&[1, 2])).is_err());
    }
}
