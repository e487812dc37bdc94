//! Classical sunflowers, the three size thresholds, and constructive
//! extraction of robust sunflowers by recursion on links.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::probability::{exceeds, CoverageQuery, Engine, ExactProbability, ProbabilityRecord};
use crate::rational::{self, Rational};

/// Node budget for the sunflower search once the greedy pass has failed.
const SEARCH_BUDGET: usize = 200_000;

/// A family whose members pairwise intersect in exactly `kernel`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sunflower {
    pub petals: SetFamily,
    pub kernel: SubsetMask,
}

impl Sunflower {
    /// Validates the pairwise-intersection property.
    pub fn new(petals: SetFamily) -> Result<Self> {
        let kernel = petals.core()?;
        let ms = petals.members();
        for (i, a) in ms.iter().enumerate() {
            for b in &ms[i + 1..] {
                if a.intersection(b) != kernel {
                    return Err(Error::invalid(format!(
                        "{a} and {b} do not meet in the kernel {kernel}"
                    )));
                }
            }
        }
        Ok(Self { petals, kernel })
    }
}

/// Whether every pair of distinct members meets in the same set.
pub fn is_sunflower(family: &SetFamily) -> bool {
    !family.is_empty() && Sunflower::new(family.clone()).is_ok()
}

/// `ℓ!·(r−1)^ℓ`.
pub fn erdos_rado_threshold(l: usize, r: u64) -> Result<u64> {
    if l < 1 || r < 2 {
        return Err(Error::invalid(format!(
            "need ℓ ≥ 1 and r ≥ 2, got ℓ={l}, r={r}"
        )));
    }
    let overflow = || Error::Overflow {
        what: format!("{l}!·({r}−1)^{l}"),
    };
    let mut acc: u64 = 1;
    for i in 1..=l as u64 {
        acc = acc
            .checked_mul(i)
            .and_then(|a| a.checked_mul(r - 1))
            .ok_or_else(overflow)?;
    }
    if acc > i64::MAX as u64 {
        return Err(overflow());
    }
    Ok(acc)
}

/// `ℓ!·(2·ln(1/ε)/p)^ℓ`.
pub fn factorial_robust_threshold(l: usize, p: f64, eps: f64) -> f64 {
    factorial(l) * (2.0 * (1.0 / eps).ln() / p).powi(l as i32)
}

/// The unspecified constant of the improved robust-sunflower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub b: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self { b: 64.0 }
    }
}

impl ThresholdParams {
    pub fn new(b: f64) -> Result<Self> {
        if b > 0.0 && b.is_finite() {
            Ok(Self { b })
        } else {
            Err(Error::invalid(format!("B = {b} must be positive")))
        }
    }

    /// The spreadness parameter `B·ln(ℓ/ε)/p`.
    pub fn spread_parameter(&self, l: usize, p: f64, eps: f64) -> f64 {
        self.b * (l as f64 / eps).ln() / p
    }
}

/// `(B·ln(ℓ/ε)/p)^ℓ`.
pub fn spread_robust_threshold(l: usize, p: f64, eps: f64, params: &ThresholdParams) -> f64 {
    params.spread_parameter(l, p, eps).powi(l as i32)
}

/// `e^{−r·p^ℓ}`: the robustness of any `ℓ`-uniform sunflower with `r` petals.
pub fn uniform_sunflower_is_robust(r: usize, p: f64, l: usize) -> f64 {
    (-(r as f64) * p.powi(l as i32)).exp()
}

fn factorial(l: usize) -> f64 {
    (1..=l).map(|i| i as f64).product()
}

/// Concrete check of the uniform-sunflower robustness chain
/// `coverage ≥ 1 − (1 − p^ℓ)^r ≥ 1 − e^{−r·p^ℓ}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformBoundCheck {
    pub coverage: ExactProbability,
    pub product_bound: ExactProbability,
    pub exponential_bound: f64,
    pub holds: bool,
}

pub fn check_uniform_sunflower_bound(
    sunflower: &Sunflower,
    p: &Rational,
) -> Result<UniformBoundCheck> {
    let l = sunflower
        .petals
        .uniformity()
        .ok_or(Error::NotUniform(sunflower.petals.members()[0].len()))?;
    let r = sunflower.petals.len();
    let query = CoverageQuery::for_family(&sunflower.petals, &sunflower.kernel, p.clone())?;
    let coverage = match query.exact(crate::probability::DEFAULT_WORK_CAP) {
        Err(Error::ExactIntractable { .. }) => query.inclusion_exclusion()?,
        other => other?,
    };
    let miss = Rational::one() - rational::pow(p, l);
    let product_bound = ExactProbability::new(Rational::one() - rational::pow(&miss, r));
    let exponential_bound = 1.0 - uniform_sunflower_is_robust(r, rational::to_f64(p), l);
    let holds =
        coverage.value >= product_bound.value && product_bound.shadow >= exponential_bound - 1e-15;
    Ok(UniformBoundCheck {
        coverage,
        product_bound,
        exponential_bound,
        holds,
    })
}

/// Finds `r` members forming a sunflower.
///
/// Greedily collects disjoint members; failing that, recurses on the link of
/// the most popular element, which always succeeds above the Erdős–Rado
/// threshold. Below it a bounded search over other elements and disjoint
/// selections is attempted before giving up.
pub fn find_sunflower(family: &SetFamily, r: usize) -> Result<Sunflower> {
    if r == 0 {
        return Err(Error::invalid("a sunflower needs at least one petal"));
    }
    let mut budget = SEARCH_BUDGET;
    match search(family.members().to_vec(), r, &mut budget) {
        Some(petals) => Sunflower::new(SetFamily::new(family.n(), petals)?),
        None => Err(Error::ThresholdNotMet { petals: r }),
    }
}

fn search(members: Vec<SubsetMask>, r: usize, budget: &mut usize) -> Option<Vec<SubsetMask>> {
    if *budget == 0 || members.len() < r {
        return None;
    }
    *budget -= 1;
    if r == 1 {
        return Some(vec![members[0].clone()]);
    }
    let mut disjoint: Vec<&SubsetMask> = Vec::new();
    for m in &members {
        if disjoint.iter().all(|d| d.is_disjoint(m)) {
            disjoint.push(m);
            if disjoint.len() == r {
                return Some(disjoint.into_iter().cloned().collect());
            }
        }
    }

    let mut degree: HashMap<usize, usize> = HashMap::new();
    for m in &members {
        for e in m.elements() {
            *degree.entry(e).or_default() += 1;
        }
    }
    let mut popular: Vec<(usize, usize)> = degree.into_iter().filter(|&(_, d)| d >= r).collect();
    popular.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (x, _) in popular {
        let x = SubsetMask::singleton(x);
        let link: Vec<SubsetMask> = members
            .iter()
            .filter(|m| x.is_subset(m))
            .map(|m| m.difference(&x))
            .collect();
        if let Some(found) = search(link, r, budget) {
            return Some(found.into_iter().map(|m| m.union(&x)).collect());
        }
        if *budget == 0 {
            return None;
        }
    }

    let mut chosen = Vec::with_capacity(r);
    disjoint_search(&members, 0, r, &mut chosen, budget)
        .then(|| chosen.into_iter().cloned().collect())
}

fn disjoint_search<'a>(
    members: &'a [SubsetMask],
    start: usize,
    r: usize,
    chosen: &mut Vec<&'a SubsetMask>,
    budget: &mut usize,
) -> bool {
    if chosen.len() == r {
        return true;
    }
    for i in start..members.len() {
        if *budget == 0 || members.len() - i < r - chosen.len() {
            return false;
        }
        *budget -= 1;
        if chosen.iter().all(|c| c.is_disjoint(&members[i])) {
            chosen.push(&members[i]);
            if disjoint_search(members, i + 1, r, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionCase {
    /// `ℓ = 1` and `(1−p)^|family| < ε`.
    Base,
    /// Every member was consumed by the link: `{∅}`, trivially robust.
    Exhausted,
    /// Not `r`-spread; recursed on the link of the witness.
    NotSpread,
    /// `r`-spread; the family is returned whole.
    Spread,
}

/// One level of the extraction recursion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub depth: usize,
    pub l: usize,
    pub family_size: usize,
    /// `B·ln(ℓ/ε)/p`, absent at levels that do not test spreadness.
    pub r: Option<f64>,
    pub case: ExtractionCase,
    pub t: Option<SubsetMask>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustSunflowerResult {
    pub subfamily: SetFamily,
    pub kernel: SubsetMask,
    pub verified: bool,
    /// False when a sampled verification landed inside its confidence band.
    pub decided: bool,
    pub probability: ProbabilityRecord,
    pub recursion_trace: Vec<TraceStep>,
}

/// Extracts a `(p, ε)`-robust sunflower from an `ℓ`-uniform family by the
/// spread/link recursion, then verifies the output with `engine`.
///
/// A failed verification is reported through `verified`, not as an error:
/// it means the chosen `B` was too small for this instance.
pub fn extract_robust_sunflower(
    family: &SetFamily,
    p: &Rational,
    eps: &Rational,
    params: &ThresholdParams,
    engine: &Engine,
) -> Result<RobustSunflowerResult> {
    let open_unit = |x: &Rational, name: &str| {
        if *x > Rational::zero() && *x < Rational::one() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} = {x} must lie in (0, 1)")))
        }
    };
    open_unit(p, "p")?;
    open_unit(eps, "ε")?;
    let l = family.uniformity().ok_or(if family.is_empty() {
        Error::EmptyFamily
    } else {
        Error::NotUniform(family.members()[0].len())
    })?;
    if l == 0 {
        return Err(Error::invalid("extraction needs ℓ ≥ 1"));
    }

    let mut trace = Vec::new();
    let subfamily = extract(family, l, p, eps, params, 0, &mut trace)?;
    let kernel = subfamily.core()?;
    let query = CoverageQuery::for_family(&subfamily, &kernel, p.clone())?;
    let probability = engine.evaluate(&query)?;
    let verdict = exceeds(&probability, eps);
    Ok(RobustSunflowerResult {
        subfamily,
        kernel,
        verified: verdict == Some(true),
        decided: verdict.is_some(),
        probability,
        recursion_trace: trace,
    })
}

fn extract(
    family: &SetFamily,
    l: usize,
    p: &Rational,
    eps: &Rational,
    params: &ThresholdParams,
    depth: usize,
    trace: &mut Vec<TraceStep>,
) -> Result<SetFamily> {
    let mut step = TraceStep {
        depth,
        l,
        family_size: family.len(),
        r: None,
        case: ExtractionCase::Exhausted,
        t: None,
    };
    if l == 0 {
        trace.push(step);
        return Ok(family.clone());
    }
    if l == 1 {
        let miss = rational::pow(&(Rational::one() - p), family.len());
        if miss < *eps {
            step.case = ExtractionCase::Base;
            trace.push(step);
            return Ok(family.clone());
        }
        return Err(Error::BaseCaseFailed {
            bias: rational::to_f64(p),
            size: family.len(),
            eps: rational::to_f64(eps),
        });
    }
    let r = params.spread_parameter(l, rational::to_f64(p), rational::to_f64(eps));
    step.r = Some(r);
    let report = family.check_spread(r)?;
    match report.witness {
        Some(t) => {
            step.case = ExtractionCase::NotSpread;
            step.t = Some(t.clone());
            trace.push(step);
            let inner = extract(
                &family.link(&t),
                l - t.len(),
                p,
                eps,
                params,
                depth + 1,
                trace,
            )?;
            Ok(inner.lift(&t))
        }
        None => {
            step.case = ExtractionCase::Spread;
            trace.push(step);
            Ok(family.clone())
        }
    }
}
