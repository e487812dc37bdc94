//! The Harnik–Raz function: a DNF over the value sets `S_P = {P(1), …, P(k)}`
//! of low-degree polynomials over `F_n`, with its two test distributions.
//!
//! Field residues map to ground-set elements by `0 ↦ n`, identity otherwise.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use serde::Serialize;

use crate::check::{BoundCheck, Relation};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::monotone::{MonotoneFunction, TestDistribution};
use crate::probability::{
    sample_p_subset, CoverageQuery, Engine, Estimate, McConfig, PBiasedParams, ProbabilityRecord,
};
use crate::probability::{stream_rng, wilson_half_width, ExactProbability};
use crate::rational::{self, Rational};

/// Cap on the number `n^c` of polynomials enumerated exactly.
pub const POLY_CAP: u64 = 1 << 22;

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HRParams {
    pub n: u64,
    pub c: u32,
    pub k: u64,
}

impl HRParams {
    pub fn new(n: u64, c: u32, k: u64) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::invalid(format!("n = {n} is not prime")));
        }
        if !(c >= 1 && (c as u64) < k && k < n) {
            return Err(Error::invalid(format!(
                "need 1 ≤ c < k < n, got c={c}, k={k}, n={n}"
            )));
        }
        if n as usize > crate::family::MAX_UNIVERSE {
            return Err(Error::invalid(format!(
                "n = {n} exceeds the largest ground set"
            )));
        }
        Ok(Self { n, c, k })
    }

    /// `n^c`, or `None` on overflow.
    pub fn polynomial_count(&self) -> Option<u64> {
        self.n.checked_pow(self.c)
    }

    /// Minimum size of a qualifying value set: `⌈k/2⌉`.
    pub fn min_size(&self) -> usize {
        self.k.div_ceil(2) as usize
    }

    fn enumerable(&self) -> Result<u64> {
        match self.polynomial_count() {
            Some(count) if count <= POLY_CAP => Ok(count),
            other => Err(Error::EnumerationTooLarge {
                count: other.map_or(u128::MAX, u128::from),
                cap: POLY_CAP as u128,
            }),
        }
    }
}

/// A polynomial of degree `< c` over `F_n`; `coefficients[i]` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldPoly {
    pub coefficients: Vec<u64>,
}

impl FieldPoly {
    /// The `index`-th polynomial in base-`n` digit order.
    pub fn from_index(mut index: u64, n: u64, c: u32) -> Self {
        let coefficients = (0..c)
            .map(|_| {
                let d = index % n;
                index /= n;
                d
            })
            .collect();
        Self { coefficients }
    }

    pub fn random<R: Rng + ?Sized>(n: u64, c: u32, rng: &mut R) -> Self {
        Self {
            coefficients: (0..c).map(|_| rng.random_range(0..n)).collect(),
        }
    }

    pub fn eval(&self, x: u64, n: u64) -> u64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0u64, |acc, &a| (acc * x + a) % n)
    }
}

fn element(residue: u64, n: u64) -> usize {
    if residue == 0 {
        n as usize
    } else {
        residue as usize
    }
}

/// `S_P = {P(1), …, P(k)}` as a subset of `[n]`.
pub fn eval_poly_points(poly: &FieldPoly, k: u64, n: u64) -> SubsetMask {
    (1..=k).map(|x| element(poly.eval(x, n), n)).collect()
}

/// The Harnik–Raz family with its construction statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HRFamily {
    pub params: HRParams,
    /// Distinct qualifying value sets, minimized to an antichain.
    pub family: SetFamily,
    /// Polynomials whose value set has at least `⌈k/2⌉` elements.
    pub qualifying_polynomials: u64,
    /// Distinct qualifying value sets before minimization.
    pub distinct_sets: usize,
}

fn for_each_poly(params: &HRParams, mut visit: impl FnMut(&FieldPoly, SubsetMask)) -> Result<u64> {
    let count = params.enumerable()?;
    for index in 0..count {
        let poly = FieldPoly::from_index(index, params.n, params.c);
        let s = eval_poly_points(&poly, params.k, params.n);
        visit(&poly, s);
    }
    Ok(count)
}

pub fn build_hr_family(params: &HRParams) -> Result<HRFamily> {
    let mut sets = Vec::new();
    let mut qualifying = 0;
    for_each_poly(params, |_, s| {
        if s.len() >= params.min_size() {
            qualifying += 1;
            sets.push(s);
        }
    })?;
    let full = SetFamily::new(params.n as usize, sets)?;
    let distinct_sets = full.len();
    Ok(HRFamily {
        params: *params,
        family: full.minimize(),
        qualifying_polynomials: qualifying,
        distinct_sets,
    })
}

impl HRFamily {
    pub fn eval(&self, x: &SubsetMask) -> bool {
        self.family.iter().any(|m| m.is_subset(x))
    }

    pub fn function(&self) -> MonotoneFunction {
        MonotoneFunction::from_family(&self.family)
    }

    /// `x_{S_P}` for a uniformly random polynomial of degree `< c`.
    pub fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> SubsetMask {
        let p = &self.params;
        eval_poly_points(&FieldPoly::random(p.n, p.c, rng), p.k, p.n)
    }

    /// A uniformly random subset of `[n]`.
    pub fn sample_negative<R: Rng + ?Sized>(&self, rng: &mut R) -> SubsetMask {
        sample_p_subset(
            &PBiasedParams {
                p: 0.5,
                n: self.params.n as usize,
            },
            rng,
        )
    }
}

/// DNF evaluation of `f_HR`.
pub fn eval_hr(hr: &HRFamily, x: &SubsetMask) -> bool {
    hr.eval(x)
}

/// The positive test distribution as exact point weights.
pub fn positive_distribution(params: &HRParams) -> Result<TestDistribution> {
    let mut counts: BTreeMap<SubsetMask, u64> = BTreeMap::new();
    let total = for_each_poly(params, |_, s| *counts.entry(s).or_default() += 1)?;
    Ok(TestDistribution::Weighted(
        counts
            .into_iter()
            .map(|(s, c)| (s, Rational::new(BigInt::from(c), BigInt::from(total))))
            .collect(),
    ))
}

fn positive_mc(
    hr: &HRFamily,
    config: &McConfig,
    event: impl Fn(&SubsetMask) -> bool,
) -> Result<Estimate> {
    if config.samples < 100 || !(config.confidence > 0.0 && config.confidence < 1.0) {
        return Err(Error::invalid(
            "need at least 100 samples and confidence in (0, 1)",
        ));
    }
    let mut rng = stream_rng(config.seed, 0);
    let hits = (0..config.samples)
        .filter(|_| event(&hr.sample_positive(&mut rng)))
        .count() as u64;
    Ok(Estimate {
        value: hits as f64 / config.samples as f64,
        half_width: wilson_half_width(hits, config.samples, config.confidence),
        confidence: config.confidence,
        samples: config.samples,
        seed: config.seed,
    })
}

/// Probability of `event` under the positive distribution, exact by
/// enumeration or sampled, per `engine`.
fn positive_probability(
    hr: &HRFamily,
    engine: &Engine,
    event: impl Fn(&SubsetMask) -> bool,
) -> Result<ProbabilityRecord> {
    let exact = || -> Result<ProbabilityRecord> {
        let mut hits = 0u64;
        let total = for_each_poly(&hr.params, |_, s| hits += u64::from(event(&s)))?;
        Ok(ProbabilityRecord::Exact(ExactProbability::new(
            Rational::new(hits.into(), total.into()),
        )))
    };
    match engine {
        Engine::Exact { .. } => exact(),
        Engine::MonteCarlo(config) => Ok(ProbabilityRecord::MonteCarlo(positive_mc(
            hr, config, &event,
        )?)),
        Engine::Auto { fallback, .. } => match exact() {
            Err(Error::EnumerationTooLarge { .. }) => Ok(ProbabilityRecord::MonteCarlo(
                positive_mc(hr, fallback, &event)?,
            )),
            other => other,
        },
    }
}

/// `Pr[f(Y) = 1] ≥ 1 − (k−1)/n`.
pub fn verify_lemma_positive(hr: &HRFamily, engine: &Engine) -> Result<BoundCheck> {
    let p = &hr.params;
    let value = positive_probability(hr, engine, |s| hr.eval(s))?;
    let bound = Rational::one() - Rational::new(BigInt::from(p.k - 1), BigInt::from(p.n));
    Ok(BoundCheck::new(
        value,
        Relation::AtLeast,
        rational::to_f64(&bound),
        Some(bound),
    ))
}

/// `Pr[f(N) = 0] ≥ 1 − 2^{−(k/2 − c·log₂ n)}`; vacuous unless `k/2 > c·log₂ n`.
pub fn verify_lemma_negative(hr: &HRFamily, engine: &Engine) -> Result<BoundCheck> {
    let p = &hr.params;
    let value = if hr.family.is_empty() {
        ProbabilityRecord::Exact(ExactProbability::new(Rational::one()))
    } else {
        let query =
            CoverageQuery::for_family(&hr.family, &SubsetMask::empty(), rational::ratio(1, 2))?;
        match engine.evaluate(&query)? {
            ProbabilityRecord::Exact(e) => {
                ProbabilityRecord::Exact(ExactProbability::new(Rational::one() - e.value))
            }
            ProbabilityRecord::MonteCarlo(e) => ProbabilityRecord::MonteCarlo(Estimate {
                value: 1.0 - e.value,
                ..e
            }),
        }
    };
    let exponent = p.k as f64 / 2.0 - p.c as f64 * (p.n as f64).log2();
    let bound = 1.0 - (-exponent).exp2();
    Ok(BoundCheck::new(value, Relation::AtLeast, bound, None))
}

/// `Pr[A ⊆ S_P] ≤ (k/n)^{|A|}` for `|A| ≤ c`.
pub fn verify_spread(hr: &HRFamily, a: &SubsetMask, engine: &Engine) -> Result<BoundCheck> {
    let p = &hr.params;
    if a.len() > p.c as usize || !a.fits_in(p.n as usize) {
        return Err(Error::invalid(format!(
            "{a} must be a subset of [n] of size at most c = {}",
            p.c
        )));
    }
    let value = positive_probability(hr, engine, |s| a.is_subset(s))?;
    let bound = rational::pow(&Rational::new(p.k.into(), p.n.into()), a.len());
    Ok(BoundCheck::new(
        value,
        Relation::AtMost,
        rational::to_f64(&bound),
        Some(bound),
    ))
}

/// `Pr[P(j₁) = a₁ ∧ … ∧ P(j_ℓ) = a_ℓ]` over uniform `P`, by enumeration.
pub fn cwise_probability(params: &HRParams, constraints: &[(u64, u64)]) -> Result<Rational> {
    if constraints.len() > params.c as usize {
        return Err(Error::invalid(format!(
            "{} constraints exceed c = {}",
            constraints.len(),
            params.c
        )));
    }
    for (i, &(j, a)) in constraints.iter().enumerate() {
        if j == 0 || j > params.k || a >= params.n {
            return Err(Error::invalid(format!(
                "constraint P({j}) = {a} outside [k] × F_n"
            )));
        }
        if constraints[..i].iter().any(|&(j2, _)| j2 == j) {
            return Err(Error::invalid(format!("point {j} constrained twice")));
        }
    }
    let mut hits = 0u64;
    let total = for_each_poly(params, |poly, _| {
        if constraints
            .iter()
            .all(|&(j, a)| poly.eval(j, params.n) == a)
        {
            hits += 1;
        }
    })?;
    Ok(Rational::new(hits.into(), total.into()))
}

/// `k = round(√n)`, `c = max(1, round(k / (18·B·ln n)))`, clamped to `c < k`.
pub fn default_hr_parameters(n: u64, b: f64) -> (u64, u32) {
    let k = ((n as f64).sqrt().round() as u64).max(2);
    let c = (k as f64 / (18.0 * b * (n as f64).ln())).round().max(1.0) as u64;
    (k, c.min(k - 1) as u32)
}

/// `Pr[f(Y) = 1] ≤ Σ_{ℓ=1}^{c/2} (k/n)^ℓ·|M_ℓ(f)|` for trimmed `f ≠ 1`.
pub fn trimmed_positive_bound(params: &HRParams, f: &MonotoneFunction) -> f64 {
    let ratio = params.k as f64 / params.n as f64;
    (1..=params.c as usize / 2)
        .map(|l| ratio.powi(l as i32) * f.minterms_of_size(l).len() as f64)
        .sum()
}
