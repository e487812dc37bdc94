use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::graph::{clique_edges, edge_count, Graph};
use crate::error::{Error, Result};
use crate::family::{SetFamily, MAX_UNIVERSE};
use crate::mask::SubsetMask;
use crate::monotone::{small_sets, MonotoneFunction, MINTERM_CAP, SCAN_CAP};
use crate::probability::{exceeds, CoverageQuery, Engine, ProbabilityRecord};
use crate::rational::{self, Rational};

/// A clique-shaped monotone function `⋁ ⌈K_{A_i}⌉` over the edge variables of
/// a graph on `[n]`, stored as the antichain of vertex sets `A_i`.
///
/// Any `A_i` with `|A_i| ≤ 1` makes the function constant 1; it is then
/// stored as the single set `∅`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CliqueFunction {
    sets: SetFamily,
}

impl CliqueFunction {
    pub fn from_sets<I: IntoIterator<Item = SubsetMask>>(n: usize, sets: I) -> Result<Self> {
        let sets = SetFamily::new(n, sets)?;
        if sets.iter().any(|a| a.len() <= 1) {
            return Self::one(n);
        }
        Ok(Self {
            sets: sets.minimize(),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Ok(Self {
            sets: SetFamily::empty(n)?,
        })
    }

    pub fn one(n: usize) -> Result<Self> {
        Ok(Self {
            sets: SetFamily::new(n, [SubsetMask::empty()])?,
        })
    }

    /// `⌈K_A⌉`.
    pub fn indicator(n: usize, a: SubsetMask) -> Result<Self> {
        Self::from_sets(n, [a])
    }

    /// The edge variable `x_{u,v}`.
    pub fn edge(n: usize, u: usize, v: usize) -> Result<Self> {
        if u == v {
            return Err(Error::invalid(format!("{{{u}, {v}}} is a loop")));
        }
        Self::indicator(n, SubsetMask::from_elements([u, v]))
    }

    pub fn n(&self) -> usize {
        self.sets.n()
    }

    /// The vertex sets whose cliques are the minterms.
    pub fn sets(&self) -> &SetFamily {
        &self.sets
    }

    pub fn is_zero(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.sets
            .members()
            .first()
            .is_some_and(SubsetMask::is_empty)
    }

    pub fn eval(&self, g: &Graph) -> bool {
        self.sets.iter().any(|a| g.contains_clique(a))
    }

    /// `f(K_A)`; on clique inputs containment of cliques is containment of vertex sets.
    pub fn eval_clique(&self, a: &SubsetMask) -> bool {
        self.sets.iter().any(|b| b.is_subset(a))
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        Self::from_sets(self.n(), self.sets.iter().chain(other.sets.iter()).cloned())
    }

    /// `⋁_{i,j} ⌈K_{A_i ∪ B_j}⌉`: below `f ∧ g` and equal to it on every clique input.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let count = self.sets.len() * other.sets.len();
        if count > MINTERM_CAP {
            return Err(Error::TooLarge {
                what: "wedge".into(),
                size: count,
                cap: MINTERM_CAP,
            });
        }
        let unions = self
            .sets
            .iter()
            .flat_map(|a| other.sets.iter().map(move |b| a.union(b)));
        Self::from_sets(self.n().max(other.n()), unions)
    }

    /// Drops the clique-minterms larger than `w`; constant 1 survives any `w ≥ 1`.
    pub fn trim(&self, w: usize) -> Self {
        Self {
            sets: self.sets.filter(|a| a.len() <= w.max(1)),
        }
    }

    /// Clique-minterms with exactly `l` vertices.
    pub fn minterms_of_size(&self, l: usize) -> SetFamily {
        self.sets.filter(|a| a.len() == l)
    }

    /// The same function as a minterm antichain over the `C(n, 2)` edge variables.
    pub fn to_monotone(&self) -> Result<MonotoneFunction> {
        let edges = edge_count(self.n());
        if edges > MAX_UNIVERSE {
            return Err(Error::TooLarge {
                what: "edge universe".into(),
                size: edges,
                cap: MAX_UNIVERSE,
            });
        }
        MonotoneFunction::from_sets(edges.max(1), self.sets.iter().map(clique_edges))
    }
}

impl fmt::Debug for CliqueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CliqueFunction(n={}, ", self.n())?;
        f.debug_list().entries(self.sets.iter()).finish()?;
        f.write_str(")")
    }
}

fn sets_of_size(n: usize, l: usize) -> Result<Vec<SubsetMask>> {
    let count: u128 = rational::binomial(n as u64, l as u64)
        .try_into()
        .unwrap_or(u128::MAX);
    if count > SCAN_CAP as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: SCAN_CAP as u128,
        });
    }
    Ok(small_sets(n, l)?
        .into_iter()
        .filter(|a| a.len() == l)
        .collect())
}

/// Every `A ∈ C([n], l)` with `f(K_A) = 1` and `f(K_{A∖{a}}) = 0` for all `a ∈ A`,
/// where `f` is any monotone function over the edge variables.
pub fn clique_minterms(f: &MonotoneFunction, n: usize, l: usize) -> Result<SetFamily> {
    let accepts = |a: &SubsetMask| f.eval(&clique_edges(a));
    let sets = sets_of_size(n, l)?.into_iter().filter(|a| {
        accepts(a)
            && a.elements()
                .all(|v| !accepts(&a.difference(&SubsetMask::singleton(v))))
    });
    SetFamily::new(n, sets)
}

/// Parameters of clique closedness: for every `2 ≤ |A| ≤ max_size`,
/// `Pr[f(G(n,p) ∨ K_A) = 1] > 1 − ε ⇒ f(K_A) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueClosureParams {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub eps: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub p: Rational,
    /// `δk`.
    pub max_size: usize,
    /// `δk/2`.
    pub trim_width: usize,
}

impl CliqueClosureParams {
    pub fn new(eps: Rational, p: Rational, max_size: usize, trim_width: usize) -> Result<Self> {
        let open = |x: &Rational| *x > Rational::zero() && *x < Rational::one();
        if !open(&eps) || !open(&p) {
            return Err(Error::invalid(format!(
                "ε = {eps} and p = {p} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            eps,
            p,
            max_size,
            trim_width,
        })
    }
}

/// `Pr[f(G(n,p) ∨ K_A) = 1]`.
pub fn clique_acceptance_under_noise(
    f: &CliqueFunction,
    a: &SubsetMask,
    p: &Rational,
    engine: &Engine,
) -> Result<ProbabilityRecord> {
    let members = f.sets().iter().map(clique_edges).collect();
    engine.evaluate(&CoverageQuery::new(members, clique_edges(a), p.clone())?)
}

fn find_clique_violation(
    f: &CliqueFunction,
    candidates: &[SubsetMask],
    params: &CliqueClosureParams,
    engine: &Engine,
) -> Result<Option<SubsetMask>> {
    for a in candidates {
        if f.eval_clique(a) {
            continue;
        }
        let record = clique_acceptance_under_noise(f, a, &params.p, engine)?;
        match exceeds(&record, &params.eps) {
            Some(true) => return Ok(Some(a.clone())),
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

fn clique_candidates(n: usize, max_size: usize) -> Result<Vec<SubsetMask>> {
    Ok(small_sets(n, max_size)?
        .into_iter()
        .filter(|a| a.len() >= 2)
        .collect())
}

pub fn is_clique_closed(
    f: &CliqueFunction,
    params: &CliqueClosureParams,
    engine: &Engine,
) -> Result<bool> {
    let candidates = clique_candidates(f.n(), params.max_size)?;
    Ok(find_clique_violation(f, &candidates, params, engine)?.is_none())
}

/// Closure over clique inputs `K_A` with `|A| ∈ {2, …, max_size}`, scanned in
/// canonical order and restarted after every addition.
pub fn clique_closure(
    f: &CliqueFunction,
    params: &CliqueClosureParams,
    engine: &Engine,
) -> Result<CliqueFunction> {
    let candidates = clique_candidates(f.n(), params.max_size)?;
    let mut current = f.clone();
    while let Some(a) = find_clique_violation(&current, &candidates, params, engine)? {
        current = current.or(&CliqueFunction::indicator(f.n(), a)?)?;
    }
    Ok(current)
}

pub fn clique_trim(f: &CliqueFunction, params: &CliqueClosureParams) -> CliqueFunction {
    f.trim(params.trim_width)
}

/// `f ⊔ g = trim(cl(f ∨ g))`.
pub fn clique_approx_or(
    f: &CliqueFunction,
    g: &CliqueFunction,
    params: &CliqueClosureParams,
    engine: &Engine,
) -> Result<CliqueFunction> {
    Ok(clique_trim(
        &clique_closure(&f.or(g)?, params, engine)?,
        params,
    ))
}

/// `f ⊓ g = trim(cl(wedge(f, g)))`.
pub fn clique_approx_and(
    f: &CliqueFunction,
    g: &CliqueFunction,
    params: &CliqueClosureParams,
    engine: &Engine,
) -> Result<CliqueFunction> {
    Ok(clique_trim(
        &clique_closure(&f.wedge(g)?, params, engine)?,
        params,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueMintermCount {
    pub l: usize,
    pub count: usize,
    /// `n^{2l/3}`.
    pub bound: f64,
    pub holds: bool,
}

/// `|M_l(f)|` against `n^{2l/3}` for `l ∈ {2, …, max_size}`; meaningful only
/// in the asymptotic parameter regime, so callers report it.
pub fn clique_minterm_bound_check(f: &CliqueFunction, max_size: usize) -> Vec<CliqueMintermCount> {
    let n = f.n() as f64;
    (2..=max_size)
        .map(|l| {
            let count = f.minterms_of_size(l).len();
            let bound = n.powf(2.0 * l as f64 / 3.0);
            CliqueMintermCount {
                l,
                count,
                bound,
                holds: count as f64 <= bound,
            }
        })
        .collect()
}
