use serde::Serialize;

use super::circuit::EXPANSION_CAP;
use super::poly::{Monomial, Polynomial};
use super::{max_pairwise_agreement, Code};
use crate::error::{Error, Result};

/// `P = Σ g_i·h_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub pairs: Vec<(Polynomial, Polynomial)>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Adds the `g` factor of pair `b` onto pair `a` and drops pair `b`,
    /// giving a candidate with one fewer summand.
    pub fn merge_g(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.len() || b >= self.len() {
            return Err(Error::invalid(format!(
                "cannot merge pairs {a} and {b} of {}",
                self.len()
            )));
        }
        let mut pairs = self.pairs.clone();
        let (gb, _) = pairs[b].clone();
        pairs[a].0 = pairs[a].0.add(&gb);
        pairs.remove(b);
        Ok(Self { pairs })
    }
}

/// Factor degrees allowed for a degree-`d` product: `d/3 ≤ deg ≤ 2d/3 − 1`,
/// i.e. `⌈d/3⌉ ..= ⌊(2d − 3)/3⌋`. `None` when the window is empty.
pub fn degree_window(d: usize) -> Option<(usize, usize)> {
    let lo = d.div_ceil(3);
    let hi = (2 * d).checked_sub(3)? / 3;
    (lo <= hi).then_some((lo, hi))
}

/// Smallest prefix length `s ≥ ⌈d/3⌉` with both `s` and `d − s` in the window.
pub fn canonical_split(d: usize) -> Result<usize> {
    let (lo, hi) = degree_window(d)
        .ok_or_else(|| Error::invalid(format!("no factor degrees fit degree {d}")))?;
    (lo..=hi)
        .find(|&s| (lo..=hi).contains(&(d - s)))
        .ok_or_else(|| {
            Error::invalid(format!(
                "degree {d} has no split with both parts in [{lo}, {hi}]"
            ))
        })
}

/// Splits every monomial of `p` into its first `s` columns and the rest, with
/// `s` from [`canonical_split`]. Each monomial must use one variable per column.
pub fn canonical_decomposition(p: &Polynomial) -> Result<Decomposition> {
    let s = canonical_split(p.n)?;
    let mut pairs = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let columns: Vec<usize> = m.vars().iter().map(|&v| p.var_pair(v).1).collect();
        let mut sorted = columns.clone();
        sorted.sort_unstable();
        if sorted != (1..=p.n).collect::<Vec<_>>() {
            return Err(Error::invalid(format!(
                "monomial {m} does not use each column once"
            )));
        }
        let prefix = Monomial::from_vars(
            m.vars()
                .iter()
                .zip(&columns)
                .filter(|(_, &j)| j <= s)
                .map(|(&v, _)| v),
        );
        let suffix = Monomial::from_vars(
            m.vars()
                .iter()
                .zip(&columns)
                .filter(|(_, &j)| j > s)
                .map(|(&v, _)| v),
        );
        pairs.push((
            Polynomial::from_terms(p.q, p.n, [(prefix, c.clone())]),
            Polynomial::from_terms(p.q, p.n, [(suffix, num_traits::One::one())]),
        ));
    }
    Ok(Decomposition { pairs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    G,
    H,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ShapeMismatch {
        pair: usize,
    },
    NotHomogeneous {
        pair: usize,
        side: Side,
    },
    NotMultilinear {
        pair: usize,
        side: Side,
    },
    NonPositiveCoefficient {
        pair: usize,
        side: Side,
    },
    DegreeOutOfWindow {
        pair: usize,
        side: Side,
        degree: usize,
        lo: usize,
        hi: usize,
    },
    SharedVariable {
        pair: usize,
        i: usize,
        j: usize,
    },
    SumMismatch {
        monomial: Monomial,
        expected: String,
        found: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub valid: bool,
    pub violation: Option<Violation>,
    pub summands: usize,
}

fn check_pair(
    k: usize,
    g: &Polynomial,
    h: &Polynomial,
    p: &Polynomial,
    window: Option<(usize, usize)>,
) -> Option<Violation> {
    if (g.q, g.n) != (p.q, p.n) || (h.q, h.n) != (p.q, p.n) {
        return Some(Violation::ShapeMismatch { pair: k });
    }
    for (side, f) in [(Side::G, g), (Side::H, h)] {
        if !f.is_homogeneous() {
            return Some(Violation::NotHomogeneous { pair: k, side });
        }
        if !f.is_multilinear() {
            return Some(Violation::NotMultilinear { pair: k, side });
        }
        if !f.all_positive() {
            return Some(Violation::NonPositiveCoefficient { pair: k, side });
        }
        if let Some(degree) = f.homogeneous_degree() {
            match window {
                Some((lo, hi)) if (lo..=hi).contains(&degree) => {}
                _ => {
                    let (lo, hi) = window.unwrap_or((1, 0));
                    return Some(Violation::DegreeOutOfWindow {
                        pair: k,
                        side,
                        degree,
                        lo,
                        hi,
                    });
                }
            }
        }
    }
    let shared = g.variables().intersection(&h.variables());
    if let Some(v) = shared.elements().next() {
        let (i, j) = p.var_pair((v - 1) as u32);
        return Some(Violation::SharedVariable { pair: k, i, j });
    }
    None
}

/// Checks every pair's shape against a degree-`d` target and that the products
/// sum to `p` coefficient by coefficient.
pub fn verify_decomposition(
    decomposition: &Decomposition,
    p: &Polynomial,
    d: usize,
) -> Result<DecompositionCheck> {
    let window = degree_window(d);
    let summands = decomposition.len();
    let fail = |violation| {
        Ok(DecompositionCheck {
            valid: false,
            violation: Some(violation),
            summands,
        })
    };
    for (k, (g, h)) in decomposition.pairs.iter().enumerate() {
        if let Some(v) = check_pair(k, g, h, p, window) {
            return fail(v);
        }
    }
    let mut total = Polynomial::zero(p.q, p.n);
    let mut budget = EXPANSION_CAP;
    for (g, h) in &decomposition.pairs {
        let product = g.mul(h, budget)?;
        budget = budget.saturating_sub(g.len() * h.len());
        total = total.add(&product);
    }
    let mismatch = total
        .terms()
        .keys()
        .chain(p.terms().keys())
        .find(|m| total.coefficient(m) != p.coefficient(m))
        .cloned();
    if let Some(monomial) = mismatch {
        let (expected, found) = (
            p.coefficient(&monomial).to_string(),
            total.coefficient(&monomial).to_string(),
        );
        return fail(Violation::SumMismatch {
            monomial,
            expected,
            found,
        });
    }
    Ok(DecompositionCheck {
        valid: true,
        violation: None,
        summands,
    })
}

/// Two distinct monomials `α, β` of one factor times a monomial `γ` of the
/// other: the products share every variable of `γ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditCounterexample {
    pub pair: usize,
    pub side: Side,
    pub alpha: Monomial,
    pub beta: Monomial,
    pub gamma: Monomial,
    pub alpha_gamma: Monomial,
    pub beta_gamma: Monomial,
    pub overlap: usize,
    /// The overlap exceeds the agreement bound supplied to the audit.
    pub exceeds_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub single_monomial: bool,
    pub counterexample: Option<AuditCounterexample>,
}

/// Whether every factor is a single monomial; otherwise exhibits the first
/// pair with a multi-monomial factor and the overlapping products it forces.
pub fn single_monomial_audit(decomposition: &Decomposition, agreement_bound: usize) -> AuditReport {
    for (k, (g, h)) in decomposition.pairs.iter().enumerate() {
        for (side, multi, other) in [(Side::G, g, h), (Side::H, h, g)] {
            if multi.len() < 2 {
                continue;
            }
            let mut ms = multi.monomials();
            let (alpha, beta) = (ms.next().unwrap().clone(), ms.next().unwrap().clone());
            let Some(gamma) = other.monomials().next().cloned() else {
                continue;
            };
            let (alpha_gamma, beta_gamma) = (alpha.mul(&gamma), beta.mul(&gamma));
            let overlap = alpha_gamma
                .support()
                .intersection(&beta_gamma.support())
                .len();
            return AuditReport {
                single_monomial: false,
                counterexample: Some(AuditCounterexample {
                    pair: k,
                    side,
                    alpha,
                    beta,
                    gamma,
                    alpha_gamma,
                    beta_gamma,
                    overlap,
                    exceeds_bound: overlap > agreement_bound,
                }),
            };
        }
    }
    AuditReport {
        single_monomial: true,
        counterexample: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeReport {
    pub summands: usize,
    pub code_size: usize,
    pub agreement: Option<usize>,
    /// Every two codewords agree on at most `n/3 − 1` coordinates.
    pub distance_ok: bool,
    pub valid: bool,
    pub single_monomial: bool,
    /// `summands ≥ |C|`.
    pub pass: bool,
}

/// Compares the number of summands of a decomposition of `P_C` with `|C|`.
pub fn size_lower_bound_report(code: &Code, decomposition: &Decomposition) -> Result<SizeReport> {
    let agreement = if code.len() >= 2 {
        Some(max_pairwise_agreement(code)?)
    } else {
        None
    };
    let distance_ok = agreement.is_none_or(|a| 3 * (a + 1) <= code.n());
    let p = super::build_polynomial(code);
    let check = verify_decomposition(decomposition, &p, code.n())?;
    let audit = single_monomial_audit(decomposition, agreement.unwrap_or(0));
    Ok(SizeReport {
        summands: decomposition.len(),
        code_size: code.len(),
        agreement,
        distance_ok,
        valid: check.valid,
        single_monomial: audit.single_monomial,
        pass: decomposition.len() >= code.len(),
    })
}
