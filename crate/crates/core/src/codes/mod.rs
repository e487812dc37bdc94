//! Codes over prime fields, the multilinear polynomial `P_C` with one monomial
//! per codeword, monotone arithmetic circuits, and product decompositions.

mod circuit;
mod decomposition;
mod poly;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harnik_raz::is_prime;
use crate::rational::Rational;

pub use circuit::{circuit_to_monomials, ArithCircuit, ArithGate, Expansion, GateShape};
pub use decomposition::{
    canonical_decomposition, canonical_split, degree_window, single_monomial_audit,
    size_lower_bound_report, verify_decomposition, AuditCounterexample, AuditReport, Decomposition,
    DecompositionCheck, SizeReport, Violation,
};
pub use poly::{Monomial, Polynomial, MAX_VARIABLES};

/// Cap on the number of codewords any construction will materialize.
pub const CODEWORD_CAP: usize = 1 << 20;
/// Cap on the codes `max_pairwise_agreement` will scan.
pub const AGREEMENT_CAP: usize = 1 << 14;

/// A set of distinct words in `F_q^n`, `q` prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Code {
    q: usize,
    n: usize,
    codewords: Vec<Vec<u32>>,
}

impl Code {
    pub fn new(q: usize, n: usize, codewords: Vec<Vec<u32>>) -> Result<Self> {
        if !is_prime(q as u64) {
            return Err(Error::invalid(format!("alphabet size {q} is not prime")));
        }
        if n == 0 || q.saturating_mul(n) > MAX_VARIABLES {
            return Err(Error::invalid(format!(
                "block length {n} outside 1..={}",
                MAX_VARIABLES / q
            )));
        }
        if codewords.len() > CODEWORD_CAP {
            return Err(Error::TooLarge {
                what: "code".into(),
                size: codewords.len(),
                cap: CODEWORD_CAP,
            });
        }
        let mut seen = HashSet::new();
        for (r, w) in codewords.iter().enumerate() {
            if w.len() != n {
                return Err(Error::invalid(format!(
                    "codeword {r} has length {}, expected {n}",
                    w.len()
                )));
            }
            if let Some(&x) = w.iter().find(|&&x| x as usize >= q) {
                return Err(Error::invalid(format!(
                    "codeword {r} has symbol {x} outside F_{q}"
                )));
            }
            if !seen.insert(w) {
                return Err(Error::invalid(format!("codeword {r} is repeated")));
            }
        }
        Ok(Self { q, n, codewords })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codewords(&self) -> &[Vec<u32>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// One row of comma-separated symbols per codeword.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for word in &self.codewords {
            w.serialize(word).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
    }

    /// Parses rows of symbols; `#` lines are comments. The block length is the
    /// width of the first row.
    pub fn from_csv(q: usize, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut words = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = |r: &csv::StringRecord| r.position().map_or(row + 1, |p| p.line() as usize);
            let record = record.map_err(|e| Error::parse(row + 1, e.to_string()))?;
            if words.len() >= CODEWORD_CAP {
                return Err(Error::parse(
                    line(&record),
                    format!("more than {CODEWORD_CAP} codewords"),
                ));
            }
            let word = record
                .iter()
                .map(|f| {
                    f.parse::<u32>()
                        .map_err(|_| Error::parse(line(&record), format!("bad symbol `{f}`")))
                })
                .collect::<Result<Vec<u32>>>()?;
            words.push(word);
        }
        let n = words.first().map_or(0, Vec::len);
        Self::new(q, n, words).map_err(|e| Error::parse(0, e.to_string()))
    }
}

/// Number of coordinates where `a` and `b` hold the same symbol.
pub fn agreement(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

/// Reed–Solomon code: evaluations at `0, …, n−1` of every polynomial of degree `< dim` over `F_q`.
pub fn reed_solomon_code(q: usize, n: usize, dim: usize) -> Result<Code> {
    if !is_prime(q as u64) {
        return Err(Error::invalid(format!("alphabet size {q} is not prime")));
    }
    if n == 0 || n > q || dim == 0 || dim > n {
        return Err(Error::invalid(format!(
            "need 1 ≤ dim ≤ n ≤ q, got q={q}, n={n}, dim={dim}"
        )));
    }
    let count = (q as u128).pow(dim as u32);
    if count > CODEWORD_CAP as u128 {
        return Err(Error::TooLarge {
            what: "Reed–Solomon code".into(),
            size: usize::try_from(count).unwrap_or(usize::MAX),
            cap: CODEWORD_CAP,
        });
    }
    let words = (0..count as u64)
        .map(|mut index| {
            let coefficients: Vec<u64> = (0..dim)
                .map(|_| {
                    let d = index % q as u64;
                    index /= q as u64;
                    d
                })
                .collect();
            (0..n as u64)
                .map(|x| {
                    coefficients
                        .iter()
                        .rev()
                        .fold(0u64, |acc, &a| (acc * x + a) % q as u64) as u32
                })
                .collect()
        })
        .collect();
    Code::new(q, n, words)
}

/// Largest agreement between two distinct codewords.
pub fn max_pairwise_agreement(code: &Code) -> Result<usize> {
    let words = code.codewords();
    if words.len() < 2 {
        return Err(Error::invalid("agreement needs at least two codewords"));
    }
    if words.len() > AGREEMENT_CAP {
        return Err(Error::TooLarge {
            what: "agreement scan".into(),
            size: words.len(),
            cap: AGREEMENT_CAP,
        });
    }
    Ok((0..words.len())
        .into_par_iter()
        .map(|r| {
            words[r + 1..]
                .iter()
                .map(|w| agreement(&words[r], w))
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0))
}

/// `P_C = Σ_{c ∈ C} Π_j x_{c(j)+1, j}`.
pub fn build_polynomial(code: &Code) -> Polynomial {
    let (q, n) = (code.q(), code.n());
    let monomial =
        |w: &Vec<u32>| Monomial::from_vars(w.iter().enumerate().map(|(j, &s)| (j * q) as u32 + s));
    Polynomial::from_terms(
        q,
        n,
        code.codewords()
            .iter()
            .map(|w| (monomial(w), Rational::from_integer(1.into()))),
    )
}
