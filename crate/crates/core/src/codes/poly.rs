use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::{self, Write};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::rational::Rational;

/// A product of variables `x_{i,j}` with `i ∈ [q]`, `j ∈ [n]`, stored as sorted
/// zero-based variable indices `(j−1)·q + (i−1)`, repeats allowed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_vars<I: IntoIterator<Item = u32>>(vars: I) -> Self {
        let mut v: Vec<u32> = vars.into_iter().collect();
        v.sort_unstable();
        Self(v)
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            if x <= y {
                v.push(x);
                a.next();
            } else {
                v.push(y);
                b.next();
            }
        }
        v.extend(a);
        v.extend(b);
        Self(v)
    }

    /// The set of variables, variable `v` at element `v + 1`.
    pub fn support(&self) -> SubsetMask {
        self.0.iter().map(|&v| v as usize + 1).collect()
    }
}

/// A polynomial over the `q·n` variables `x_{i,j}` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Polynomial {
    pub q: usize,
    pub n: usize,
    #[serde(serialize_with = "serialize_terms")]
    terms: BTreeMap<Monomial, Rational>,
}

fn serialize_terms<S: serde::Serializer>(
    terms: &BTreeMap<Monomial, Rational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(terms.iter().map(|(m, c)| (m, c.to_string())))
}

impl Polynomial {
    pub fn zero(q: usize, n: usize) -> Self {
        Self {
            q,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(q: usize, n: usize, c: Rational) -> Self {
        Self::from_terms(q, n, [(Monomial::one(), c)])
    }

    /// Sums the given terms, dropping zero coefficients.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(
        q: usize,
        n: usize,
        terms: I,
    ) -> Self {
        let mut p = Self::zero(q, n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn variable(q: usize, n: usize, i: usize, j: usize) -> Result<Self> {
        let v = var_index(q, n, i, j)?;
        Ok(Self::from_terms(
            q,
            n,
            [(Monomial(vec![v]), Rational::one())],
        ))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The common degree, `None` for the zero polynomial or mixed degrees.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_empty() || self.homogeneous_degree().is_some()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    pub fn all_positive(&self) -> bool {
        self.terms.values().all(|c| *c > Rational::zero())
    }

    /// Union of the supports of all monomials.
    pub fn variables(&self) -> SubsetMask {
        self.terms
            .keys()
            .fold(SubsetMask::empty(), |acc, m| acc.union(&m.support()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Product, failing once the expansion would exceed `cap` terms.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let count = self.len().saturating_mul(other.len());
        if count > cap {
            return Err(Error::TooLarge {
                what: "polynomial product".into(),
                size: count,
                cap,
            });
        }
        let mut out = Self::zero(self.q, self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// `(i, j)` of a zero-based variable index.
    pub fn var_pair(&self, v: u32) -> (usize, usize) {
        var_pair(self.q, v)
    }

    /// Floating-point evaluation at `x_{i,j} = assignment(i, j)`.
    pub fn eval(&self, assignment: impl Fn(usize, usize) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                crate::rational::to_f64(c)
                    * m.0
                        .iter()
                        .map(|&v| {
                            let (i, j) = var_pair(self.q, v);
                            assignment(i, j)
                        })
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval_exact(&self, assignment: impl Fn(usize, usize) -> Rational) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for &v in &m.0 {
                let (i, j) = var_pair(self.q, v);
                term *= assignment(i, j);
            }
            total += term;
        }
        total
    }

    /// Header `q=<int> n=<int>`, then one term per line: an optional
    /// coefficient followed by `(i,j)` factors.
    pub fn to_text(&self) -> String {
        let mut out = format!("q={} n={}\n", self.q, self.n);
        for (m, c) in &self.terms {
            if !c.is_one() || m.0.is_empty() {
                write!(out, "{c}").unwrap();
                if !m.0.is_empty() {
                    out.push(' ');
                }
            }
            for (k, &v) in m.0.iter().enumerate() {
                let (i, j) = var_pair(self.q, v);
                if k > 0 {
                    out.push(' ');
                }
                write!(out, "({i},{j})").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = crate::family::content_lines(text);
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let (q, n) = parse_shape(line_no, header)?;
        let mut p = Self::zero(q, n);
        for (line_no, line) in lines {
            let (coef, rest) = match line.find('(') {
                Some(0) => (Rational::one(), line),
                Some(at) => (parse_coefficient(line_no, line[..at].trim())?, &line[at..]),
                None => (parse_coefficient(line_no, line)?, ""),
            };
            let mut vars = Vec::new();
            let mut rest = rest.trim();
            while !rest.is_empty() {
                let end = rest
                    .find(')')
                    .ok_or_else(|| Error::parse(line_no, "unclosed `(`"))?;
                let inner = rest[..end].strip_prefix('(').ok_or_else(|| {
                    Error::parse(line_no, format!("bad factor `{}`", &rest[..=end]))
                })?;
                rest = rest[end + 1..].trim_start();
                let (i, j) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::parse(line_no, "expected `(i,j)`"))?;
                let index = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(line_no, format!("bad index `{}`", s.trim())))
                };
                let v = var_index(q, n, index(i)?, index(j)?)
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                vars.push(v);
            }
            p.add_term(Monomial::from_vars(vars), coef);
        }
        Ok(p)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// Largest `q·n` variable count accepted.
pub const MAX_VARIABLES: usize = 1 << 16;

pub(crate) fn var_index(q: usize, n: usize, i: usize, j: usize) -> Result<u32> {
    if i == 0 || i > q || j == 0 || j > n {
        return Err(Error::invalid(format!(
            "variable ({i},{j}) outside [{q}] × [{n}]"
        )));
    }
    Ok(((j - 1) * q + (i - 1)) as u32)
}

pub(crate) fn var_pair(q: usize, v: u32) -> (usize, usize) {
    let v = v as usize;
    (v % q + 1, v / q + 1)
}

fn parse_shape(line_no: usize, line: &str) -> Result<(usize, usize)> {
    let mut q = None;
    let mut n = None;
    for tok in line.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, "expected `q=<int> n=<int>`"))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad value `{value}`")))?;
        match key {
            "q" if q.is_none() => q = Some(value),
            "n" if n.is_none() => n = Some(value),
            _ => return Err(Error::parse(line_no, format!("unexpected key `{key}`"))),
        }
    }
    match (q, n) {
        (Some(q), Some(n)) if q >= 1 && n >= 1 && q.saturating_mul(n) <= MAX_VARIABLES => {
            Ok((q, n))
        }
        (Some(_), Some(_)) => Err(Error::parse(
            line_no,
            format!("q·n must lie in 1..={MAX_VARIABLES}"),
        )),
        _ => Err(Error::parse(line_no, "expected `q=<int> n=<int>`")),
    }
}

fn parse_coefficient(line_no: usize, s: &str) -> Result<Rational> {
    let c: Rational = s
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad coefficient `{s}`")))?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn monomial_products() {
        let a = Monomial::from_vars([3, 1]);
        let b = Monomial::from_vars([2, 3]);
        assert_eq!(a.mul(&b), Monomial::from_vars([1, 2, 3, 3]));
        assert!(!a.mul(&b).is_multilinear());
        assert!(a.is_multilinear());
        assert_eq!(a.support(), SubsetMask::from_elements([2, 4]));
    }

    #[test]
    fn arithmetic() {
        let x = Polynomial::variable(2, 2, 1, 1).unwrap();
        let y = Polynomial::variable(2, 2, 2, 2).unwrap();
        let s = x.add(&y);
        let sq = s.mul(&s, 100).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coefficient(&Monomial::from_vars([0, 3])), ratio(2, 1));
        assert!(!sq.is_multilinear());
        assert_eq!(sq.homogeneous_degree(), Some(2));
        let neg = Polynomial::constant(2, 2, ratio(-1, 1))
            .mul(&x, 10)
            .unwrap();
        assert!(x.add(&neg).is_empty());
        assert!(s.mul(&s, 3).is_err());
    }

    #[test]
    fn evaluation() {
        let p = Polynomial::parse("q=2 n=2\n(1,1) (2,2)\n3/2 (2,1)\n").unwrap();
        assert_eq!(p.eval(|_, _| 1.0), 2.5);
        assert_eq!(
            p.eval_exact(|i, j| ratio((i + j) as i64, 1)),
            ratio(8, 1) + ratio(9, 2)
        );
    }

    #[test]
    fn text_round_trip() {
        let p =
            Polynomial::parse("q=3 n=2\n# c\n(1,1) (3,2)\n2/3 (2,1)\n5\n(1,1) (1,1)\n").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(Polynomial::parse(&p.to_text()).unwrap(), p);
        for bad in [
            "",
            "q=3\n",
            "q=3 n=2\n(4,1)",
            "q=3 n=2\n(1,1",
            "q=3 n=2\nx (1,1)",
            "q=0 n=2",
            "q=3 n=2 n=3",
            "q=3 n=2\n(1;1)",
        ] {
            assert!(Polynomial::parse(bad).is_err(), "{bad:?}");
        }
    }
}
