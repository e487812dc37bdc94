//! Set families over `[n]`: cores, links, uniformity and spreadness.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::SubsetMask;

/// Largest ground set accepted anywhere in the crate.
pub const MAX_UNIVERSE: usize = 4096;

/// The universe `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_UNIVERSE {
            return Err(Error::invalid(format!(
                "ground set size {n} outside 1..={MAX_UNIVERSE}"
            )));
        }
        Ok(Self { n })
    }

    pub fn size(self) -> usize {
        self.n
    }
}

/// A family of distinct subsets of `[n]` in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetFamily {
    universe: GroundSet,
    members: Vec<SubsetMask>,
}

/// Outcome of an `r`-spreadness query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadReport {
    pub is_spread: bool,
    /// The violating set of smallest cardinality, ties broken by mask value.
    pub witness: Option<SubsetMask>,
    /// Number of members containing the witness; `0` when spread.
    pub link_size: usize,
}

impl SetFamily {
    pub fn new<I: IntoIterator<Item = SubsetMask>>(n: usize, members: I) -> Result<Self> {
        let universe = GroundSet::new(n)?;
        let mut members: Vec<SubsetMask> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|m| !m.fits_in(n)) {
            return Err(Error::invalid(format!(
                "member {bad} is not a subset of [{n}]"
            )));
        }
        members.sort();
        members.dedup();
        Ok(Self { universe, members })
    }

    /// Convenience constructor from element lists.
    pub fn from_sets<S: AsRef<[usize]>>(n: usize, sets: &[S]) -> Result<Self> {
        Self::new(
            n,
            sets.iter()
                .map(|s| SubsetMask::from_elements(s.as_ref().iter().copied())),
        )
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    /// `m` distinct `l`-subsets of `[n]` drawn uniformly without replacement.
    pub fn random_uniform<R: Rng + ?Sized>(
        n: usize,
        l: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        GroundSet::new(n)?;
        if l > n {
            return Err(Error::invalid(format!("cannot draw {l}-subsets of [{n}]")));
        }
        let available = crate::rational::binomial(n as u64, l as u64);
        if BigInt::from(m) > available {
            return Err(Error::invalid(format!(
                "{m} members requested but [{n}] has only {available} subsets of size {l}"
            )));
        }
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            let set =
                SubsetMask::from_elements(index::sample(rng, n, l).into_iter().map(|i| i + 1));
            chosen.insert(set);
        }
        Self::new(n, chosen)
    }

    pub fn universe(&self) -> GroundSet {
        self.universe
    }

    pub fn n(&self) -> usize {
        self.universe.n
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SubsetMask> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, set: &SubsetMask) -> bool {
        self.members.binary_search(set).is_ok()
    }

    /// Intersection of all members.
    pub fn core(&self) -> Result<SubsetMask> {
        let (first, rest) = self.members.split_first().ok_or(Error::EmptyFamily)?;
        Ok(rest
            .iter()
            .fold(first.clone(), |acc, m| acc.intersection(m)))
    }

    /// Union of all members.
    pub fn support(&self) -> SubsetMask {
        self.members
            .iter()
            .fold(SubsetMask::empty(), |acc, m| acc.union(m))
    }

    /// `{F \ T : F in family, T ⊆ F}`.
    pub fn link(&self, t: &SubsetMask) -> SetFamily {
        let members = self
            .members
            .iter()
            .filter(|f| t.is_subset(f))
            .map(|f| f.difference(t));
        Self::new(self.universe.n, members).expect("link of a valid family is valid")
    }

    /// Number of members containing `t`.
    pub fn degree(&self, t: &SubsetMask) -> usize {
        self.members.iter().filter(|f| t.is_subset(f)).count()
    }

    /// `{F ∪ T : F in family}`.
    pub fn lift(&self, t: &SubsetMask) -> SetFamily {
        Self::new(self.universe.n, self.members.iter().map(|f| f.union(t)))
            .expect("lifting inside the universe stays valid")
    }

    pub fn is_uniform(&self, size: usize) -> bool {
        self.members.iter().all(|m| m.len() == size)
    }

    /// The common member size, if the family is nonempty and uniform.
    pub fn uniformity(&self) -> Option<usize> {
        let size = self.members.first()?.len();
        self.is_uniform(size).then_some(size)
    }

    /// True iff no member strictly contains another.
    pub fn is_antichain(&self) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !a.is_subset(b))
        })
    }

    /// Removes every member that strictly contains another member.
    pub fn minimize(&self) -> SetFamily {
        // Canonical order puts smaller sets first, so a kept set can only be
        // absorbed by something already kept.
        let mut kept: Vec<SubsetMask> = Vec::with_capacity(self.members.len());
        for m in &self.members {
            if !kept.iter().any(|k| k.is_subset(m)) {
                kept.push(m.clone());
            }
        }
        SetFamily {
            universe: self.universe,
            members: kept,
        }
    }

    pub fn filter<P: FnMut(&SubsetMask) -> bool>(&self, mut keep: P) -> SetFamily {
        SetFamily {
            universe: self.universe,
            members: self.members.iter().filter(|m| keep(m)).cloned().collect(),
        }
    }

    /// Checks whether every nonempty `T` lies in at most `|family| / r^|T|` members.
    pub fn check_spread(&self, r: f64) -> Result<SpreadReport> {
        if self.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if r.is_nan() || r <= 0.0 {
            return Err(Error::invalid(format!(
                "spread parameter r = {r} must be positive"
            )));
        }
        if let Some(big) = self.members.iter().find(|m| m.len() > 24) {
            return Err(Error::TooLarge {
                what: "spread enumeration member".into(),
                size: big.len(),
                cap: 24,
            });
        }
        let mut degrees: HashMap<SubsetMask, usize> = HashMap::new();
        for member in &self.members {
            for t in member.subsets().filter(|t| !t.is_empty()) {
                *degrees.entry(t).or_default() += 1;
            }
        }
        let total = self.members.len() as f64;
        let witness = degrees
            .into_iter()
            .filter(|(t, count)| *count as f64 * r.powi(t.len() as i32) > total)
            .min_by(|a, b| a.0.cmp(&b.0));
        Ok(match witness {
            Some((t, count)) => SpreadReport {
                is_spread: false,
                witness: Some(t),
                link_size: count,
            },
            None => SpreadReport {
                is_spread: true,
                witness: None,
                link_size: 0,
            },
        })
    }

    /// The largest `r` for which the family is `r`-spread:
    /// `min_T (|family| / deg(T))^{1/|T|}` over nonempty `T` with `deg(T) > 0`.
    pub fn spread_parameter(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if let Some(big) = self.members.iter().find(|m| m.len() > 24) {
            return Err(Error::TooLarge {
                what: "spread enumeration member".into(),
                size: big.len(),
                cap: 24,
            });
        }
        let mut degrees: HashMap<SubsetMask, usize> = HashMap::new();
        for member in &self.members {
            for t in member.subsets().filter(|t| !t.is_empty()) {
                *degrees.entry(t).or_default() += 1;
            }
        }
        let total = self.members.len() as f64;
        Ok(degrees
            .iter()
            .map(|(t, &count)| (total / count as f64).powf(1.0 / t.len() as f64))
            .fold(f64::INFINITY, f64::min))
    }

    /// Line-oriented text form: `n=<int>`, then one member per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.universe.n);
        for m in &self.members {
            if m.is_empty() {
                out.push_str("{}");
            } else {
                for (i, e) in m.elements().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{e}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form written by [`SetFamily::to_text`].
    ///
    /// Blank lines and `#` comments are skipped; `{}` denotes the empty member.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let n = parse_header(line_no, header)?;
        let mut members = Vec::new();
        for (line_no, line) in lines {
            members.push(parse_element_list(line_no, line, n)?);
        }
        Self::new(n, members).map_err(|e| Error::parse(line_no, e.to_string()))
    }
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn parse_header(line_no: usize, line: &str) -> Result<usize> {
    let value = line
        .strip_prefix("n=")
        .ok_or_else(|| Error::parse(line_no, "expected header `n=<int>`"))?;
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::parse(line_no, "bad ground-set size"))?;
    if n == 0 || n > MAX_UNIVERSE {
        return Err(Error::parse(
            line_no,
            format!("ground-set size {n} outside 1..={MAX_UNIVERSE}"),
        ));
    }
    Ok(n)
}

fn parse_element_list(line_no: usize, line: &str, n: usize) -> Result<SubsetMask> {
    if line == "{}" {
        return Ok(SubsetMask::empty());
    }
    let mut mask = SubsetMask::empty();
    for tok in line.split(',') {
        let e: usize = tok
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad element `{}`", tok.trim())))?;
        if e == 0 || e > n {
            return Err(Error::parse(
                line_no,
                format!("element {e} outside [1, {n}]"),
            ));
        }
        mask.insert(e);
    }
    Ok(mask)
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFamily(n={}, ", self.universe.n)?;
        f.debug_list().entries(&self.members).finish()?;
        f.write_str(")")
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = &'a SubsetMask;
    type IntoIter = std::slice::Iter<'a, SubsetMask>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_sets(n, sets).unwrap()
    }

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    #[test]
    fn spread_parameter_matches_check() {
        let f = fam(6, &[&[1, 2], &[1, 3], &[4, 5], &[5, 6]]);
        // Element 1 lies in 2 of 4 members.
        assert_eq!(f.spread_parameter().unwrap(), 2.0);
        let r = f.spread_parameter().unwrap();
        assert!(f.check_spread(r).unwrap().is_spread);
        assert!(!f.check_spread(r * 1.0001).unwrap().is_spread);
        // Only the empty member: no nonempty T has positive degree.
        assert_eq!(fam(3, &[&[]]).spread_parameter().unwrap(), f64::INFINITY);
        assert!(SetFamily::empty(3).unwrap().spread_parameter().is_err());
    }

    #[test]
    fn random_uniform_draws_distinct_members() {
        let mut rng = crate::probability::stream_rng(7, 0);
        let f = SetFamily::random_uniform(6, 3, 20, &mut rng).unwrap();
        assert_eq!(f.len(), 20);
        assert!(f.is_uniform(3));
        assert!(SetFamily::random_uniform(6, 3, 21, &mut rng).is_err());
        assert!(SetFamily::random_uniform(3, 4, 1, &mut rng).is_err());
        let mut again = crate::probability::stream_rng(7, 0);
        let g = SetFamily::random_uniform(6, 3, 20, &mut again).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn core_examples() {
        assert_eq!(fam(4, &[&[1, 2], &[1, 3]]).core().unwrap(), set(&[1]));
        assert_eq!(fam(4, &[&[1], &[2]]).core().unwrap(), set(&[]));
        assert_eq!(fam(4, &[&[1, 2, 3]]).core().unwrap(), set(&[1, 2, 3]));
        assert_eq!(SetFamily::empty(3).unwrap().core(), Err(Error::EmptyFamily));
    }

    #[test]
    fn link_examples() {
        let f = fam(4, &[&[1, 2], &[1, 3], &[2, 3]]);
        assert_eq!(f.link(&set(&[1])), fam(4, &[&[2], &[3]]));
        assert!(fam(4, &[&[1, 2]]).link(&set(&[3])).is_empty());
        let g = fam(4, &[&[1, 2], &[1, 3]]);
        assert_eq!(g.link(&SubsetMask::empty()), g);
    }

    #[test]
    fn uniformity_examples() {
        assert!(fam(4, &[&[1, 2], &[3, 4]]).is_uniform(2));
        assert!(!fam(4, &[&[1], &[2, 3]]).is_uniform(2));
        assert!(SetFamily::empty(5).unwrap().is_uniform(5));
    }

    #[test]
    fn spread_examples() {
        let star = fam(4, &[&[1, 2], &[1, 3], &[1, 4]]);
        let report = star.check_spread(2.0).unwrap();
        assert!(!report.is_spread);
        assert_eq!(report.witness, Some(set(&[1])));
        assert_eq!(report.link_size, 3);

        assert!(
            fam(4, &[&[1], &[2], &[3], &[4]])
                .check_spread(2.0)
                .unwrap()
                .is_spread
        );
        assert!(
            fam(4, &[&[1, 2], &[3, 4]])
                .check_spread(1.0)
                .unwrap()
                .is_spread
        );
        assert_eq!(
            SetFamily::empty(2).unwrap().check_spread(2.0),
            Err(Error::EmptyFamily)
        );
    }

    #[test]
    fn spread_witness_prefers_small_then_numeric() {
        // {2} and {1,2} both violate at r = 3; the singleton wins.
        let f = fam(5, &[&[1, 2], &[2, 3], &[2, 4]]);
        let report = f.check_spread(3.0).unwrap();
        assert_eq!(report.witness, Some(set(&[2])));
    }

    #[test]
    fn members_are_validated_against_universe() {
        assert!(SetFamily::from_sets(3, &[&[4usize][..]]).is_err());
        assert!(SetFamily::from_sets(0, &[&[][..] as &[usize]]).is_err());
    }

    #[test]
    fn minimize_removes_supersets() {
        let f = fam(5, &[&[1], &[1, 2], &[2, 3], &[2, 3, 4]]);
        assert_eq!(f.minimize(), fam(5, &[&[1], &[2, 3]]));
        assert!(f.minimize().is_antichain());
    }

    #[test]
    fn text_format() {
        let f = fam(6, &[&[3, 1], &[2], &[]]);
        let text = f.to_text();
        assert_eq!(text, "n=6\n{}\n2\n1,3\n");
        assert_eq!(SetFamily::parse(&text).unwrap(), f);
        assert_eq!(
            SetFamily::parse("# c\nn=3\n\n1, 2 # pair\n").unwrap(),
            fam(3, &[&[1, 2]])
        );
        assert!(SetFamily::parse("n=3\n4\n").is_err());
        assert!(SetFamily::parse("n=3\n0\n").is_err());
        assert!(SetFamily::parse("3\n1\n").is_err());
        assert!(SetFamily::parse("").is_err());
        assert!(SetFamily::parse("n=3\n1,,2\n").is_err());
    }

    fn arb_family() -> impl Strategy<Value = SetFamily> {
        prop::collection::vec(prop::collection::btree_set(1usize..=8, 0..5), 1..8).prop_map(
            |sets| SetFamily::new(8, sets.into_iter().map(SubsetMask::from_elements)).unwrap(),
        )
    }

    proptest! {
        #[test]
        fn link_of_core_has_empty_core(f in arb_family()) {
            prop_assume!(f.len() >= 2);
            let core = f.core().unwrap();
            prop_assert!(f.link(&core).core().unwrap().is_empty());
        }

        #[test]
        fn link_size_bounded_with_equality_on_core(f in arb_family(), t in prop::collection::btree_set(1usize..=8, 0..3)) {
            let t = SubsetMask::from_elements(t);
            let link = f.link(&t);
            prop_assert!(link.len() <= f.len());
            prop_assert_eq!(link.len() == f.len(), t.is_subset(&f.core().unwrap()));
        }

        #[test]
        fn spread_with_r_one_always_holds(f in arb_family()) {
            prop_assert!(f.check_spread(1.0).unwrap().is_spread);
        }

        #[test]
        fn canonicalization_is_idempotent(f in arb_family()) {
            let again = SetFamily::new(f.n(), f.members().iter().rev().cloned()).unwrap();
            prop_assert_eq!(&again, &f);
            prop_assert_eq!(SetFamily::parse(&f.to_text()).unwrap(), f);
        }
    }
}
