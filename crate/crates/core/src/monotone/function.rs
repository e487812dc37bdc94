use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;

/// Cap on the minterm count produced by `and` before giving up.
pub const MINTERM_CAP: usize = 1 << 20;

/// A monotone Boolean function on `{0,1}^n`, stored as its antichain of minterms.
///
/// No minterms is the constant 0; the single minterm `∅` is the constant 1.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonotoneFunction {
    minterms: SetFamily,
}

impl MonotoneFunction {
    /// Builds the function accepting every superset of some given set.
    pub fn from_sets<I: IntoIterator<Item = SubsetMask>>(n: usize, sets: I) -> Result<Self> {
        Ok(Self {
            minterms: SetFamily::new(n, sets)?.minimize(),
        })
    }

    pub fn from_family(family: &SetFamily) -> Self {
        Self {
            minterms: family.minimize(),
        }
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_sets(n, [])
    }

    pub fn one(n: usize) -> Result<Self> {
        Self::from_sets(n, [SubsetMask::empty()])
    }

    /// `⌈A⌉`: accepts exactly the inputs containing `A`.
    pub fn indicator(n: usize, a: SubsetMask) -> Result<Self> {
        Self::from_sets(n, [a])
    }

    pub fn n(&self) -> usize {
        self.minterms.n()
    }

    pub fn minterms(&self) -> &SetFamily {
        &self.minterms
    }

    pub fn is_zero(&self) -> bool {
        self.minterms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.minterms
            .members()
            .first()
            .is_some_and(SubsetMask::is_empty)
    }

    pub fn eval(&self, x: &SubsetMask) -> bool {
        self.minterms.iter().any(|m| m.is_subset(x))
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        Self::from_sets(
            self.n(),
            self.minterms.iter().chain(other.minterms.iter()).cloned(),
        )
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let count = self.minterms.len() * other.minterms.len();
        if count > MINTERM_CAP {
            return Err(Error::TooLarge {
                what: "conjunction".into(),
                size: count,
                cap: MINTERM_CAP,
            });
        }
        let products = self
            .minterms
            .iter()
            .flat_map(|a| other.minterms.iter().map(move |b| a.union(b)));
        Self::from_sets(self.n(), products)
    }

    /// `f ≤ g` pointwise: every minterm of `self` contains one of `other`.
    pub fn le(&self, other: &Self) -> bool {
        self.minterms.iter().all(|m| other.eval(m))
    }

    /// The minterms of size `l`.
    pub fn minterms_of_size(&self, l: usize) -> SetFamily {
        self.minterms.filter(|m| m.len() == l)
    }

    /// Drops every minterm larger than `w`.
    pub fn trim(&self, w: usize) -> Self {
        Self {
            minterms: self.minterms.filter(|m| m.len() <= w),
        }
    }

    /// Largest minterm size, `None` for the constant 0.
    pub fn width(&self) -> Option<usize> {
        self.minterms.iter().map(SubsetMask::len).max()
    }

    fn same_universe(&self, other: &Self) -> Result<()> {
        if self.n() == other.n() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "universe mismatch: {} vs {}",
                self.n(),
                other.n()
            )))
        }
    }
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monotone(n={}, ", self.n())?;
        f.debug_list().entries(self.minterms.iter()).finish()?;
        f.write_str(")")
    }
}

/// Every monotone function on `n ≤ 5` variables, in a fixed order.
pub fn enumerate_monotone(n: usize) -> Result<Vec<MonotoneFunction>> {
    if n > 5 {
        return Err(Error::TooLarge {
            what: "monotone enumeration universe".into(),
            size: n,
            cap: 5,
        });
    }
    let all: Vec<SubsetMask> = {
        let mut v: Vec<SubsetMask> = SubsetMask::full(n).subsets().collect();
        v.sort();
        v
    };
    let mut out = Vec::new();
    let mut chosen: Vec<SubsetMask> = Vec::new();
    fn grow(
        n: usize,
        all: &[SubsetMask],
        start: usize,
        chosen: &mut Vec<SubsetMask>,
        out: &mut Vec<MonotoneFunction>,
    ) -> Result<()> {
        out.push(MonotoneFunction::from_sets(n, chosen.iter().cloned())?);
        for i in start..all.len() {
            // Canonical order lists sets by size, so only earlier choices can be subsets.
            if chosen.iter().all(|c| !c.is_subset(&all[i])) {
                chosen.push(all[i].clone());
                grow(n, all, i + 1, chosen, out)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    grow(n.max(1), &all, 0, &mut chosen, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    fn func(n: usize, sets: &[&[usize]]) -> MonotoneFunction {
        MonotoneFunction::from_sets(n, sets.iter().map(|s| set(s))).unwrap()
    }

    #[test]
    fn evaluation() {
        assert!(MonotoneFunction::one(3).unwrap().eval(&set(&[])));
        let f = func(3, &[&[1, 2]]);
        assert!(f.eval(&set(&[1, 2, 3])));
        assert!(!f.eval(&set(&[1, 3])));
        assert!(!MonotoneFunction::zero(3).unwrap().eval(&set(&[1, 2, 3])));
    }

    #[test]
    fn lattice_operations() {
        assert_eq!(
            func(3, &[&[1]]).or(&func(3, &[&[1, 2]])).unwrap(),
            func(3, &[&[1]])
        );
        assert_eq!(
            func(3, &[&[1]]).and(&func(3, &[&[2]])).unwrap(),
            func(3, &[&[1, 2]])
        );
        let f = func(4, &[&[1, 2], &[3]]);
        assert_eq!(MonotoneFunction::one(4).unwrap().and(&f).unwrap(), f);
        assert!(func(3, &[&[1]]).or(&func(4, &[&[1]])).is_err());
    }

    #[test]
    fn minterm_slices() {
        let f = func(5, &[&[1], &[2, 3]]);
        assert_eq!(f.minterms_of_size(1).members(), &[set(&[1])]);
        assert_eq!(f.minterms_of_size(2).members(), &[set(&[2, 3])]);
        assert!(f.minterms_of_size(3).is_empty());
    }

    #[test]
    fn trimming() {
        let f = func(5, &[&[1, 2], &[3, 4, 5]]);
        assert_eq!(f.trim(2), func(5, &[&[1, 2]]));
        assert!(f.trim(1).is_zero());
        assert!(MonotoneFunction::one(5).unwrap().trim(0).is_one());
    }

    #[test]
    fn monotone_counts() {
        // Dedekind numbers.
        let counts: Vec<usize> = (0..=4)
            .map(|n| enumerate_monotone(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![2, 3, 6, 20, 168]);
        assert_eq!(enumerate_monotone(5).unwrap().len(), 7581);
    }

    fn arb_function(n: usize) -> impl Strategy<Value = MonotoneFunction> {
        prop::collection::vec(prop::collection::btree_set(1..=n, 0..4), 0..6).prop_map(
            move |sets| {
                MonotoneFunction::from_sets(n, sets.into_iter().map(SubsetMask::from_elements))
                    .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn or_and_commute_and_associate(f in arb_function(8), g in arb_function(8), h in arb_function(8)) {
            prop_assert_eq!(f.or(&g).unwrap(), g.or(&f).unwrap());
            prop_assert_eq!(f.and(&g).unwrap(), g.and(&f).unwrap());
            prop_assert_eq!(f.or(&g).unwrap().or(&h).unwrap(), f.or(&g.or(&h).unwrap()).unwrap());
            prop_assert_eq!(f.and(&g).unwrap().and(&h).unwrap(), f.and(&g.and(&h).unwrap()).unwrap());
        }

        #[test]
        fn operations_are_pointwise(f in arb_function(6), g in arb_function(6), x in 0u64..64) {
            let x = SubsetMask::from_bits(x);
            prop_assert_eq!(f.or(&g).unwrap().eval(&x), f.eval(&x) || g.eval(&x));
            prop_assert_eq!(f.and(&g).unwrap().eval(&x), f.eval(&x) && g.eval(&x));
        }

        #[test]
        fn trim_is_below_and_idempotent(f in arb_function(8), w in 0usize..4) {
            let t = f.trim(w);
            prop_assert!(t.le(&f));
            prop_assert_eq!(t.trim(w), t.clone());
            for x in 0u64..256 {
                let x = SubsetMask::from_bits(x);
                prop_assert!(!t.eval(&x) || f.eval(&x));
            }
        }

        #[test]
        fn minterms_form_antichain(f in arb_function(8)) {
            prop_assert!(f.minterms().is_antichain());
        }
    }
}
