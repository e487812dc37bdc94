use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{CoverageQuery, ExactProbability};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::rational::{self, Rational};

/// Default cap on the number of free elements enumerated exactly (`2^24` assignments).
pub const DEFAULT_WORK_CAP: usize = 24;

/// Hard ceiling on any configured cap; the kernel keeps a `2^m`-bit table.
const MAX_WORK_CAP: usize = 32;

const MAX_IE_MEMBERS: usize = 22;

/// Members re-indexed onto the free elements, plus the class split.
struct Compressed {
    members: Vec<u64>,
    /// Bits belonging to the alternate-bias class.
    alt_bits: u64,
    default_count: usize,
    alt_count: usize,
}

fn compress(query: &CoverageQuery, limit: usize) -> Result<Compressed> {
    let free = query.free_elements();
    if free.len() > limit {
        return Err(Error::ExactIntractable {
            size: free.len(),
            cap: limit,
        });
    }
    let index: HashMap<usize, u32> = free
        .elements()
        .enumerate()
        .map(|(i, e)| (e, i as u32))
        .collect();
    let pack = |m: &SubsetMask| -> u64 {
        m.difference(&query.given)
            .elements()
            .fold(0u64, |acc, e| acc | 1 << index[&e])
    };
    let members = query.members.iter().map(pack).collect();
    let alt_bits = query
        .alt
        .as_ref()
        .map_or(0, |(class, _)| pack(&class.intersection(&free)));
    let alt_count = alt_bits.count_ones() as usize;
    Ok(Compressed {
        members,
        alt_bits,
        default_count: free.len() - alt_count,
        alt_count,
    })
}

/// Weighting of a `(k_default, k_alt)` count table by the two biases.
struct Weights {
    p: Vec<Rational>,
    not_p: Vec<Rational>,
    q: Vec<Rational>,
    not_q: Vec<Rational>,
    default_count: usize,
    alt_count: usize,
}

impl Weights {
    fn new(query: &CoverageQuery, default_count: usize, alt_count: usize) -> Self {
        let one = Rational::one();
        let q = query
            .alt
            .as_ref()
            .map_or_else(|| query.bias.clone(), |(_, b)| b.clone());
        Self {
            p: rational::powers(&query.bias, default_count),
            not_p: rational::powers(&(&one - &query.bias), default_count),
            q: rational::powers(&q, alt_count),
            not_q: rational::powers(&(&one - &q), alt_count),
            default_count,
            alt_count,
        }
    }

    /// Probability of one specific assignment with the given numbers of present elements.
    fn atom(&self, k_default: usize, k_alt: usize) -> Rational {
        &self.p[k_default]
            * &self.not_p[self.default_count - k_default]
            * &self.q[k_alt]
            * &self.not_q[self.alt_count - k_alt]
    }

    /// Probability that a fixed set with the given class counts is entirely present.
    fn all_present(&self, k_default: usize, k_alt: usize) -> Rational {
        &self.p[k_default] * &self.q[k_alt]
    }
}

pub(super) fn enumerate(query: &CoverageQuery, cap: usize) -> Result<ExactProbability> {
    if query.members.is_empty() {
        return Ok(ExactProbability::new(Rational::zero()));
    }
    if query.certain() {
        return Ok(ExactProbability::new(Rational::one()));
    }
    let c = compress(query, cap.min(MAX_WORK_CAP))?;
    let m = c.default_count + c.alt_count;
    let table = covering_counts(&c.members, m as u32, c.alt_bits, c.alt_count);
    let weights = Weights::new(query, c.default_count, c.alt_count);
    let mut value = Rational::zero();
    for (k_default, row) in table.iter().enumerate() {
        for (k_alt, &count) in row.iter().enumerate() {
            if count > 0 {
                value +=
                    weights.atom(k_default, k_alt) * Rational::from_integer(BigInt::from(count));
            }
        }
    }
    Ok(ExactProbability::new(value))
}

/// For every `(k_default, k_alt)`, the number of assignments `W` of the `m` free
/// bits with those class popcounts such that some member is a subset of `W`.
pub(crate) fn covering_counts(
    members: &[u64],
    m: u32,
    alt_bits: u64,
    alt_count: usize,
) -> Vec<Vec<u64>> {
    let up = upward_closure(members, m);
    let default_count = m as usize - alt_count;
    let mut table = vec![vec![0u64; alt_count + 1]; default_count + 1];
    let limit: u64 = 1 << m;
    for (wi, &word) in up.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let b = w.trailing_zeros() as u64;
            w &= w - 1;
            let x = (wi as u64) << 6 | b;
            if x >= limit {
                break;
            }
            let k_alt = (x & alt_bits).count_ones() as usize;
            let k_default = x.count_ones() as usize - k_alt;
            table[k_default][k_alt] += 1;
        }
    }
    table
}

/// Bitset over `{0,1}^m` marking every superset of some member.
fn upward_closure(members: &[u64], m: u32) -> Vec<u64> {
    const LOW: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0F0F_0F0F_0F0F_0F0F,
        0x00FF_00FF_00FF_00FF,
        0x0000_FFFF_0000_FFFF,
        0x0000_0000_FFFF_FFFF,
    ];
    let words = if m >= 6 { 1usize << (m - 6) } else { 1 };
    let mut up = vec![0u64; words];
    for &x in members {
        up[(x >> 6) as usize] |= 1 << (x & 63);
    }
    for i in 0..m.min(6) {
        let shift = 1u32 << i;
        for w in up.iter_mut() {
            *w |= (*w & LOW[i as usize]) << shift;
        }
    }
    for i in 6..m {
        let stride = 1usize << (i - 6);
        for block in (0..words).step_by(2 * stride) {
            for j in block..block + stride {
                up[j + stride] |= up[j];
            }
        }
    }
    up
}

pub(super) fn inclusion_exclusion(query: &CoverageQuery) -> Result<ExactProbability> {
    if query.members.is_empty() {
        return Ok(ExactProbability::new(Rational::zero()));
    }
    if query.certain() {
        return Ok(ExactProbability::new(Rational::one()));
    }
    let c = compress(query, 64)?;
    // Supersets of other members do not change the union event.
    let mut members = c.members.clone();
    members.sort_by_key(|m| m.count_ones());
    members.dedup();
    let mut minimal: Vec<u64> = Vec::new();
    for m in members {
        if !minimal.iter().any(|k| k & !m == 0) {
            minimal.push(m);
        }
    }
    if minimal.len() > MAX_IE_MEMBERS {
        return Err(Error::TooLarge {
            what: "inclusion–exclusion family".into(),
            size: minimal.len(),
            cap: MAX_IE_MEMBERS,
        });
    }
    // Signed number of member subsets whose union has each class profile.
    let mut signed: HashMap<(usize, usize), i64> = HashMap::new();
    fn walk(
        members: &[u64],
        union: u64,
        picked: usize,
        alt_bits: u64,
        signed: &mut HashMap<(usize, usize), i64>,
    ) {
        match members.split_first() {
            None => {
                if picked > 0 {
                    let k_alt = (union & alt_bits).count_ones() as usize;
                    let k_default = union.count_ones() as usize - k_alt;
                    let sign = if picked % 2 == 1 { 1 } else { -1 };
                    *signed.entry((k_default, k_alt)).or_default() += sign;
                }
            }
            Some((&first, rest)) => {
                walk(rest, union, picked, alt_bits, signed);
                walk(rest, union | first, picked + 1, alt_bits, signed);
            }
        }
    }
    walk(&minimal, 0, 0, c.alt_bits, &mut signed);
    let weights = Weights::new(query, c.default_count, c.alt_count);
    let mut value = Rational::zero();
    for ((k_default, k_alt), count) in signed {
        if count != 0 {
            value +=
                weights.all_present(k_default, k_alt) * Rational::from_integer(BigInt::from(count));
        }
    }
    Ok(ExactProbability::new(value))
}
