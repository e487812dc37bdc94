//! Exact rational helpers shared by the probability engines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// The exact dyadic value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

/// `[1, x, x^2, ..., x^max]`.
pub fn powers(x: &Rational, max: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = Rational::one();
    for _ in 0..=max {
        out.push(acc.clone());
        acc *= x;
    }
    out
}

/// Serializes as the exact `num/den` string.
pub fn serialize<S: serde::Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn in_unit_interval(x: &Rational) -> bool {
    *x >= Rational::zero() && *x <= Rational::one()
}

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_and_powers_agree() {
        let x = ratio(2, 3);
        let table = powers(&x, 6);
        for (k, v) in table.iter().enumerate() {
            assert_eq!(&pow(&x, k), v);
        }
        assert_eq!(pow(&x, 2), ratio(4, 9));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn float_round_trip_is_exact() {
        let half = from_f64(0.5).unwrap();
        assert_eq!(half, ratio(1, 2));
        assert_eq!(to_f64(&from_f64(0.1).unwrap()), 0.1);
        assert!(from_f64(f64::NAN).is_none());
    }
}
