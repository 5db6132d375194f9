//! Helpers for the arbitrary-precision [`Rational`] scalar.
//!
//! Rationals serialize as `"p/q"` decimal strings (`"p"` when the
//! denominator is one); parsing accepts both forms. The representation is
//! provided by `num-rational`, which keeps every value in lowest terms with
//! a positive denominator, so the two invariants of the type hold by
//! construction.

use crate::{Error, Rational, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// Shorthand constructor from machine integers.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// 2^n as a `BigUint`.
pub fn pow2(n: u32) -> BigUint {
    BigUint::one() << n
}

/// 2^n as a positive `Rational`.
pub fn rational_pow2(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(pow2(n)))
}

/// 8^n as a positive `Rational`.
pub fn rational_pow8(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(pow2(3 * n)))
}

/// Parse a `"p/q"` or `"p"` decimal string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    t.parse::<Rational>().map_err(|_| Error::Parse {
        input: s.to_string(),
        expected: "rational \"p/q\"",
    })
}

/// Canonical `"p/q"` string (integers print without the denominator).
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Serde adapter: a rational as its `"p/q"` string.
pub mod rational_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(de)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Exact Lagrange interpolation: the unique polynomial of degree
/// `< points.len()` through the given points, evaluated at `at`.
pub fn lagrange_eval(points: &[(Rational, Rational)], at: &Rational) -> Rational {
    let mut total = Rational::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut term = yi.clone();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i != j {
                term *= (at - xj) / (xi - xj);
            }
        }
        total += term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "0", "5", "-12"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        // non-canonical inputs normalize
        assert_eq!(format_rational(&parse_rational("6/8").unwrap()), "3/4");
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn lowest_terms_invariant() {
        let r = rat(6, -8);
        assert_eq!(r, rat(-3, 4));
        assert!(r.denom() > &num_bigint::BigInt::from(0));
    }

    #[test]
    fn lagrange_recovers_cubic() {
        // p(x) = 2x^3 - x + 5, free term 5
        let p = |x: &Rational| rat_int(2) * x * x * x - x + rat_int(5);
        let pts: Vec<_> = [rat(1, 3), rat(1, 5), rat(2, 7), rat(3, 11)]
            .into_iter()
            .map(|x| (x.clone(), p(&x)))
            .collect();
        assert_eq!(lagrange_eval(&pts, &Rational::zero()), rat_int(5));
        assert_eq!(lagrange_eval(&pts, &rat(1, 2)), p(&rat(1, 2)));
    }

    proptest! {
        #[test]
        fn arithmetic_stays_reduced(p in -1000i64..1000, q in 1i64..1000, r in -1000i64..1000, s in 1i64..1000) {
            let a = rat(p, q);
            let b = rat(r, s);
            let sum = &a + &b;
            let back = parse_rational(&format_rational(&sum)).unwrap();
            prop_assert_eq!(back, sum);
        }
    }
}
