//! Dyadic rationals `m/2^n` and Nim-addition (bitwise XOR).
//!
//! Nim-addition on the unit interval identifies `[0,1]` with binary digit
//! sequences. Every dyadic rational below one uses its finite expansion,
//! while `1` itself is read as the all-ones tail `0.111…`; consequently
//! `x ⊕ 1 = 1 − x`. Those two conventions are the only special cases —
//! everything else is a mantissa XOR at a common level.

use crate::rational::pow2;
use crate::{Error, Rational, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// A nonnegative dyadic rational `mantissa / 2^level` in canonical form:
/// either `level == 0` or the mantissa is odd.
///
/// Grid code that needs a fixed ("pinned") level uses
/// [`Dyadic::mantissa_at_level`] / [`to_common_level`]; the stored form is
/// always canonical so that structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigUint,
    level: u32,
}

impl Dyadic {
    /// Build `mantissa / 2^level`, normalizing trailing zero bits.
    pub fn new(mantissa: BigUint, level: u32) -> Self {
        let mut d = Dyadic { mantissa, level };
        d.normalize();
        d
    }

    pub fn from_u64(mantissa: u64, level: u32) -> Self {
        Self::new(BigUint::from(mantissa), level)
    }

    pub fn zero() -> Self {
        Self::new(BigUint::zero(), 0)
    }

    pub fn one() -> Self {
        Self::new(BigUint::one(), 0)
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.level = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(self.level);
        if shift > 0 {
            self.mantissa >>= shift;
            self.level -= shift;
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Pinned-level view: mantissa `m` with `self == m/2^level`, if the
    /// point is representable at that level.
    pub fn mantissa_at_level(&self, level: u32) -> Option<BigUint> {
        if level < self.level {
            return None;
        }
        Some(&self.mantissa << (level - self.level))
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.mantissa.clone()), BigInt::from(pow2(self.level)))
    }

    /// Exact conversion from a nonnegative rational with power-of-two
    /// denominator.
    pub fn from_rational(r: &Rational) -> Option<Self> {
        if r.numer().sign() == num_bigint::Sign::Minus {
            return None;
        }
        let denom = r.denom().to_biguint()?;
        if denom.count_ones() != 1 {
            return None;
        }
        let level = denom.trailing_zeros().unwrap_or(0) as u32;
        let mantissa = r.numer().to_biguint()?;
        Some(Self::new(mantissa, level))
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.level == 0 && self.mantissa.is_one()
    }

    /// Whether the value lies in `[0, 1]`.
    pub fn in_unit_interval(&self) -> bool {
        self.mantissa <= pow2(self.level)
    }

    /// `1 - self`, for values in the unit interval.
    pub fn one_minus(&self) -> Result<Dyadic> {
        if !self.in_unit_interval() {
            return Err(Error::OutsideUnitInterval(self.to_string()));
        }
        Ok(Dyadic::new(pow2(self.level) - &self.mantissa, self.level))
    }

    /// Format at a pinned level (non-canonical view), e.g. `6/2^3`.
    pub fn format_at_level(&self, level: u32) -> Result<String> {
        let m = self.mantissa_at_level(level).ok_or(Error::LevelTooSmall {
            point: self.to_string(),
            level,
        })?;
        Ok(if level == 0 {
            m.to_string()
        } else {
            format!("{m}/2^{level}")
        })
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let level = self.level.max(other.level);
        let a = &self.mantissa << (level - self.level);
        let b = &other.mantissa << (level - other.level);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.level)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `m`, `m/2^n`, and `p/q` with `q` a power of two.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = || Error::Parse {
            input: s.to_string(),
            expected: "dyadic \"m/2^n\"",
        };
        match t.split_once('/') {
            None => {
                let m = t.parse::<BigUint>().map_err(|_| err())?;
                Ok(Dyadic::new(m, 0))
            }
            Some((num, den)) => {
                let m = num.trim().parse::<BigUint>().map_err(|_| err())?;
                let den = den.trim();
                if let Some(exp) = den.strip_prefix("2^") {
                    let level = exp.trim().parse::<u32>().map_err(|_| err())?;
                    Ok(Dyadic::new(m, level))
                } else {
                    let q = den.parse::<BigUint>().map_err(|_| err())?;
                    if q.is_zero() || q.count_ones() != 1 {
                        return Err(err());
                    }
                    let level = q.trailing_zeros().unwrap_or(0) as u32;
                    Ok(Dyadic::new(m, level))
                }
            }
        }
    }
}

/// Nim-addition of nonnegative integers: bitwise XOR of binary expansions.
pub fn nim_add_int(a: &BigUint, b: &BigUint) -> BigUint {
    a ^ b
}

/// Nim-addition on the unit interval.
///
/// `1` is decomposed as `0.111…`, so `x ⊕ 1 = 1 − x`; all other dyadic
/// arguments use their finite expansions, XORed at the common level.
pub fn nim_add_unit(x: &Dyadic, y: &Dyadic) -> Result<Dyadic> {
    for v in [x, y] {
        if !v.in_unit_interval() {
            return Err(Error::OutsideUnitInterval(v.to_string()));
        }
    }
    if x.is_one() {
        return y.one_minus();
    }
    if y.is_one() {
        return x.one_minus();
    }
    let level = x.level.max(y.level);
    let mx = x.mantissa_at_level(level).expect("level is the max of both");
    let my = y.mantissa_at_level(level).expect("level is the max of both");
    Ok(Dyadic::new(mx ^ my, level))
}

/// Mantissas of all points at a common pinned level.
pub fn to_common_level(points: &[Dyadic], level: u32) -> Result<Vec<BigUint>> {
    points
        .iter()
        .map(|p| {
            p.mantissa_at_level(level).ok_or(Error::LevelTooSmall {
                point: p.to_string(),
                level,
            })
        })
        .collect()
}

/// Mantissa as `u64` at a pinned level, for grid indexing.
pub(crate) fn mantissa_u64_at_level(d: &Dyadic, level: u32) -> Result<u64> {
    let m = d.mantissa_at_level(level).ok_or(Error::LevelTooSmall {
        point: d.to_string(),
        level,
    })?;
    m.to_u64().ok_or_else(|| Error::MantissaTooLarge(d.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn dy(m: u64, n: u32) -> Dyadic {
        Dyadic::from_u64(m, n)
    }

    #[test]
    fn canonical_form() {
        let d = dy(6, 3); // 6/8 = 3/4
        assert_eq!(d, dy(3, 2));
        assert_eq!(d.to_string(), "3/2^2");
        assert_eq!(dy(0, 7), Dyadic::zero());
        assert_eq!(dy(4, 2), Dyadic::one());
        assert_eq!(dy(2, 0).to_string(), "2");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/2^2".parse::<Dyadic>().unwrap(), dy(3, 2));
        assert_eq!("3/4".parse::<Dyadic>().unwrap(), dy(3, 2));
        assert_eq!("5".parse::<Dyadic>().unwrap(), dy(5, 0));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("1/0".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rational_round_trip() {
        let d = dy(11, 4);
        assert_eq!(d.to_rational(), rat(11, 16));
        assert_eq!(Dyadic::from_rational(&rat(11, 16)).unwrap(), d);
        assert_eq!(Dyadic::from_rational(&rat(1, 3)), None);
        assert_eq!(Dyadic::from_rational(&rat(-1, 2)), None);
    }

    #[test]
    fn nim_add_int_examples() {
        let b = |v: u64| BigUint::from(v);
        assert_eq!(nim_add_int(&b(0), &b(0)), b(0));
        assert_eq!(nim_add_int(&b(13), &b(13)), b(0));
        assert_eq!(nim_add_int(&b(1), &b(2)), b(3));
    }

    #[test]
    fn nim_add_int_group_laws_exhaustive() {
        // Z_2^infty group structure, exhaustive below 2^8.
        let vals: Vec<BigUint> = (0u64..256).map(BigUint::from).collect();
        for a in 0..256usize {
            assert_eq!(nim_add_int(&vals[a], &vals[0]), vals[a], "identity");
            assert_eq!(nim_add_int(&vals[a], &vals[a]), vals[0], "self-inverse");
            for b in 0..256usize {
                assert_eq!(
                    nim_add_int(&vals[a], &vals[b]),
                    nim_add_int(&vals[b], &vals[a]),
                    "commutativity"
                );
            }
        }
        for a in 0..256usize {
            for b in 0..256usize {
                let ab = nim_add_int(&vals[a], &vals[b]);
                for c in 0..256usize {
                    let left = nim_add_int(&ab, &vals[c]);
                    let right = nim_add_int(&vals[a], &nim_add_int(&vals[b], &vals[c]));
                    assert_eq!(left, right, "associativity at ({a},{b},{c})");
                }
            }
        }
    }

    #[test]
    fn nim_add_unit_examples() {
        let r = nim_add_unit(&dy(1, 1), &dy(1, 2)).unwrap(); // 1/2 xor 1/4
        assert_eq!(r, dy(3, 2));
        let r = nim_add_unit(&Dyadic::one(), &dy(3, 3)).unwrap(); // 1 xor 3/8
        assert_eq!(r, dy(5, 3));
        let x = dy(11, 4);
        assert_eq!(nim_add_unit(&x, &x).unwrap(), Dyadic::zero());
        assert!(nim_add_unit(&dy(3, 1), &dy(1, 1)).is_err());
    }

    #[test]
    fn reflection_identity() {
        // x⊕1 + x⊕0 = 1 for every level-n dyadic x < 1, n <= 8.
        for n in 0..=8u32 {
            for m in 0..(1u64 << n) {
                let x = dy(m, n);
                let with_one = nim_add_unit(&x, &Dyadic::one()).unwrap();
                let with_zero = nim_add_unit(&x, &Dyadic::zero()).unwrap();
                assert_eq!(
                    with_one.to_rational() + with_zero.to_rational(),
                    rat(1, 1),
                    "x = {m}/2^{n}"
                );
            }
        }
    }

    #[test]
    fn unit_xor_matches_integer_xor_at_common_level() {
        for n in 0..=8u32 {
            let full = 1u64 << n;
            for mx in 0..full {
                for my in 0..full {
                    let got = nim_add_unit(&dy(mx, n), &dy(my, n)).unwrap();
                    assert_eq!(got, dy(mx ^ my, n));
                }
            }
        }
    }

    #[test]
    fn common_level_examples() {
        let pts = [dy(1, 1), dy(3, 2)];
        let ms = to_common_level(&pts, 2).unwrap();
        assert_eq!(ms, vec![BigUint::from(2u32), BigUint::from(3u32)]);
        let pts = [Dyadic::zero(), Dyadic::one()];
        assert_eq!(
            to_common_level(&pts, 0).unwrap(),
            vec![BigUint::from(0u32), BigUint::from(1u32)]
        );
        assert!(to_common_level(&[dy(1, 3)], 2).is_err());
    }

    #[test]
    fn ordering() {
        assert!(dy(1, 2) < dy(1, 1));
        assert!(dy(3, 2) > dy(1, 1));
        assert!(dy(1, 1) == dy(2, 2));
    }

    proptest! {
        #[test]
        fn display_round_trip(m in 0u64..10_000, n in 0u32..20) {
            let d = dy(m, n);
            let back: Dyadic = d.to_string().parse().unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn unit_xor_self_inverse(m in 0u64..1024, n in 0u32..10) {
            let full = 1u64 << n;
            let d = dy(m.min(full), n);
            prop_assert_eq!(nim_add_unit(&d, &d).unwrap(), Dyadic::zero());
        }
    }
}
