//! The recurrence-defined dual potential.
//!
//! `f` is the integer-valued function on pairs of nonnegative integers fixed
//! by the base values `f(0,0) = 0`, `f(0,1) = f(1,0) = -1`, `f(1,1) = 2` and
//! four parity branches:
//!
//! * both even:  `f(a,b) = 8 f(a/2, b/2)`
//! * `a` odd, `b` even: `f(a,b) = 4 (f((a-1)/2, b/2) + f((a+1)/2, b/2)) + 3`
//! * `a` even, `b` odd: mirrored
//! * both odd: `f(a,b) = 2 Σ f((a±1)/2, (b±1)/2) + 2`
//!
//! Scaled to dyadic points by `f_C(a/2^n, b/2^n) = f(a,b)/8^n`, the triple
//! sum `F(x,y) + F(y,z) + F(z,x)` of `F = f_C/8` is a dual potential for the
//! min-cost problem with cost `xyz`: `F_C <= 8xyz` with equality exactly on
//! the closure of the Nim-sum-zero set. Values grow like `8^n`, so the table
//! stores arbitrary-precision integers.

use crate::rational::rational_pow8;
use crate::{Dyadic, Rational, Result};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Mutex;

/// Memoized table of `f` values, keyed on symmetry-normalized pairs.
///
/// The memo is internally synchronized: concurrent `f_int` calls are safe
/// and deterministic. Evaluation uses an explicit work stack, so the depth
/// of the recurrence (one per bit of the arguments) never touches the call
/// stack.
pub struct PotentialTable {
    memo: Mutex<HashMap<(u64, u64), BigInt>>,
    base: [i64; 3], // f(0,0), f(0,1), f(1,1)
}

impl Default for PotentialTable {
    fn default() -> Self {
        Self::new()
    }
}

enum Rule {
    Base(i64),
    EvenEven([(u64, u64); 1]),
    OddEven([(u64, u64); 2]),
    OddOdd([(u64, u64); 4]),
}

impl PotentialTable {
    pub fn new() -> Self {
        Self::with_bases(0, -1, 2)
    }

    /// Table with overridden base values. Used by the fault-injection
    /// self-test of the verification harness; the genuine potential is
    /// `with_bases(0, -1, 2)`.
    pub fn with_bases(f00: i64, f01: i64, f11: i64) -> Self {
        PotentialTable {
            memo: Mutex::new(HashMap::new()),
            base: [f00, f01, f11],
        }
    }

    pub fn memo_entries(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    fn norm(a: u64, b: u64) -> (u64, u64) {
        (a.min(b), a.max(b))
    }

    #[allow(clippy::manual_div_ceil)]
    fn rule(&self, lo: u64, hi: u64) -> Rule {
        match (lo, hi) {
            (0, 0) => Rule::Base(self.base[0]),
            (0, 1) => Rule::Base(self.base[1]),
            (1, 1) => Rule::Base(self.base[2]),
            _ => match (lo % 2 == 1, hi % 2 == 1) {
                (false, false) => Rule::EvenEven([Self::norm(lo / 2, hi / 2)]),
                (true, false) => Rule::OddEven([
                    Self::norm((lo - 1) / 2, hi / 2),
                    Self::norm((lo + 1) / 2, hi / 2),
                ]),
                (false, true) => Rule::OddEven([
                    Self::norm(lo / 2, (hi - 1) / 2),
                    Self::norm(lo / 2, (hi + 1) / 2),
                ]),
                (true, true) => Rule::OddOdd([
                    Self::norm((lo - 1) / 2, (hi - 1) / 2),
                    Self::norm((lo - 1) / 2, (hi + 1) / 2),
                    Self::norm((lo + 1) / 2, (hi - 1) / 2),
                    Self::norm((lo + 1) / 2, (hi + 1) / 2),
                ]),
            },
        }
    }

    /// `f(a, b)`.
    pub fn f_int(&self, a: u64, b: u64) -> BigInt {
        let key = Self::norm(a, b);
        let mut memo = self.memo.lock().unwrap();
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut stack = vec![key];
        while let Some(&(lo, hi)) = stack.last() {
            if memo.contains_key(&(lo, hi)) {
                stack.pop();
                continue;
            }
            let rule = self.rule(lo, hi);
            let deps: &[(u64, u64)] = match &rule {
                Rule::Base(_) => &[],
                Rule::EvenEven(d) => d,
                Rule::OddEven(d) => d,
                Rule::OddOdd(d) => d,
            };
            let missing: Vec<(u64, u64)> = deps
                .iter()
                .copied()
                .filter(|k| !memo.contains_key(k))
                .collect();
            if !missing.is_empty() {
                stack.extend(missing);
                continue;
            }
            let value = match rule {
                Rule::Base(v) => BigInt::from(v),
                Rule::EvenEven([k]) => 8 * &memo[&k],
                Rule::OddEven([k1, k2]) => 4 * (&memo[&k1] + &memo[&k2]) + 3,
                Rule::OddOdd([k1, k2, k3, k4]) => {
                    2 * (&memo[&k1] + &memo[&k2] + &memo[&k3] + &memo[&k4]) + 2
                }
            };
            memo.insert((lo, hi), value);
            stack.pop();
        }
        memo[&key].clone()
    }

    /// Scaled value `f_C(x, y) = f(a, b) / 8^n` at the common level `n` of
    /// the two dyadic points. The homogeneity branch of the recurrence makes
    /// the result independent of the chosen level.
    pub fn f_dyadic(&self, x: &Dyadic, y: &Dyadic) -> Result<Rational> {
        let level = x.level().max(y.level());
        let a = crate::dyadic::mantissa_u64_at_level(x, level)?;
        let b = crate::dyadic::mantissa_u64_at_level(y, level)?;
        Ok(Rational::from_integer(self.f_int(a, b)) / rational_pow8(level))
    }

    /// `F(a, b, c) = f(a,b) + f(b,c) + f(c,a)`.
    pub fn triple_sum(&self, a: u64, b: u64, c: u64) -> BigInt {
        self.f_int(a, b) + self.f_int(b, c) + self.f_int(c, a)
    }

    /// Sweep `0 <= a <= b <= c <= 2^n` checking `F(a,b,c) <= 8abc`,
    /// recording the equality set (as sorted representatives; `F` is fully
    /// symmetric) and the two structural assertions about it.
    pub fn verify_bound(&self, level: u32) -> BoundReport {
        let top = 1u64 << level;
        let mut report = BoundReport {
            level,
            checked: 0,
            violations: Vec::new(),
            equality_triples: Vec::new(),
            xor_zero_implies_equality: true,
            equality_implies_even_sum: true,
        };
        for a in 0..=top {
            for b in a..=top {
                for c in b..=top {
                    report.checked += 1;
                    let f = self.triple_sum(a, b, c);
                    let bound = BigInt::from(8) * a * b * c;
                    if f > bound {
                        report.violations.push(format!(
                            "F({a},{b},{c}) = {f} exceeds 8abc = {bound}"
                        ));
                        continue;
                    }
                    let equal = f == bound;
                    if equal {
                        report.equality_triples.push([a, b, c]);
                        if (a + b + c) % 2 != 0 {
                            report.equality_implies_even_sum = false;
                            report.violations.push(format!(
                                "equality at ({a},{b},{c}) with odd coordinate sum"
                            ));
                        }
                    } else if a ^ b ^ c == 0 {
                        report.xor_zero_implies_equality = false;
                        report.violations.push(format!(
                            "a^b^c = 0 at ({a},{b},{c}) but F = {f} < {bound}"
                        ));
                    }
                }
            }
        }
        report
    }

    /// Sweep `0 <= a, b <= 2^n` checking symmetry, parity, the two midpoint
    /// relations, and the two block-translation identities
    /// `f(2^n+a, 2^n+b) = 2*8^n + 6*4^n (a+b) + f(a,b)` and
    /// `f(2^n+a, b) = -8^n - 6*4^n a + 4^(n+1) b + 8*2^n ab + f(a,b)`.
    pub fn check_identities(&self, level: u32) -> IdentityReport {
        let top = 1u64 << level;
        let p8 = BigInt::from(1u64) << (3 * level);
        let p4 = BigInt::from(1u64) << (2 * level);
        let p2 = BigInt::from(1u64) << level;
        let mut report = IdentityReport {
            level,
            checked: 0,
            violations: Vec::new(),
        };
        let fail = |msg: String, violations: &mut Vec<String>| {
            if violations.len() < 32 {
                violations.push(msg);
            }
        };
        for a in 0..=top {
            for b in 0..=top {
                report.checked += 1;
                let fab = self.f_int(a, b);
                if fab != self.f_int(b, a) {
                    fail(format!("symmetry fails at ({a},{b})"), &mut report.violations);
                }
                if (&fab + a + b) % 2 != BigInt::zero() {
                    fail(format!("parity fails at ({a},{b})"), &mut report.violations);
                }
                if a % 2 == 1 {
                    let mid = self.f_int(a + 1, b) + self.f_int(a - 1, b);
                    if b % 2 == 0 {
                        if 2 * &fab != mid + 6 {
                            fail(
                                format!("odd/even midpoint relation fails at ({a},{b})"),
                                &mut report.violations,
                            );
                        }
                    } else if 2 * &fab != mid - 2 {
                        fail(
                            format!("odd/odd midpoint relation fails at ({a},{b})"),
                            &mut report.violations,
                        );
                    }
                }
                let shifted_both = self.f_int(top + a, top + b);
                if shifted_both != 2 * &p8 + 6 * &p4 * (a + b) + &fab {
                    fail(
                        format!("diagonal block identity fails at ({a},{b}), n={level}"),
                        &mut report.violations,
                    );
                }
                let shifted_one = self.f_int(top + a, b);
                if shifted_one != -&p8 - 6 * &p4 * a + 4 * &p4 * b + 8 * &p2 * a * b + &fab {
                    fail(
                        format!("single block identity fails at ({a},{b}), n={level}"),
                        &mut report.violations,
                    );
                }
            }
        }
        report
    }

    /// Maximum first-argument increment `N_{n,m} = max |f(a+1,b) - f(a,b)|`
    /// over `a, a+1 in [0, 2^(n+1)]`, `b in [0, 2^(m+1)]`, checked against
    /// the bound `17 (4^n + 4^m) - 19`.
    pub fn lipschitz_check(&self, n: u32, m: u32) -> LipschitzReport {
        let a_top = 1u64 << (n + 1);
        let b_top = 1u64 << (m + 1);
        let mut max = BigInt::zero();
        let mut argmax = (0u64, 0u64);
        for a in 0..a_top {
            for b in 0..=b_top {
                let d = (self.f_int(a + 1, b) - self.f_int(a, b)).abs();
                if d > max {
                    max = d;
                    argmax = (a, b);
                }
            }
        }
        let bound = BigInt::from(17) * ((BigInt::from(1u64) << (2 * n)) + (BigInt::from(1u64) << (2 * m))) - 19;
        LipschitzReport {
            n,
            m,
            holds: max <= bound,
            max_increment: max.to_string(),
            bound: bound.to_string(),
            argmax,
        }
    }
}

/// Finite witness for membership of `(a,b,c)/2^n` in the closure of the
/// Nim-sum-zero set: either the triple XORs to zero directly, or lowering
/// some pair of positive coordinates by one unit does (the all-ones tails of
/// the two lowered binary expansions cancel each other).
///
/// This is an empirically validated characterization, not a proved one; the
/// bound sweep checks it against the actual equality set and nothing else
/// relies on it.
pub fn closure_witness(a: u64, b: u64, c: u64) -> bool {
    if a ^ b ^ c == 0 {
        return true;
    }
    let lowered = |p: u64, q: u64, r: u64| p >= 1 && q >= 1 && (p - 1) ^ (q - 1) ^ r == 0;
    lowered(a, b, c) || lowered(a, c, b) || lowered(b, c, a)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub level: u32,
    pub checked: u64,
    pub violations: Vec<String>,
    pub equality_triples: Vec<[u64; 3]>,
    pub xor_zero_implies_equality: bool,
    pub equality_implies_even_sum: bool,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether the recorded equality set coincides with the set accepted by
    /// [`closure_witness`], over the sorted triples of the sweep.
    pub fn equality_set_matches_closure_witness(&self) -> bool {
        let top = 1u64 << self.level;
        let mut expected = Vec::new();
        for a in 0..=top {
            for b in a..=top {
                for c in b..=top {
                    if closure_witness(a, b, c) {
                        expected.push([a, b, c]);
                    }
                }
            }
        }
        expected == self.equality_triples
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub level: u32,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub n: u32,
    pub m: u32,
    pub holds: bool,
    pub max_increment: String,
    pub bound: String,
    pub argmax: (u64, u64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Independent re-implementation of the recurrence: plain recursion,
    /// no memo, machine integers. Oracle for the table.
    #[allow(clippy::manual_div_ceil)]
    fn f_naive(a: u64, b: u64) -> i128 {
        match (a.min(b), a.max(b)) {
            (0, 0) => 0,
            (0, 1) => -1,
            (1, 1) => 2,
            _ => match (a % 2 == 1, b % 2 == 1) {
                (false, false) => 8 * f_naive(a / 2, b / 2),
                (true, false) => 4 * (f_naive((a - 1) / 2, b / 2) + f_naive((a + 1) / 2, b / 2)) + 3,
                (false, true) => 4 * (f_naive(a / 2, (b - 1) / 2) + f_naive(a / 2, (b + 1) / 2)) + 3,
                (true, true) => {
                    2 * (f_naive((a - 1) / 2, (b - 1) / 2)
                        + f_naive((a - 1) / 2, (b + 1) / 2)
                        + f_naive((a + 1) / 2, (b - 1) / 2)
                        + f_naive((a + 1) / 2, (b + 1) / 2))
                        + 2
                }
            },
        }
    }

    #[test]
    fn base_and_small_values() {
        let t = PotentialTable::new();
        assert_eq!(t.f_int(0, 1), BigInt::from(-1));
        assert_eq!(t.f_int(1, 0), BigInt::from(-1));
        assert_eq!(t.f_int(2, 2), BigInt::from(16));
        assert_eq!(t.f_int(1, 2), BigInt::from(7));
        assert_eq!(t.f_int(1, 3), BigInt::from(2));
        assert_eq!(t.f_int(3, 3), BigInt::from(66));
        assert_eq!(t.f_int(3, 0), BigInt::from(-33));
    }

    #[test]
    fn matches_independent_recurrence() {
        let t = PotentialTable::new();
        for a in 0..=64u64 {
            for b in 0..=64u64 {
                assert_eq!(t.f_int(a, b), BigInt::from(f_naive(a, b)), "({a},{b})");
            }
        }
    }

    #[test]
    fn homogeneity_and_parity() {
        let t = PotentialTable::new();
        for a in 0..=32u64 {
            for b in 0..=32u64 {
                assert_eq!(t.f_int(2 * a, 2 * b), 8 * t.f_int(a, b));
                assert_eq!((t.f_int(a, b) + a + b) % 2, BigInt::zero());
            }
        }
    }

    #[test]
    fn dyadic_values() {
        let t = PotentialTable::new();
        let one = Dyadic::one();
        assert_eq!(t.f_dyadic(&one, &one).unwrap(), rat(2, 1));
        let half = Dyadic::from_u64(1, 1);
        assert_eq!(t.f_dyadic(&half, &half).unwrap(), rat(1, 4));
        let quarter = Dyadic::from_u64(1, 2);
        assert_eq!(t.f_dyadic(&half, &quarter).unwrap(), rat(7, 64));
    }

    #[test]
    fn dyadic_level_independence() {
        let t = PotentialTable::new();
        for n in 0..=6u32 {
            for a in 0..=(1u64 << n) {
                for b in 0..=(1u64 << n) {
                    let lo = Rational::from_integer(t.f_int(a, b)) / rational_pow8(n);
                    let hi = Rational::from_integer(t.f_int(2 * a, 2 * b)) / rational_pow8(n + 1);
                    assert_eq!(lo, hi);
                    let via_points =
                        t.f_dyadic(&Dyadic::from_u64(a, n), &Dyadic::from_u64(b, n)).unwrap();
                    assert_eq!(via_points, lo);
                }
            }
        }
    }

    #[test]
    fn triple_sum_examples() {
        let t = PotentialTable::new();
        assert_eq!(t.triple_sum(0, 0, 0), BigInt::zero());
        assert_eq!(t.triple_sum(1, 1, 0), BigInt::zero()); // equals 8*1*1*0
        assert_eq!(t.triple_sum(1, 1, 1), BigInt::from(6)); // strict: odd sum
        assert_eq!(t.triple_sum(1, 1, 2), BigInt::from(16)); // equals 8*1*1*2
    }

    #[test]
    fn bound_report_level_zero() {
        let t = PotentialTable::new();
        let r = t.verify_bound(0);
        assert!(r.pass());
        assert_eq!(r.checked, 4);
        assert_eq!(r.equality_triples, vec![[0, 0, 0], [0, 1, 1]]);
        assert!(r.equality_set_matches_closure_witness());
    }

    #[test]
    fn bound_report_small_levels() {
        let t = PotentialTable::new();
        for n in 1..=3 {
            let r = t.verify_bound(n);
            assert!(r.pass(), "level {n}: {:?}", r.violations);
            assert!(r.xor_zero_implies_equality);
            assert!(r.equality_implies_even_sum);
            assert!(r.equality_set_matches_closure_witness(), "level {n}");
        }
    }

    #[test]
    fn closure_witness_examples() {
        assert!(closure_witness(1, 1, 2)); // lower first and third: 0^1^1 = 0
        assert!(!closure_witness(1, 1, 1));
        for a in 0..16u64 {
            for b in 0..16u64 {
                assert!(closure_witness(a, b, a ^ b));
            }
        }
    }

    #[test]
    fn identities_small_levels() {
        let t = PotentialTable::new();
        for n in 0..=3 {
            let r = t.check_identities(n);
            assert!(r.pass(), "level {n}: {:?}", r.violations);
        }
        // the diagonal block identity pins f(2,1) from the base square
        assert_eq!(t.f_int(2, 1), BigInt::from(2 + 6 - 1));
    }

    #[test]
    fn lipschitz_base_case() {
        let t = PotentialTable::new();
        let r = t.lipschitz_check(0, 0);
        assert!(r.holds);
        assert_eq!(r.max_increment, "15");
        assert_eq!(r.bound, "15");
        assert!(t.lipschitz_check(1, 1).holds);
        assert!(t.lipschitz_check(3, 2).holds);
    }

    #[test]
    fn scaled_bound_on_unit_interval() {
        // F_C(x,y,z) <= 8xyz on dyadic triples, equality when z = x xor y
        // (unit-interval xor, including the x = 1 reflection branch)
        let t = PotentialTable::new();
        let eight = rat(8, 1);
        for n in 0..=3u32 {
            let top = 1u64 << n;
            for a in 0..=top {
                for b in 0..=top {
                    for c in 0..=top {
                        let x = Dyadic::from_u64(a, n);
                        let y = Dyadic::from_u64(b, n);
                        let z = Dyadic::from_u64(c, n);
                        let fc = t.f_dyadic(&x, &y).unwrap()
                            + t.f_dyadic(&y, &z).unwrap()
                            + t.f_dyadic(&z, &x).unwrap();
                        let rhs =
                            &eight * x.to_rational() * y.to_rational() * z.to_rational();
                        assert!(fc <= rhs, "F_C > 8xyz at ({a},{b},{c})/2^{n}");
                        if crate::dyadic::nim_add_unit(&x, &y).unwrap() == z {
                            assert_eq!(fc, rhs, "equality fails at ({a},{b},{c})/2^{n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn faulty_base_breaks_identities() {
        let t = PotentialTable::with_bases(0, -1, 3);
        let r = t.check_identities(1);
        assert!(!r.pass());
    }

    #[test]
    fn concurrent_reads_are_deterministic() {
        let t = std::sync::Arc::new(PotentialTable::new());
        let expected = PotentialTable::new();
        let handles: Vec<_> = (0..4u64)
            .map(|k| {
                let t = t.clone();
                std::thread::spawn(move || {
                    (0..=40u64).map(|a| t.f_int(a, a + k)).collect::<Vec<_>>()
                })
            })
            .collect();
        for (k, h) in handles.into_iter().enumerate() {
            let got = h.join().unwrap();
            for (a, v) in got.into_iter().enumerate() {
                assert_eq!(v, expected.f_int(a as u64, a as u64 + k as u64));
            }
        }
    }
}
