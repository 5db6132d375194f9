//! The cumulative XOR integral `I(a,b) = ∫₀^a ∫₀^b x⊕y dy dx` on dyadic
//! arguments, and the exact unit-square integrals derived from it.
//!
//! Evaluation peels one binary digit per step:
//!
//! * `I(a, b) = 0` when `a = 0` or `b = 0`; `I(a, 1) = a/2`
//! * both args `<= 1/2`: `I(a, b) = I(2a, 2b) / 8`
//! * one arg above `1/2`: `I(1/2 + a, b) = ab/2 + b/8 + I(a, b)`
//! * both above: `I(1/2 + a, 1/2 + b) = 1/16 + 3(a + b)/8 + I(a, b)`
//!
//! The `I(·, 1) = a/2` base case is load-bearing: without it the pair
//! `(1, 1) -> (1/2, 1/2) -> (1, 1)` cycles, since scaling does not shorten
//! the mantissas. With it, every step removes a mantissa bit or lowers a
//! level, so the total bit length strictly decreases between shifts.

use crate::rational::{rat, rational_pow8};
use crate::{Dyadic, Error, Rational, Result};
use num_traits::{One, Zero};

/// Exact value of the cumulative XOR integral at dyadic arguments in `[0,1]`.
pub fn i_eval(a: &Dyadic, b: &Dyadic) -> Result<Rational> {
    for v in [a, b] {
        if !v.in_unit_interval() {
            return Err(Error::OutsideUnitInterval(v.to_string()));
        }
    }
    let half = rat(1, 2);
    let mut x = a.to_rational();
    let mut y = b.to_rational();
    let mut acc = Rational::zero();
    let mut scale = Rational::one();
    let mut fuel = 4 * (a.level() + b.level() + a.mantissa().bits() as u32 + b.mantissa().bits() as u32) + 64;
    loop {
        if fuel == 0 {
            return Err(Error::Internal("integral recursion did not terminate".into()));
        }
        fuel -= 1;
        if x.is_zero() || y.is_zero() {
            return Ok(acc);
        }
        if x.is_one() {
            return Ok(acc + scale * (&y / rat(2, 1)));
        }
        if y.is_one() {
            return Ok(acc + scale * (&x / rat(2, 1)));
        }
        let x_low = x <= half;
        let y_low = y <= half;
        if x_low && y_low {
            scale /= rat(8, 1);
            x *= rat(2, 1);
            y *= rat(2, 1);
        } else if !x_low && y_low {
            let xs = &x - &half;
            acc += &scale * (&half * &xs * &y + &y / rat(8, 1));
            x = xs;
        } else if x_low && !y_low {
            let ys = &y - &half;
            acc += &scale * (&half * &ys * &x + &x / rat(8, 1));
            y = ys;
        } else {
            let xs = &x - &half;
            let ys = &y - &half;
            acc += &scale * (rat(1, 16) + rat(3, 8) * (&xs + &ys));
            x = xs;
            y = ys;
        }
    }
}

/// Independent oracle for `I(p/2^n, q/2^n)`: the level-`n` cell
/// decomposition evaluated by a plain double loop. On each grid cell the
/// kernel `x⊕y` is the cell's index XOR plus a rescaled copy of itself, so
///
/// `I(p/2^n, q/2^n) = 8^{-n} Σ_{i<p, j<q} (i⊕j)  +  p·q·8^{-n}/2`.
///
/// Deliberately free of bit tricks and of the recurrence above.
pub fn closed_sum_oracle(p: u64, q: u64, level: u32) -> Result<Rational> {
    let top = 1u64 << level;
    if p > top || q > top {
        return Err(Error::InvalidInput(format!(
            "oracle arguments ({p},{q}) exceed 2^{level}"
        )));
    }
    let mut sum: u128 = 0;
    for i in 0..p {
        for j in 0..q {
            sum += (i ^ j) as u128;
        }
    }
    let scale = rational_pow8(level);
    let head = Rational::from_integer(sum.into()) / &scale;
    let tail = Rational::from_integer((p as u128 * q as u128).into()) / (rat(2, 1) * &scale);
    Ok(head + tail)
}

/// The dual potential through its integral representation:
/// `f_C(x, y) = 8 I(x,y) - 2 I(x,x) - 2 I(y,y)`.
pub fn f_via_integral(x: &Dyadic, y: &Dyadic) -> Result<Rational> {
    Ok(rat(8, 1) * i_eval(x, y)? - rat(2, 1) * i_eval(x, x)? - rat(2, 1) * i_eval(y, y)?)
}

/// A linear form `c + k·X` in one unknown, for the self-similar fixed
/// points below.
#[derive(Clone)]
struct Lin {
    c: Rational,
    k: Rational,
}

impl Lin {
    fn constant(c: Rational) -> Self {
        Lin { c, k: Rational::zero() }
    }

    fn unknown() -> Self {
        Lin { c: Rational::zero(), k: Rational::one() }
    }

    fn add(self, other: Lin) -> Lin {
        Lin { c: self.c + other.c, k: self.k + other.k }
    }

    fn scale(self, s: &Rational) -> Lin {
        Lin { c: self.c * s, k: self.k * s }
    }

    /// Solve `X = c + k X`.
    fn solve(self) -> Rational {
        self.c / (Rational::one() - self.k)
    }
}

/// `∫∫_{[0,1]²} x (x⊕y) dx dy = 1/4`.
///
/// Derivation by halving: with `x = (a+σ)/2`, `y = (b+τ)/2` over the four
/// quadrant labels `a, b ∈ {0,1}`, the kernel splits as
/// `x⊕y = ((a⊕b) + σ⊕τ)/2`, and `∫∫ σ⊕τ = I(1,1) = 1/2`.
pub fn xor_first_moment() -> Rational {
    let u_mass = rat(1, 2);
    let mut total = Lin::constant(Rational::zero());
    for a in 0..2u64 {
        for b in 0..2u64 {
            let axb = rat((a ^ b) as i64, 1);
            let a_r = rat(a as i64, 1);
            // ∫∫ (a+σ)((a⊕b) + u) dσ dτ = (a⊕b)(a + 1/2) + a·∫u + ∫σu
            let term = Lin::constant(&axb * (&a_r + rat(1, 2)) + &a_r * &u_mass)
                .add(Lin::unknown());
            total = total.add(term);
        }
    }
    total.scale(&rat(1, 16)).solve()
}

/// `∫∫_{[0,1]²} x y (x⊕y) dx dy = 3/28`: the exact cost of the limiting
/// minimizing XOR plan.
pub fn xy_xor_integral() -> Rational {
    let u_mass = rat(1, 2);
    let m_s = xor_first_moment();
    let mut total = Lin::constant(Rational::zero());
    for a in 0..2u64 {
        for b in 0..2u64 {
            let axb = rat((a ^ b) as i64, 1);
            let a_r = rat(a as i64, 1);
            let b_r = rat(b as i64, 1);
            // ∫∫ (a+σ)(b+τ)((a⊕b) + u)
            //   = (a⊕b)(a+1/2)(b+1/2) + ab·∫u + (a+b)·∫σu + ∫στu
            let term = Lin::constant(
                &axb * (&a_r + rat(1, 2)) * (&b_r + rat(1, 2))
                    + &a_r * &b_r * &u_mass
                    + (&a_r + &b_r) * &m_s,
            )
            .add(Lin::unknown());
            total = total.add(term);
        }
    }
    total.scale(&rat(1, 32)).solve()
}

/// `∫∫_{[0,1]²} f_C dx dy = 2/7`, from the half-square translation
/// identities of `f_C`:
///
/// * `f_C(1/2 + u, v)       = -1/8 - 3u/2 + v + 4uv + f_C(u, v)`
/// * `f_C(1/2 + u, 1/2 + v) =  1/4 + 3(u + v)/2     + f_C(u, v)`
///
/// and the scaling `∫_{[0,1/2]²} f_C(u,v) = S/32`.
pub fn fc_unit_square_integral() -> Rational {
    // ∫∫_{[0,1/2]²} (α + βu + γv + δuv) du dv
    let bilinear = |alpha: Rational, beta: Rational, gamma: Rational, delta: Rational| {
        alpha / rat(4, 1) + (beta + gamma) / rat(16, 1) + delta / rat(64, 1)
    };
    let quarter = Lin::unknown().scale(&rat(1, 32));
    let low = quarter.clone();
    let mixed = Lin::constant(bilinear(rat(-1, 8), rat(-3, 2), rat(1, 1), rat(4, 1)))
        .add(quarter.clone());
    let diag = Lin::constant(bilinear(rat(1, 4), rat(3, 2), rat(3, 2), rat(0, 1)))
        .add(quarter);
    low.add(mixed.clone()).add(mixed).add(diag).solve()
}

/// Value of the continuous dual objective
/// `3 · (1/8) · ∫∫ f_C dx dy = 3/28`, which equals the primal minimum.
pub fn dual_objective_value() -> Rational {
    rat(3, 8) * fc_unit_square_integral()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialTable;
    use crate::rational::rat;
    use num_traits::Signed;

    fn dy(m: u64, n: u32) -> Dyadic {
        Dyadic::from_u64(m, n)
    }

    #[test]
    fn point_values() {
        let one = Dyadic::one();
        assert_eq!(i_eval(&one, &one).unwrap(), rat(1, 2));
        assert_eq!(i_eval(&dy(1, 1), &dy(1, 1)).unwrap(), rat(1, 16));
        assert_eq!(i_eval(&dy(3, 2), &dy(1, 1)).unwrap(), rat(5, 32));
        assert_eq!(i_eval(&dy(7, 3), &Dyadic::zero()).unwrap(), rat(0, 1));
        assert!(i_eval(&dy(3, 1), &one).is_err());
    }

    #[test]
    fn oracle_values() {
        assert_eq!(closed_sum_oracle(8, 8, 3).unwrap(), rat(1, 2));
        assert_eq!(closed_sum_oracle(1, 1, 1).unwrap(), rat(1, 16));
        // I(1/2, 1) = 1/4 by I(a,1) = a/2 at a = 1/2
        assert_eq!(closed_sum_oracle(2, 4, 2).unwrap(), rat(1, 4));
        assert!(closed_sum_oracle(5, 1, 2).is_err());
    }

    #[test]
    fn oracle_equivalence_small_levels() {
        for n in 0..=4u32 {
            for p in 0..=(1u64 << n) {
                for q in 0..=(1u64 << n) {
                    let via_eval = i_eval(&dy(p, n), &dy(q, n)).unwrap();
                    let via_oracle = closed_sum_oracle(p, q, n).unwrap();
                    assert_eq!(via_eval, via_oracle, "(p,q,n) = ({p},{q},{n})");
                }
            }
        }
    }

    #[test]
    fn symmetry_and_homogeneity() {
        for n in 0..=6u32 {
            for p in 0..=(1u64 << n) {
                for q in 0..=(1u64 << n) {
                    let a = dy(p, n);
                    let b = dy(q, n);
                    assert_eq!(i_eval(&a, &b).unwrap(), i_eval(&b, &a).unwrap());
                    if p <= (1 << n) / 2 && q <= (1 << n) / 2 {
                        let da = dy(2 * p, n);
                        let db = dy(2 * q, n);
                        assert_eq!(
                            i_eval(&da, &db).unwrap(),
                            rat(8, 1) * i_eval(&a, &b).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn unit_edge_is_linear() {
        let one = Dyadic::one();
        for n in 0..=8u32 {
            for m in 0..=(1u64 << n) {
                let a = dy(m, n);
                assert_eq!(i_eval(&a, &one).unwrap(), a.to_rational() / rat(2, 1));
            }
        }
    }

    #[test]
    fn integral_representation_matches_recurrence() {
        let table = PotentialTable::new();
        let one = Dyadic::one();
        assert_eq!(f_via_integral(&one, &one).unwrap(), rat(2, 1));
        assert_eq!(f_via_integral(&dy(1, 1), &dy(1, 2)).unwrap(), rat(7, 64));
        for n in 0..=4u32 {
            for a in 0..=(1u64 << n) {
                for b in 0..=(1u64 << n) {
                    let x = dy(a, n);
                    let y = dy(b, n);
                    assert_eq!(
                        f_via_integral(&x, &y).unwrap(),
                        table.f_dyadic(&x, &y).unwrap(),
                        "({a},{b})/2^{n}"
                    );
                }
            }
        }
        // f_via_integral(0, y) = -2 I(y,y)
        let y = dy(3, 2);
        assert_eq!(
            f_via_integral(&Dyadic::zero(), &y).unwrap(),
            rat(-2, 1) * i_eval(&y, &y).unwrap()
        );
    }

    #[test]
    fn exact_moments() {
        assert_eq!(xor_first_moment(), rat(1, 4));
        assert_eq!(xy_xor_integral(), rat(3, 28));
        assert_eq!(fc_unit_square_integral(), rat(2, 7));
        assert_eq!(dual_objective_value(), rat(3, 28));
        assert!(dual_objective_value() > rat(0, 1));
    }

    #[test]
    fn riemann_sums_converge_to_moment() {
        // Independent oracle for 3/28: plain left-endpoint Riemann sums of
        // x·y·(x⊕y), error O(2^-n).
        for n in [6u32, 8, 10] {
            let top = 1u64 << n;
            let mut sum: u128 = 0;
            for i in 0..top {
                for j in 0..top {
                    sum += (i as u128) * (j as u128) * ((i ^ j) as u128);
                }
            }
            let riemann = Rational::from_integer(sum.into())
                / Rational::from_integer((1u128 << (5 * n)).into());
            let gap = (riemann - rat(3, 28)).abs();
            let tol = rat(2, 1) / crate::rational::rational_pow2(n);
            assert!(gap <= tol, "n = {n}: gap {gap} exceeds {tol}");
        }
    }
}
