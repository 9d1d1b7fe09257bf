//! Directed rational enclosures of real powers `x^(a/b)`.
//!
//! Roots are taken on integers scaled by `2^(PRECISION_BITS * b)`, so the
//! lower bound is `floor(root * 2^k) / 2^k` and the upper bound adds one ulp.
//! Exact rational roots are returned exactly.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::Rational;

pub const PRECISION_BITS: u32 = 96;

fn to_biguint(n: &BigInt) -> BigUint {
    n.to_biguint().expect("nonnegative")
}

/// `(lower, upper)` with `lower <= x^(1/k) <= upper`, both equal when the root
/// is rational. `x` must be positive.
pub fn root_bounds(x: &Rational, k: u32) -> (Rational, Rational) {
    assert!(x.is_positive(), "root of a nonpositive number");
    assert!(k >= 1);
    if k == 1 {
        return (x.clone(), x.clone());
    }
    let n = to_biguint(x.numer());
    let d = to_biguint(x.denom());
    let rn = n.nth_root(k);
    let rd = d.nth_root(k);
    if Pow::pow(&rn, k) == n && Pow::pow(&rd, k) == d {
        let r = Rational::new(
            BigInt::from_biguint(Sign::Plus, rn),
            BigInt::from_biguint(Sign::Plus, rd),
        );
        return (r.clone(), r);
    }
    let shift = (PRECISION_BITS as u64) * k as u64;
    let scaled = (n << shift) / d;
    let m = scaled.nth_root(k);
    let denom = BigInt::one() << PRECISION_BITS as usize;
    let lower = Rational::new(BigInt::from_biguint(Sign::Plus, m.clone()), denom.clone());
    let upper = Rational::new(BigInt::from_biguint(Sign::Plus, m + 1u32), denom);
    (lower, upper)
}

fn int_pow(base: &Rational, e: &BigInt) -> Rational {
    let e_abs: u32 = e
        .abs()
        .try_into()
        .expect("exponent numerator too large for exact powering");
    let p = Pow::pow(base, e_abs);
    if e.is_negative() {
        p.recip()
    } else {
        p
    }
}

/// `(lower, upper)` enclosing `base^exponent` for positive `base`.
pub fn pow_bounds(base: &Rational, exponent: &Rational) -> (Rational, Rational) {
    assert!(base.is_positive());
    if exponent.is_zero() {
        return (Rational::one(), Rational::one());
    }
    let powered = int_pow(base, exponent.numer());
    let k: u32 = exponent
        .denom()
        .try_into()
        .expect("exponent denominator too large");
    root_bounds(&powered, k)
}

pub fn pow_upper(base: &Rational, exponent: &Rational) -> Rational {
    pow_bounds(base, exponent).1
}

pub fn pow_lower(base: &Rational, exponent: &Rational) -> Rational {
    pow_bounds(base, exponent).0
}
