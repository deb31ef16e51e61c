//! Exact rational scalars.
//!
//! Clock values, parameter values, delays and constraint constants are all
//! rationals in lowest terms with a positive denominator. `BigRational`
//! already guarantees that normal form, so the toolkit uses it directly.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Least common multiple of the denominators of `values`; `1` for an empty
/// iterator. Always positive.
pub fn denominator_lcm<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// True iff `r` is a nonnegative integer.
pub fn is_nonnegative_integer(r: &Rational) -> bool {
    r.is_integer() && !r.is_negative()
}

/// Collects the values of an iterator scaled by `factor`.
pub fn scale_all<'a, I>(values: I, factor: &BigInt) -> Vec<Rational>
where
    I: IntoIterator<Item = &'a Rational>,
{
    let f = Rational::from_integer(factor.clone());
    values.into_iter().map(|r| r * &f).collect()
}
