//! Scalar abstraction for the numeric modules.
//!
//! Everything in `analysis` and `queueing` is written once against [`Scalar`]
//! and instantiated with either [`crate::Exact`] (exact rationals, used by the
//! identity tests) or `f64` (used for large parameters and diagnostics).

use num::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric types usable by the analysis and queueing code.
///
/// Automatically implemented for any type with ring/field operations plus
/// conversions from and to primitive integers/floats. `BigRational` and `f64`
/// both qualify.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + ToPrimitive + std::fmt::Debug {}

impl<T> Scalar for T where T: Clone + PartialOrd + Num + FromPrimitive + ToPrimitive + std::fmt::Debug {}

/// `u` as a scalar. Panics only if the scalar cannot represent small
/// integers, which no supported instantiation does.
pub fn from_usize<S: Scalar>(u: usize) -> S {
    S::from_usize(u).expect("scalar must represent small integers")
}

/// The fraction `a / b` as a scalar.
pub fn ratio<S: Scalar>(a: usize, b: usize) -> S {
    from_usize::<S>(a) / from_usize::<S>(b)
}

/// Parses a plain decimal string (`"3"`, `"0.25"`, `"-1.5"`) into an exact
/// rational. Exponents are not supported; CLI inputs are plain decimals.
pub fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    use num::BigInt;
    let s = s.trim();
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::from(0) } else { digits.parse().ok()? };
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(num * sign, den))
}
