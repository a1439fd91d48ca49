//! Exact rational arithmetic and its text formats.
//!
//! All expectations in this crate are exact rationals (arbitrary-precision
//! integers over arbitrary-precision positive integers, always in lowest
//! terms). The backing type is [`num::BigRational`]; this module adds the
//! constructors and the `p/q` text format used by the CLI.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number: reduced fraction of big integers, denominator > 0.
pub type Rational = num::BigRational;

/// `num/den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// An integer as an exact rational.
pub fn rat_int(k: impl Into<BigInt>) -> Rational {
    Rational::from_integer(k.into())
}

/// Formats a rational as `p/q`, or as plain digits when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or plain-integer text produced by [`format_rational`].
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num
        .parse()
        .map_err(|_| Error::InvalidInput(format!("malformed rational `{s}`")))?;
    let denom: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::InvalidInput(format!("malformed rational `{s}`")))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::InvalidInput(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(numer, denom))
}

/// Converts to `f64`, tolerating operands wider than the `f64` range.
///
/// `BigInt::to_f64` overflows to infinity past ~1024 bits, which would turn
/// wide fractions into `inf/inf`; both operands are pre-shifted down by a
/// common power of two so the quotient stays finite.
pub fn to_f64(r: &Rational) -> f64 {
    let (numer, denom) = (r.numer(), r.denom());
    let bits = numer.bits().max(denom.bits());
    if bits <= 900 {
        return numer.to_f64().unwrap_or(f64::NAN) / denom.to_f64().unwrap_or(f64::NAN);
    }
    let shift = bits - 900;
    let n = numer >> shift;
    let d = denom >> shift;
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// Renders a rational in fixed-point decimal with `places` fractional digits,
/// rounding half away from zero. Exact: no float arithmetic involved.
pub fn decimal_string(r: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = (r * Rational::from_integer(scale.clone())).round();
    let units = scaled.to_integer();
    let sign = if units.is_negative() { "-" } else { "" };
    let abs = units.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{frac:0>width$}",
            frac = frac_part,
            width = places as usize
        )
    }
}
