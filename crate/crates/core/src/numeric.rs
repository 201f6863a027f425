//! Numeric modes.
//!
//! Every payoff and operator formula is written once against [`Scalar`] and
//! evaluated either in `f64` or in exact arbitrary-precision rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    Exact,
    Float,
}

/// Ordered field used by the formulas.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    const MODE: NumericMode;

    fn from_u64(n: u64) -> Self;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num) / Self::from_u64(den)
    }

    fn to_f64(&self) -> f64;

    /// Converts an exact rational into this mode.
    fn from_rational(q: &BigRational) -> Self;

    /// Non-strict `self >= other`. Float mode absorbs rounding noise so that
    /// exact ties stay ties.
    fn at_least(&self, other: &Self) -> bool {
        self >= other
    }
}

/// Relative slack for float comparisons that decide stopping sets.
pub const TIE_TOLERANCE: f64 = 1e-12;

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }

    fn at_least(&self, other: &Self) -> bool {
        *self >= *other - TIE_TOLERANCE * other.abs().max(1.0)
    }
}

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

/// Correctly handles numerators and denominators far outside the `f64` range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(q) {
        if x.is_finite() {
            return x;
        }
    }
    // Shift both parts down to ~64 significant bits before dividing.
    let num = q.numer();
    let den = q.denom();
    let shift_n = num.bits().saturating_sub(64);
    let shift_d = den.bits().saturating_sub(64);
    let n = (num >> shift_n).to_f64().unwrap_or(0.0);
    let d = (den >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// Parses `"p/q"`, an integer, or a decimal literal (`"0.125"`, `"1e-3"`) into
/// an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(BigRational::new(p, q));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("not a number: {t:?}")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a number: {t:?}")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().expect("digits checked above")
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let q = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(q)
}

/// Canonical reduced fraction text, `"p/q"`, or `"p"` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Fixed twelve-significant-digit rendering used for every float in reports.
pub fn format_sig12(x: f64) -> String {
    format_sig(x, 12)
}

pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Let the scientific formatter do the rounding, then read off the exponent.
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if !(-6..=15).contains(&exp) {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Rounds to the value that [`format_sig12`] prints, so emitted and re-parsed
/// numbers compare equal.
pub fn round_sig12(x: f64) -> f64 {
    format_sig12(x).parse().unwrap_or(x)
}
