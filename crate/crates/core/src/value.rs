use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational probability in `[0, 1]`.
///
/// Rendered as a reduced fraction (`1/6`), or `0` / `1` at the bounds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbabilityValue(BigRational);

impl ProbabilityValue {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidProbability(format!("{numerator}/0")));
        }
        Self::from_ratio(BigRational::new(numerator.into(), denominator.into()))
    }

    pub fn from_ratio(ratio: BigRational) -> Result<Self> {
        if ratio < BigRational::zero() || ratio > BigRational::one() {
            return Err(Error::InvalidProbability(render(&ratio)));
        }
        Ok(Self(ratio))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `1 - p`, exact.
    pub fn complement(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }
}

pub(crate) fn render(ratio: &BigRational) -> String {
    if ratio.is_integer() {
        ratio.numer().to_string()
    } else {
        format!("{}/{}", ratio.numer(), ratio.denom())
    }
}

impl fmt::Display for ProbabilityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.0))
    }
}

pub(crate) fn ratio_to_f64(ratio: &BigRational) -> f64 {
    ratio.to_f64().unwrap_or(f64::NAN)
}

/// Parses the literal forms accepted in `.sol` files: a fraction `a/b` or a
/// plain decimal such as `1`, `0.5`, `0.125`.
pub fn parse_ratio(text: &str) -> Option<BigRational> {
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_digits(num)?;
        let den = parse_digits(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (int, frac) = match text.split_once('.') {
        Some((int, frac)) => (int, frac),
        None => (text, ""),
    };
    let int = parse_digits(int)?;
    if text.contains('.') && frac.is_empty() {
        return None;
    }
    let mut value = BigRational::from_integer(int);
    if !frac.is_empty() {
        let digits = parse_digits(frac)?;
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        value += BigRational::new(digits, scale);
    }
    Some(value)
}

fn parse_digits(text: &str) -> Option<BigInt> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

impl FromStr for ProbabilityValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ratio = parse_ratio(s.trim()).ok_or_else(|| Error::InvalidProbability(s.to_string()))?;
        Self::from_ratio(ratio)
    }
}

/// Formats `x` with `digits` significant digits, dropping trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let rounded: f64 = sci.parse().unwrap_or(x);
    format!("{rounded}")
}
