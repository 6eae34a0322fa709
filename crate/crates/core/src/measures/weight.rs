use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::loglinear::{ratio_to_f64, LogLinear};
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Tolerance on total mass and on entropy comparisons in binary64 mode.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

/// Entropy values: exact [`LogLinear`] for rationals, `f64` for floats.
pub trait Entropy: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Multiplication by a nonnegative integer.
    fn times(&self, k: u64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact comparison for [`LogLinear`]; for `f64`, values within a
    /// relative `1e-12` compare equal.
    fn compare(&self, other: &Self) -> Result<Ordering>;
}

impl Entropy for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, k: u64) -> Self {
        self * k as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn compare(&self, other: &Self) -> Result<Ordering> {
        let scale = 1f64.max(f64::abs(*self)).max(f64::abs(*other));
        if (self - other).abs() <= FLOAT_MASS_TOL * scale {
            Ok(Ordering::Equal)
        } else {
            self.partial_cmp(other).ok_or_else(|| Error::Undecided("NaN entropy".into()))
        }
    }
}

impl Entropy for LogLinear {
    fn zero() -> Self {
        LogLinear::zero()
    }
    fn add(&self, other: &Self) -> Self {
        LogLinear::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        LogLinear::sub(self, other)
    }
    fn times(&self, k: u64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }
    fn to_f64(&self) -> f64 {
        LogLinear::to_f64(self)
    }
    fn compare(&self, other: &Self) -> Result<Ordering> {
        self.certified_cmp(other)
    }
}

/// Probability weights. Implemented for `f64` and exact rationals.
pub trait Weight: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    type H: Entropy;
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_f64(x: f64) -> Result<Self>;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs(&self) -> Self;
    fn cmp_weight(&self, other: &Self) -> Ordering;
    /// `-p ln p`, zero for `p = 0`.
    fn entropy_term(&self) -> Self::H;
    /// `self · ln(n)`.
    fn times_ln(&self, n: u64) -> Self::H;
    /// Whether `total` is an acceptable total mass for a probability measure.
    fn is_unit_mass(total: &Self) -> bool;

    fn add_assign(&mut self, other: &Self) {
        *self = Weight::add(self, other);
    }

    fn scale_int(&self, k: i64) -> Self {
        self.mul(&Self::from_ratio(k, 1))
    }
}

impl Weight for f64 {
    type H = f64;
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::InvalidMeasure(format!("non-finite weight {x}")))
        }
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn cmp_weight(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn entropy_term(&self) -> f64 {
        if *self <= 0.0 {
            0.0
        } else {
            -self * self.ln()
        }
    }
    fn times_ln(&self, n: u64) -> f64 {
        self * (n as f64).ln()
    }
    fn is_unit_mass(total: &Self) -> bool {
        (total - 1.0).abs() <= FLOAT_MASS_TOL
    }
}

impl Weight for Rational {
    type H = LogLinear;
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    /// Exact binary value of `x` (every finite double is a dyadic rational).
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x).ok_or_else(|| Error::InvalidMeasure(format!("non-finite weight {x}")))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn cmp_weight(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn entropy_term(&self) -> LogLinear {
        if Weight::is_zero(self) {
            LogLinear::zero()
        } else {
            LogLinear::entropy_term(self)
        }
    }
    fn times_ln(&self, n: u64) -> LogLinear {
        LogLinear::ln_of(n, self.clone())
    }
    fn is_unit_mass(total: &Self) -> bool {
        One::is_one(total)
    }
}

/// Parses `"3/4"`, `"0.75"` or `"1"` into a weight. Decimal literals are
/// exact in rational mode (`0.1` is one tenth, not its binary neighbour).
pub fn parse_weight<W: Weight>(text: &str) -> Result<W> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid weight literal `{t}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(W::from_ratio(n, d));
    }
    if W::EXACT {
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 18 {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let num: i64 = digits.parse().map_err(|_| bad())?;
        let den = 10i64.pow(frac.len() as u32);
        Ok(W::from_ratio(if neg { -num } else { num }, den))
    } else {
        let x: f64 = t.parse().map_err(|_| bad())?;
        W::from_f64(x)
    }
}
