//! Extended-precision scalar type and the precision context threaded through
//! every computation.
//!
//! [`Real`] is a thin newtype over an MPFR float. Binary operations produce a
//! result at the larger of the two operand precisions, so values created from
//! one [`PrecisionCtx`] stay at that precision throughout a computation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// Mantissa size and requested relative accuracy for a computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionCtx {
    bits: u32,
    target_tol: f64,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx {
            bits: Self::DEFAULT_BITS,
            target_tol: Self::DEFAULT_TOL,
        }
    }
}

impl PrecisionCtx {
    pub const DEFAULT_BITS: u32 = 256;
    pub const DEFAULT_TOL: f64 = 1e-60;
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32, target_tol: f64) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::domain(
                "PrecisionCtx",
                format!("bits = {bits} is below the minimum of {}", Self::MIN_BITS),
            ));
        }
        if !(target_tol > 0.0 && target_tol < 1.0) {
            return Err(Error::domain(
                "PrecisionCtx",
                format!("target_tol = {target_tol:e} must lie in (0, 1)"),
            ));
        }
        Ok(PrecisionCtx { bits, target_tol })
    }

    /// Context with the given mantissa size and a tolerance scaled like the
    /// default pair (256 bits, 1e-60).
    pub fn with_bits(bits: u32) -> Result<Self> {
        let tol = 10f64.powf(-60.0 * f64::from(bits) / 256.0).max(f64::MIN_POSITIVE);
        Self::new(bits, tol)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn target_tol(&self) -> f64 {
        self.target_tol
    }

    /// Same tolerance, `extra` more mantissa bits.
    pub fn with_guard(&self, extra: u32) -> PrecisionCtx {
        PrecisionCtx {
            bits: self.bits + extra,
            target_tol: self.target_tol,
        }
    }

    pub fn with_tol(&self, target_tol: f64) -> PrecisionCtx {
        PrecisionCtx {
            bits: self.bits,
            target_tol,
        }
    }

    /// Twice the bits and the squared tolerance.
    pub fn doubled(&self) -> PrecisionCtx {
        PrecisionCtx {
            bits: 2 * self.bits,
            target_tol: (self.target_tol * self.target_tol).max(f64::MIN_POSITIVE),
        }
    }

    pub fn tol(&self) -> Real {
        self.real(self.target_tol)
    }

    /// 2^-bits, the unit roundoff of this context.
    pub fn epsilon(&self) -> Real {
        Real(Float::with_val(self.bits, Float::i_exp(1, -(self.bits as i32))))
    }

    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.bits)
    }

    pub fn int(&self, n: i64) -> Real {
        Real::from_i64(n, self.bits)
    }

    pub fn ratio(&self, num: i64, den: i64) -> Real {
        Real::from_i64(num, self.bits) / den
    }

    pub fn zero(&self) -> Real {
        self.int(0)
    }

    pub fn one(&self) -> Real {
        self.int(1)
    }

    pub fn pi(&self) -> Real {
        Real(Float::with_val(self.bits, Constant::Pi))
    }

    pub fn euler_gamma(&self) -> Real {
        Real(Float::with_val(self.bits, Constant::Euler))
    }

    pub fn ln2(&self) -> Real {
        Real(Float::with_val(self.bits, Constant::Log2))
    }

    pub fn from_rational(&self, q: &Rational) -> Real {
        Real(Float::with_val(self.bits, q))
    }

    /// Parse a decimal literal at this precision (exactly rounded).
    pub fn parse(&self, text: &str) -> Result<Real> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::Usage(format!("cannot parse '{text}' as a number: {e}")))?;
        Ok(Real(Float::with_val(self.bits, parsed)))
    }
}

/// Extended-precision real scalar.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_f64(x: f64, bits: u32) -> Real {
        Real(Float::with_val(bits, x))
    }

    pub fn from_i64(n: i64, bits: u32) -> Real {
        Real(Float::with_val(bits, n))
    }

    pub fn from_float(f: Float) -> Real {
        Real(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Rounded copy at a different precision.
    pub fn with_prec(&self, bits: u32) -> Real {
        Real(Float::with_val(bits, &self.0))
    }

    pub fn zero_like(&self) -> Real {
        Real(Float::with_val(self.prec(), 0))
    }

    pub fn one_like(&self) -> Real {
        Real(Float::with_val(self.prec(), 1))
    }

    pub fn lit(&self, x: f64) -> Real {
        Real(Float::with_val(self.prec(), x))
    }

    pub fn int_like(&self, n: i64) -> Real {
        Real(Float::with_val(self.prec(), n))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    pub fn abs(&self) -> Real {
        Real(self.0.clone().abs())
    }

    pub fn recip(&self) -> Real {
        Real(self.0.clone().recip())
    }

    pub fn sqr(&self) -> Real {
        Real(self.0.clone().square())
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.clone().sqrt())
    }

    pub fn cbrt(&self) -> Real {
        Real(self.0.clone().cbrt())
    }

    pub fn ln(&self) -> Real {
        Real(self.0.clone().ln())
    }

    pub fn exp(&self) -> Real {
        Real(self.0.clone().exp())
    }

    pub fn sin(&self) -> Real {
        Real(self.0.clone().sin())
    }

    pub fn cos(&self) -> Real {
        Real(self.0.clone().cos())
    }

    pub fn sinh(&self) -> Real {
        Real(self.0.clone().sinh())
    }

    pub fn cosh(&self) -> Real {
        Real(self.0.clone().cosh())
    }

    pub fn tanh(&self) -> Real {
        Real(self.0.clone().tanh())
    }

    pub fn powr(&self, e: &Real) -> Real {
        let p = self.prec().max(e.prec());
        Real(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    pub fn powf(&self, e: f64) -> Real {
        Real(Float::with_val(self.prec(), (&self.0).pow(e)))
    }

    pub fn powi(&self, e: i32) -> Real {
        Real(Float::with_val(self.prec(), (&self.0).pow(e)))
    }

    pub fn round(&self) -> Real {
        Real(self.0.clone().round())
    }

    pub fn floor(&self) -> Real {
        Real(self.0.clone().floor())
    }

    /// Nearest integer as i64 (saturating for huge values).
    pub fn round_i64(&self) -> i64 {
        self.0
            .clone()
            .round()
            .to_integer()
            .and_then(|z| z.to_i64())
            .unwrap_or(if self.is_negative() { i64::MIN } else { i64::MAX })
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Binary exponent e with |x| in [2^(e-1), 2^e); None for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Decimal string carrying enough digits to round-trip at this precision.
    pub fn to_decimal(&self) -> String {
        let digits = (f64::from(self.prec()) * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_decimal_digits(digits)
    }

    pub fn to_decimal_digits(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_digits(30))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.to_decimal_digits(d)),
            None => write!(f, "{}", self.to_decimal()),
        }
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec().max(rhs.prec());
                Real(Float::with_val(p, (&self.0).$method(&rhs.0)))
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<f64> for &Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                Real(Float::with_val(self.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $trait<f64> for Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                Real(Float::with_val(self.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $trait<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<&Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(rhs.prec(), self.$method(&rhs.0)))
            }
        }
        impl $trait<Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $trait<&Real> for i64 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(rhs.prec(), self.$method(&rhs.0)))
            }
        }
        impl $trait<Real> for i64 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $assign_trait<&Real> for Real {
            fn $assign_method(&mut self, rhs: &Real) {
                self.0.$assign_method(&rhs.0);
            }
        }
        impl $assign_trait<Real> for Real {
            fn $assign_method(&mut self, rhs: Real) {
                self.0.$assign_method(&rhs.0);
            }
        }
        impl $assign_trait<f64> for Real {
            fn $assign_method(&mut self, rhs: f64) {
                self.0.$assign_method(rhs);
            }
        }
        impl $assign_trait<i64> for Real {
            fn $assign_method(&mut self, rhs: i64) {
                self.0.$assign_method(rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl std::iter::Sum for Real {
    /// Panics on an empty iterator: there is no precision to take the zero from.
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let first = iter.next().expect("sum of an empty Real iterator");
        iter.fold(first, |acc, x| acc + x)
    }
}

/// Sum of a slice, zero at `bits` when empty.
pub fn sum_at(values: &[Real], bits: u32) -> Real {
    let mut acc = Real::from_i64(0, bits);
    for v in values {
        acc += v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_contexts() {
        assert!(PrecisionCtx::new(32, 1e-6).is_err());
        assert!(PrecisionCtx::new(128, 0.0).is_err());
        assert!(PrecisionCtx::new(128, 1.5).is_err());
        assert!(PrecisionCtx::new(128, 1e-20).is_ok());
    }

    #[test]
    fn arithmetic_keeps_the_wider_precision() {
        let a = Real::from_i64(1, 128);
        let b = Real::from_i64(3, 256);
        let q = &a / &b;
        assert_eq!(q.prec(), 256);
        let back = q * 3i64;
        assert!((back - 1.0).abs() < 1e-70);
    }

    #[test]
    fn decimal_round_trip() {
        let ctx = PrecisionCtx::default();
        let x = ctx.pi().sqrt();
        let text = x.to_decimal();
        let y = ctx.parse(&text).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn rounding_helpers() {
        let ctx = PrecisionCtx::default();
        assert_eq!(ctx.real(2.5).round_i64(), 3);
        assert_eq!(ctx.real(-0.4).round_i64(), 0);
        assert_eq!(ctx.real(-1.6).round_i64(), -2);
    }
}
