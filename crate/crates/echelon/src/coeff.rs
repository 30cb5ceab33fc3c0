//! Coefficient arithmetic in the two supported modes: `f64` complex numbers
//! for norm computations, and exact rational complex numbers for filtration
//! tests where roundoff would pollute order counting.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A coefficient ring for truncated series.
///
/// Both implementations form a field, so division is total away from zero.
/// `magnitude` maps into `f64` for norm evaluation; in exact mode this is the
/// only lossy operation and it is confined to reporting.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// |c| as an f64 (hypot of parts; exact parts are converted).
    fn magnitude(&self) -> f64;
    fn from_f64(re: f64, im: f64) -> Self;
    fn from_int(n: i64) -> Self;
    /// 1/n for integer n ≠ 0; exact in rational mode.
    fn inv_int(n: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn conj(&self) -> Self;
}

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn from_f64(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn inv_int(n: i64) -> Self {
        Complex64::new(1.0 / n as f64, 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn conj(&self) -> Self {
        Complex64::new(self.re, -self.im)
    }
}

/// Exact complex rationals: `re + i·im` with `BigRational` parts.
pub type ExactC = num_complex::Complex<BigRational>;

impl Coeff for ExactC {
    const EXACT: bool = true;

    fn zero() -> Self {
        ExactC::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        ExactC::new(BigRational::one(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im.to_f64().unwrap_or(f64::NAN);
        re.hypot(im)
    }
    fn from_f64(re: f64, im: f64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        ExactC::new(conv(re), conv(im))
    }
    fn from_int(n: i64) -> Self {
        ExactC::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn inv_int(n: i64) -> Self {
        assert!(n != 0, "inv_int(0)");
        ExactC::new(
            BigRational::new(BigInt::one(), BigInt::from(n)),
            BigRational::zero(),
        )
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn conj(&self) -> Self {
        ExactC::new(self.re.clone(), -self.im.clone())
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> ExactC {
    assert!(den != 0, "ratio with zero denominator");
    ExactC::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = ratio(1, 3);
        let b = ratio(1, 6);
        assert_eq!(a.clone() + b.clone(), ratio(1, 2));
        assert_eq!(a.clone() * b.clone(), ratio(1, 18));
        assert_eq!(a / b, ratio(2, 1));
    }

    #[test]
    fn magnitude_matches_float() {
        let c = <Complex64 as Coeff>::from_f64(3.0, 4.0);
        assert_eq!(c.magnitude(), 5.0);
        let e = <ExactC as Coeff>::from_int(-7);
        assert_eq!(e.magnitude(), 7.0);
    }
}
