//! Double-word ("double-double") arithmetic built from error-free transforms.
//!
//! Used to sum the Kummer power series on the imaginary axis, where the
//! alternating terms grow to ~1e12 before cancelling down to a result of
//! modulus one. The transforms rely on fused multiply-add and work for any
//! IEEE binary format, so `f32` gets a float-float pair.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;

use crate::real::Real;

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> Dd<T> {
    pub fn new(x: T) -> Self {
        Dd { hi: x, lo: T::zero() }
    }

    pub fn zero() -> Self {
        Self::new(T::zero())
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < T::zero() {
            -self
        } else {
            self
        }
    }
}

impl<T: Real> Add for Dd<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl<T: Real> Neg for Dd<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl<T: Real> Sub for Dd<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Mul for Dd<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl<T: Real> Div for Dd<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::new(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::new(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex number with double-word real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDd<T> {
    pub re: Dd<T>,
    pub im: Dd<T>,
}

impl<T: Real> CDd<T> {
    pub fn new(z: Complex<T>) -> Self {
        CDd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }

    pub fn zero() -> Self {
        CDd { re: Dd::zero(), im: Dd::zero() }
    }

    pub fn one() -> Self {
        CDd { re: Dd::new(T::one()), im: Dd::zero() }
    }

    pub fn value(self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }

    /// Modulus rounded to working precision.
    pub fn norm(self) -> T {
        self.value().norm()
    }

    pub fn add_real(self, x: T) -> Self {
        CDd { re: self.re + Dd::new(x), im: self.im }
    }
}

impl<T: Real> Add for CDd<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CDd { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<T: Real> Sub for CDd<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CDd { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<T: Real> Mul for CDd<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        CDd { re: self.re * rhs.re - self.im * rhs.im, im: self.re * rhs.im + self.im * rhs.re }
    }
}

impl<T: Real> Div for CDd<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let den = rhs.re * rhs.re + rhs.im * rhs.im;
        let num_re = self.re * rhs.re + self.im * rhs.im;
        let num_im = self.im * rhs.re - self.re * rhs.im;
        CDd { re: num_re / den, im: num_im / den }
    }
}

/// Unit roundoff of the double-word format for scalar `T`.
pub fn dd_epsilon<T: Real>() -> T {
    let eps = T::epsilon();
    eps * eps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_plain_arithmetic() {
        let big = Dd::new(1.0e16_f64);
        let s = (big + Dd::new(1.0)) - big;
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn division_is_accurate_to_double_word() {
        let third = Dd::new(1.0_f64) / Dd::new(3.0);
        let back = third * Dd::new(3.0) - Dd::new(1.0);
        assert!(back.value().abs() < 1e-30);
    }

    #[test]
    fn complex_product_matches_plain() {
        let a = CDd::new(Complex::new(1.5_f64, -0.25));
        let b = CDd::new(Complex::new(-2.0, 3.0));
        let p = (a * b).value();
        let q = Complex::new(1.5, -0.25) * Complex::new(-2.0, 3.0);
        assert!((p - q).norm() < 1e-15);
        let r = ((a * b) / b).value();
        assert!((r - Complex::new(1.5, -0.25)).norm() < 1e-15);
    }
}
