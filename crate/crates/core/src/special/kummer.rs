//! Confluent hypergeometric function M(a, b, z) (Kummer's function).
//!
//! Two regimes:
//!
//! * `|z| <= 30`: the defining power series, summed in double-word arithmetic.
//!   On the imaginary axis the terms peak near `|z|^|z| / |z|!` (≈ 8e11 at
//!   |z| = 30) while M itself has modulus O(1), so plain summation would lose
//!   about twelve digits.
//! * `|z| > 30`: the large-|z| expansion with both exponential sectors kept.
//!   For purely imaginary `a`, `b` and `z` both sectors have modulus O(1).
//!
//! When the asymptotic sums cannot reach the target the series is retried;
//! if neither succeeds the call fails with [`KummerError::NonConvergence`].

use num_complex::Complex;
use thiserror::Error;

use super::dd::{dd_epsilon, CDd, Dd};
use super::gamma::{is_nonpositive_integer, ln_gamma};
use crate::real::{from_usize, lit, to_f64, Real};

/// Switch-over radius between the series and the asymptotic expansion.
pub const SERIES_RADIUS: f64 = 30.0;

const MAX_SERIES_TERMS: usize = 20_000;
const MAX_ASYMPTOTIC_TERMS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KummerError {
    #[error("M(a, b, z) has a pole: b = {b} is a non-positive integer")]
    Pole { b: f64 },
    #[error(
        "Kummer evaluation did not converge at |z| = {abs_z}: estimated relative error {estimate:.3e} exceeds {target:.3e}"
    )]
    NonConvergence { abs_z: f64, estimate: f64, target: f64 },
}

/// Relative accuracy demanded from the series regime.
pub fn series_target<T: Real>() -> T {
    lit::<T>(1e-10).max(T::epsilon() * lit::<T>(1e3))
}

/// Relative accuracy demanded from the asymptotic regime.
pub fn asymptotic_target<T: Real>() -> T {
    lit::<T>(1e-6).max(T::epsilon() * lit::<T>(1e3))
}

/// Kummer's function `M(a, b, z) = Σ (a)_n / (b)_n z^n / n!`.
pub fn kummer_m<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> Result<Complex<T>, KummerError> {
    if is_nonpositive_integer(b) {
        return Err(KummerError::Pole { b: to_f64(b.re) });
    }
    let abs_z = z.norm();
    if abs_z <= lit(SERIES_RADIUS) {
        let (value, err) = series(a, b, z);
        let target = series_target::<T>();
        if err <= target {
            return Ok(value);
        }
        return Err(KummerError::NonConvergence {
            abs_z: to_f64(abs_z),
            estimate: to_f64(err),
            target: to_f64(target),
        });
    }
    let target = asymptotic_target::<T>();
    let (value, err) = asymptotic(a, b, z);
    if err <= target {
        return Ok(value);
    }
    let (value_s, err_s) = series(a, b, z);
    if err_s <= target {
        return Ok(value_s);
    }
    Err(KummerError::NonConvergence { abs_z: to_f64(abs_z), estimate: to_f64(err.min(err_s)), target: to_f64(target) })
}

/// Series summed in double-word arithmetic. Returns the value and an
/// estimate of its relative error.
fn series<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> (Complex<T>, T) {
    let a_dd = CDd::new(a);
    let b_dd = CDd::new(b);
    let z_dd = CDd::new(z);
    let mut term = CDd::<T>::one();
    let mut sum = CDd::<T>::one();
    let mut max_term = T::one();
    let abs_z = z.norm();
    let mut n = 0usize;
    let tail;
    loop {
        let nf = from_usize::<T>(n);
        let num = a_dd.add_real(nf) * z_dd;
        let den = b_dd.add_real(nf) * CDd { re: Dd::new(nf + T::one()), im: Dd::zero() };
        term = term * num / den;
        sum = sum + term;
        n += 1;
        let t = term.norm();
        max_term = max_term.max(t);
        let s = sum.norm();
        if t == T::zero() || (nf > abs_z && t <= dd_epsilon::<T>() * s) {
            tail = t;
            break;
        }
        if n >= MAX_SERIES_TERMS {
            tail = t;
            break;
        }
    }
    let value = sum.value();
    let scale = value.norm().max(T::min_positive_value());
    let rounding = max_term * from_usize::<T>(n + 1) * lit::<T>(8.0) * dd_epsilon::<T>();
    // the final double-word -> working precision rounding
    let err = (rounding + tail) / scale + T::epsilon();
    (value, err)
}

/// Sum `Σ (p)_s (q)_s / s! w^s` until the terms stop decreasing. Returns the
/// sum and the magnitude of the first omitted term.
fn asymptotic_sum<T: Real>(p: Complex<T>, q: Complex<T>, w: Complex<T>) -> (Complex<T>, T) {
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    let mut last = T::one();
    for s in 0..MAX_ASYMPTOTIC_TERMS {
        let sf = from_usize::<T>(s);
        let next = term * (p + sf) * (q + sf) * w / (sf + T::one());
        let mag = next.norm();
        if mag == T::zero() {
            return (sum, T::zero());
        }
        if mag > last {
            // divergent tail: optimal truncation before the smallest term
            return (sum, last);
        }
        sum = sum + next;
        term = next;
        last = mag;
        if mag <= T::epsilon() * sum.norm() * lit::<T>(0.1) {
            return (sum, mag);
        }
    }
    (sum, last)
}

/// Large-|z| expansion, both sectors retained. Returns value and estimated
/// relative error.
fn asymptotic<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> (Complex<T>, T) {
    let one = Complex::new(T::one(), T::zero());
    let i_pi = Complex::new(T::zero(), T::PI());
    // e^{+iπa} for ph z >= 0, e^{-iπa} below the real axis
    let sign = if z.im >= T::zero() { T::one() } else { -T::one() };
    let ln_z = z.ln();
    let lg_b = ln_gamma(b);

    let mut value = Complex::new(T::zero(), T::zero());
    let mut abs_err = T::zero();
    let mut magnitude = T::zero();

    let bma = b - a;
    if !is_nonpositive_integer(bma) {
        let pref = (lg_b - ln_gamma(bma) + i_pi * a * sign - a * ln_z).exp();
        let (s1, e1) = asymptotic_sum(a, a - b + one, -one / z);
        let contrib = pref * s1;
        value = value + contrib;
        abs_err = abs_err + pref.norm() * e1;
        magnitude = magnitude + contrib.norm();
    }
    if !is_nonpositive_integer(a) {
        let pref = (lg_b - ln_gamma(a) + z + (a - b) * ln_z).exp();
        let (s2, e2) = asymptotic_sum(bma, one - a, one / z);
        let contrib = pref * s2;
        value = value + contrib;
        abs_err = abs_err + pref.norm() * e2;
        magnitude = magnitude + contrib.norm();
    }
    let scale = value.norm().max(T::min_positive_value());
    let rounding = magnitude * T::epsilon() * lit::<T>(16.0);
    (value, (abs_err + rounding) / scale)
}

/// The pair of series needed by the Coulomb-protocol spinor at `τ`:
///
/// * `M(a, b, τ) = 1 + (a/b) Σ_{n≥1} r_{n-1} τ^n / n!`
/// * `W(τ) = Σ_{n≥1} r_{n-1} τ^n / ((n-1)! (b + n))`
///
/// with `a = -ig(1+cosθ)`, `b = -2ig`, `r_m = (a+1)_m / (b+1)_m` and
/// `a/b = (1+cosθ)/2`. Written this way the sum is regular at `g = 0` and the
/// lower spinor component `(sinθ/2) W` has no `cot(θ/2)` cancellation.
pub(crate) fn coulomb_series<T: Real>(
    g: T,
    cos_theta: T,
    tau: Complex<T>,
) -> Result<(Complex<T>, Complex<T>), KummerError> {
    let a = Complex::new(T::zero(), -g * (T::one() + cos_theta));
    let b = Complex::new(T::zero(), -lit::<T>(2.0) * g);
    let a_dd = CDd::new(a);
    let b_dd = CDd::new(b);
    let tau_dd = CDd::new(tau);
    let abs_tau = tau.norm();

    let mut q = tau_dd;
    let mut s = CDd::<T>::zero();
    let mut w = CDd::<T>::zero();
    let mut max_term = tau.norm();
    let mut n = 1usize;
    let tail;
    loop {
        let nf = from_usize::<T>(n);
        s = s + q;
        w = w + q * CDd { re: Dd::new(nf), im: Dd::zero() } / b_dd.add_real(nf);
        let num = a_dd.add_real(nf) * tau_dd;
        let den = b_dd.add_real(nf) * CDd { re: Dd::new(nf + T::one()), im: Dd::zero() };
        q = q * num / den;
        n += 1;
        let t = q.norm();
        max_term = max_term.max(t);
        if t == T::zero() || (nf > abs_tau && t <= dd_epsilon::<T>() * s.norm().max(T::one())) || n >= MAX_SERIES_TERMS
        {
            tail = t;
            break;
        }
    }
    let ratio = (T::one() + cos_theta) * lit::<T>(0.5);
    let m = CDd::<T>::one() + s * CDd { re: Dd::new(ratio), im: Dd::zero() };
    let err = (max_term * from_usize::<T>(n + 1) * lit::<T>(8.0) * dd_epsilon::<T>() + tail) + T::epsilon();
    let target = series_target::<T>();
    // |M| and |W| are O(1) for the physical spinor, so absolute ≈ relative
    if err > target {
        return Err(KummerError::NonConvergence {
            abs_z: to_f64(abs_tau),
            estimate: to_f64(err),
            target: to_f64(target),
        });
    }
    Ok((m.value(), w.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn unit_at_origin() {
        let m = kummer_m(c(0.3, -1.2), c(0.0, -2.0), c(0.0, 0.0)).unwrap();
        assert_eq!(m, c(1.0, 0.0));
    }

    #[test]
    fn equal_parameters_give_exponential() {
        for &z in &[c(0.5, 0.0), c(0.0, -12.0), c(0.0, -29.0), c(-3.0, 2.0)] {
            let a = c(0.0, -1.7);
            let m = kummer_m(a, a, z).unwrap();
            assert!((m - z.exp()).norm() < 1e-12 * z.exp().norm().max(1.0), "z={z}");
        }
    }

    #[test]
    fn pole_is_reported() {
        assert!(matches!(kummer_m(c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)), Err(KummerError::Pole { .. })));
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch_radius() {
        for &(g, ct) in &[(0.1, 0.5), (0.5, -0.3), (1.0, 0.8)] {
            let a = c(0.0, -g * (1.0 + ct));
            let b = c(0.0, -2.0 * g);
            let z = c(0.0, -32.0);
            let (s, es) = series(a, b, z);
            let (as_, ea) = asymptotic(a, b, z);
            assert!(es < 1e-12 && ea < 1e-9, "es={es} ea={ea}");
            assert!((s - as_).norm() < 1e-9, "g={g}: {s} vs {as_}");
        }
    }

    #[test]
    fn coulomb_series_matches_general_series() {
        let g = 0.7;
        let ct = 0.25;
        let tau = c(0.0, -17.0);
        let (m, w) = coulomb_series(g, ct, tau).unwrap();
        let a = c(0.0, -g * (1.0 + ct));
        let b = c(0.0, -2.0 * g);
        let m_ref = kummer_m(a, b, tau).unwrap();
        let m1 = kummer_m(a + 1.0, b + 1.0, tau).unwrap();
        assert!((m - m_ref).norm() < 1e-11);
        // W = b/(b-a) (M(a+1,b+1) - M(a,b))
        let w_ref = b / (b - a) * (m1 - m_ref);
        assert!((w - w_ref).norm() < 1e-10);
    }
}
