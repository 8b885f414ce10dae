//! Complex log-gamma (Lanczos, g = 7, n = 9) with reflection for Re z < 1/2.
//!
//! Only `exp(ln_gamma(z))` is ever used downstream, so the imaginary part is
//! returned on whatever branch falls out of the formula.

use num_complex::Complex;

use crate::real::{lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of `Γ(z)`. Returns an infinite real part at the poles.
pub fn ln_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    if is_nonpositive_integer(z) {
        return Complex::new(T::infinity(), T::zero());
    }
    let half = lit::<T>(0.5);
    if z.re < half {
        let pi = T::PI();
        let one = Complex::new(T::one(), T::zero());
        return Complex::new(pi.ln(), T::zero()) - ln_sin_pi(z) - ln_gamma(one - z);
    }
    let zm1 = z - T::one();
    let mut x = Complex::new(lit::<T>(LANCZOS_COEF[0]), T::zero());
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x = x + Complex::new(lit::<T>(c), T::zero()) / (zm1 + crate::real::from_usize::<T>(i));
    }
    let t = zm1 + lit::<T>(LANCZOS_G + 0.5);
    let half_ln_two_pi = lit::<T>(0.5 * (2.0 * std::f64::consts::PI).ln());
    (zm1 + half) * t.ln() - t + x.ln() + half_ln_two_pi
}

/// `1/Γ(z)`, exactly zero at the poles.
pub fn recip_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    if is_nonpositive_integer(z) {
        return Complex::new(T::zero(), T::zero());
    }
    (-ln_gamma(z)).exp()
}

pub fn gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    ln_gamma(z).exp()
}

pub(crate) fn is_nonpositive_integer<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()
}

/// `ln(sin(πz))` evaluated without overflow for large |Im z|.
fn ln_sin_pi<T: Real>(z: Complex<T>) -> Complex<T> {
    let pi = T::PI();
    let i = Complex::new(T::zero(), T::one());
    let two_i = Complex::new(T::zero(), lit::<T>(2.0));
    let one = Complex::new(T::one(), T::zero());
    if z.im > T::zero() {
        // sin(πz) = e^{-iπz} (e^{2iπz} - 1) / (2i)
        let w = (i * z * pi * lit::<T>(2.0)).exp();
        -i * z * pi + ((w - one) / two_i).ln()
    } else if z.im < T::zero() {
        // sin(πz) = e^{iπz} (1 - e^{-2iπz}) / (2i)
        let w = (-i * z * pi * lit::<T>(2.0)).exp();
        i * z * pi + ((one - w) / two_i).ln()
    } else {
        (z * pi).sin().ln()
    }
}
