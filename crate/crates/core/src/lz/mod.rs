//! Closed-form solution of the two-level Landau–Zener problem with a
//! Coulomb-like sweep
//!
//! ```text
//! H(t) = (g/t + ε cosθ) σ_z + ε sinθ (cosφ σ_x + sinφ σ_y),   t ∈ (0, ∞)
//! ```
//!
//! The system is prepared in the ground state of the divergent `g/t` term at
//! `t → 0⁺` and ends in a superposition of the eigenstates of `ε n·σ`.

mod canon;
mod spinor;

pub use canon::{canonicalize_axis, Axis, AxisCanonicalization};
pub use spinor::{
    final_amplitudes, final_eigenvectors, ground_start_partner, wavefunction_at, wavefunction_from_ground,
    AmplitudePair, Spinor, ASYMPTOTIC_EPS_T,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{lit, to_f64, Real};
use crate::special::KummerError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LzError {
    #[error("quench parameter g must be finite and >= 0, got {0}")]
    InvalidG(f64),
    #[error("polar angle theta must lie in [0, pi], got {0}")]
    ThetaOutOfRange(f64),
    #[error("final field magnitude epsilon must be finite and > 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("azimuth phi must be finite, got {0}")]
    InvalidPhi(f64),
    #[error("time must be > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("eps*t = {eps_t} is below the asymptotic threshold {threshold}")]
    PreAsymptotic { eps_t: f64, threshold: f64 },
    #[error("static field is zero or non-finite: quench direction undefined")]
    ZeroField,
    #[error(transparent)]
    Kummer(#[from] KummerError),
}

/// Parameters of one Coulomb-protocol Landau–Zener problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzParams<T> {
    pub g: T,
    pub epsilon: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> LzParams<T> {
    /// Validates the parameters. `phi` is reduced into `[0, 2π)`.
    pub fn new(g: T, epsilon: T, theta: T, phi: T) -> Result<Self, LzError> {
        check_g(g)?;
        check_theta(theta)?;
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(LzError::InvalidEpsilon(to_f64(epsilon)));
        }
        if !phi.is_finite() {
            return Err(LzError::InvalidPhi(to_f64(phi)));
        }
        let two_pi = T::TAU();
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi = phi + two_pi;
        }
        if phi >= two_pi {
            phi = T::zero();
        }
        Ok(LzParams { g, epsilon, theta, phi })
    }

    /// Unit vector `n` of the final field.
    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Field `h(t)` at time `t` (quench term on the z component).
    pub fn field_at(&self, t: T) -> [T; 3] {
        let n = self.direction();
        [self.epsilon * n[0], self.epsilon * n[1], self.g / t + self.epsilon * n[2]]
    }

    pub fn transition_probability(&self) -> T {
        probability_from_cos(self.g, self.theta.cos())
    }
}

fn check_g<T: Real>(g: T) -> Result<(), LzError> {
    if g.is_finite() && g >= T::zero() {
        Ok(())
    } else {
        Err(LzError::InvalidG(to_f64(g)))
    }
}

fn check_theta<T: Real>(theta: T) -> Result<(), LzError> {
    if theta.is_finite() && theta >= T::zero() && theta <= T::PI() {
        Ok(())
    } else {
        Err(LzError::ThetaOutOfRange(to_f64(theta)))
    }
}

/// Probability of ending in the final excited state `|+⟩` when starting from
/// the initial ground state:
///
/// ```text
/// P = (e^{-2πg cosθ} - e^{-2πg}) / (e^{2πg} - e^{-2πg})
/// ```
///
/// `g = 0` returns the sudden-quench limit `sin²(θ/2)`.
pub fn transition_probability<T: Real>(g: T, theta: T) -> Result<T, LzError> {
    check_g(g)?;
    check_theta(theta)?;
    Ok(probability_from_cos(g, theta.cos()))
}

/// Same as [`transition_probability`] but parameterised by `cosθ`, which the
/// band-model scans know directly as `h_axis / |h|`.
///
/// Evaluated as `e^{-x(1+c)} (1 - e^{-x(1-c)}) / (1 - e^{-2x})`, `x = 2πg`,
/// which neither overflows for large `g` nor cancels for small `g`.
pub fn probability_from_cos<T: Real>(g: T, cos_theta: T) -> T {
    let one = T::one();
    let c = cos_theta.max(-one).min(one);
    if g == T::zero() {
        return (one - c) * lit::<T>(0.5);
    }
    let x = T::TAU() * g;
    let num = -(-(x * (one - c))).exp_m1();
    let den = -(-(x + x)).exp_m1();
    let p = (-(x * (one + c))).exp() * num / den;
    p.max(T::zero()).min(one)
}

/// Time-averaged spin polarization after the quench, `-(1 - 2P) n`.
pub fn averaged_spin<T: Real>(params: &LzParams<T>) -> [T; 3] {
    let p = params.transition_probability();
    let amp = -(T::one() - p - p);
    let n = params.direction();
    [amp * n[0], amp * n[1], amp * n[2]]
}

/// Root `cosθ*` of `P(g, θ*) = 1/2` in closed form,
/// `cosθ* = -ln cosh(2πg) / (2πg)` (`0` at `g = 0`).
pub fn half_probability_cos<T: Real>(g: T) -> T {
    if g == T::zero() {
        return T::zero();
    }
    let x = T::TAU() * g;
    // ln cosh x = x + ln(1 + e^{-2x}) - ln 2
    let ln_cosh = x + (-(x + x)).exp().ln_1p() - T::LN_2();
    -ln_cosh / x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn endpoints_of_theta() {
        for &g in &[0.0, 1e-6, 0.3, 2.0, 50.0, 400.0] {
            assert_eq!(transition_probability(g, 0.0).unwrap(), 0.0);
            assert!((transition_probability(g, PI).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn adiabatic_at_g_one() {
        let p = transition_probability(1.0, PI / 3.0).unwrap();
        assert!(p < 1e-4, "p = {p}");
    }

    #[test]
    fn sudden_limit() {
        let p = transition_probability(1e-6, PI / 2.0).unwrap();
        assert!((p - 0.5).abs() < 1e-4);
        let p0 = transition_probability(0.0, 1.1).unwrap();
        assert!((p0 - (0.55_f64).sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn matches_raw_formula_where_it_is_safe() {
        for &g in &[0.05, 0.4, 1.3, 7.0] {
            for &th in &[0.2, 1.0, 2.0, 3.0] {
                let x = 2.0 * PI * g;
                let raw = ((-x * f64::cos(th)).exp() - (-x).exp()) / (x.exp() - (-x).exp());
                let p = transition_probability(g, th).unwrap();
                assert!((p - raw).abs() < 1e-14 * raw.max(1e-300) + 1e-300, "g={g} th={th}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(transition_probability(-0.1, 1.0), Err(LzError::InvalidG(_))));
        assert!(matches!(transition_probability(1.0, -0.01), Err(LzError::ThetaOutOfRange(_))));
        assert!(matches!(transition_probability(1.0, 3.2), Err(LzError::ThetaOutOfRange(_))));
        assert!(LzParams::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(LzParams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn adiabatic_spin_is_antiparallel() {
        let p = LzParams::new(100.0, 2.0, PI / 3.0, 0.0).unwrap();
        let s = averaged_spin(&p);
        let expect = [-(3f64.sqrt()) / 2.0, 0.0, -0.5];
        for i in 0..3 {
            assert!((s[i] - expect[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn sudden_spin_is_projection() {
        let th: f64 = 1.2;
        let p = LzParams::new(0.0, 1.0, th, 0.7).unwrap();
        let s = averaged_spin(&p);
        let n = p.direction();
        for i in 0..3 {
            assert!((s[i] + th.cos() * n[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_vanishes_on_half_probability_root() {
        let g: f64 = 0.8;
        let c = half_probability_cos(g);
        let p = LzParams::new(g, 1.0, c.acos(), 0.0).unwrap();
        let s = averaged_spin(&p);
        assert!(s.iter().all(|x| x.abs() < 1e-12), "{s:?}");
    }

    #[test]
    fn works_in_single_precision() {
        let p = transition_probability(0.3_f32, 1.0_f32).unwrap();
        let q = transition_probability(0.3_f64, 1.0_f64).unwrap();
        assert!((p as f64 - q).abs() < 1e-6);
    }

    #[test]
    fn phi_is_reduced() {
        let p = LzParams::new(1.0, 1.0, 1.0, -0.5).unwrap();
        assert!((p.phi - (2.0 * PI - 0.5)).abs() < 1e-15);
    }
}
