use num_complex::Complex;

use super::{LzError, LzParams};
use crate::real::{lit, to_f64, Real};
use crate::special::kummer::{coulomb_series, SERIES_RADIUS};
use crate::special::{kummer_m, ln_gamma};

/// Two-component state in the `σ_z` basis.
pub type Spinor<T> = [Complex<T>; 2];

/// Smallest `εt` accepted by [`final_amplitudes`].
pub const ASYMPTOTIC_EPS_T: f64 = 20.0;

/// Exact state at time `t > 0` for the system prepared in `(1, 0)` at `t → 0⁺`,
/// the ground state of the divergent quench term.
///
/// ```text
/// u = t^{-ig} e^{iεt} M(a, b, τ)
/// v = e^{iφ} t^{-ig} e^{iεt} cot(θ/2) [M(a+1, b+1, τ) - M(a, b, τ)]
/// a = -ig(1 + cosθ),  b = -2ig,  τ = -2iεt
/// ```
pub fn wavefunction_at<T: Real>(params: &LzParams<T>, t: T) -> Result<Spinor<T>, LzError> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(LzError::NonPositiveTime(to_f64(t)));
    }
    let LzParams { g, epsilon, theta, phi } = *params;
    let (s, c) = theta.sin_cos();
    let et = epsilon * t;
    let e_phi = Complex::from_polar(T::one(), phi);

    if g == T::zero() {
        // constant Hamiltonian ε n·σ
        let (sn, cs) = et.sin_cos();
        let u = Complex::new(cs, -c * sn);
        let v = Complex::new(T::zero(), -s * sn) * e_phi;
        return Ok([u, v]);
    }

    let tau = Complex::new(T::zero(), -(et + et));
    let phase = Complex::from_polar(T::one(), et - g * t.ln());
    let half = lit::<T>(0.5);
    let (u_core, v_core) = if tau.norm() <= lit(SERIES_RADIUS) {
        let (m, w) = coulomb_series(g, c, tau)?;
        (m, w * (s * half))
    } else {
        let a = Complex::new(T::zero(), -g * (T::one() + c));
        let b = Complex::new(T::zero(), -(g + g));
        let m = kummer_m(a, b, tau)?;
        let v = if s == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            let m1 = kummer_m(a + T::one(), b + T::one(), tau)?;
            (m1 - m) * ((T::one() + c) / s)
        };
        (m, v)
    };
    Ok([phase * u_core, phase * v_core * e_phi])
}

/// Maps the evolved excited-start state to the evolved ground-start state.
///
/// The propagator of a traceless Hermitian Hamiltonian lies in SU(2), so if it
/// sends `(1, 0)` to `(u, v)` it sends `(0, 1)` to `(-v̄, ū)`.
pub fn ground_start_partner<T: Real>(psi: &Spinor<T>) -> Spinor<T> {
    [-psi[1].conj(), psi[0].conj()]
}

/// State at `t` for the system prepared in `(0, 1)`.
pub fn wavefunction_from_ground<T: Real>(params: &LzParams<T>, t: T) -> Result<Spinor<T>, LzError> {
    wavefunction_at(params, t).map(|psi| ground_start_partner(&psi))
}

/// Eigenvectors `(|+⟩, |−⟩)` of `n·σ` with eigenvalues `±1`, phased so that
/// the lower component of `|+⟩` carries `e^{iφ}`.
pub fn final_eigenvectors<T: Real>(params: &LzParams<T>) -> (Spinor<T>, Spinor<T>) {
    let half = params.theta * lit::<T>(0.5);
    let (sh, ch) = half.sin_cos();
    let e_phi = Complex::from_polar(T::one(), params.phi);
    let zero = T::zero();
    let plus = [Complex::new(ch, zero), e_phi * sh];
    let minus = [Complex::new(sh, zero), -e_phi * ch];
    (plus, minus)
}

/// Large-time amplitudes on the final eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair<T> {
    /// `|⟨+|ψ⟩| = sqrt(1 - P)`.
    pub p_plus_mag: T,
    /// `|⟨−|ψ⟩| = sqrt(P)`.
    pub p_minus_mag: T,
    /// `arg⟨+|ψ⟩ - arg⟨−|ψ⟩` wrapped to `(-π, π]`.
    pub rel_phase: T,
    /// Time-independent part of `rel_phase`.
    pub phi0: T,
}

/// Asymptotic decomposition of [`wavefunction_at`] for `εt >= 20`:
///
/// ```text
/// arg⟨+|ψ⟩ - arg⟨−|ψ⟩ = -2εt - 2g cosθ ln t + φ0
/// φ0 = -2g cosθ ln 2ε + arg Γ(1+b) - arg Γ(1+a) - arg Γ(b) + arg Γ(b-a)
/// ```
///
/// `φ0 = 0` when `g = 0` or `sinθ = 0`.
pub fn final_amplitudes<T: Real>(params: &LzParams<T>, t: T) -> Result<AmplitudePair<T>, LzError> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(LzError::NonPositiveTime(to_f64(t)));
    }
    let et = params.epsilon * t;
    if et < lit(ASYMPTOTIC_EPS_T) {
        return Err(LzError::PreAsymptotic { eps_t: to_f64(et), threshold: ASYMPTOTIC_EPS_T });
    }
    let p = params.transition_probability();
    let g = params.g;
    let (s, c) = params.theta.sin_cos();
    let two = lit::<T>(2.0);
    let phi0 = if g == T::zero() || s.abs() <= T::epsilon() {
        T::zero()
    } else {
        let a = Complex::new(T::zero(), -g * (T::one() + c));
        let b = Complex::new(T::zero(), -two * g);
        let arg = |z: Complex<T>| ln_gamma(z).im;
        wrap(-two * g * c * (two * params.epsilon).ln() + arg(b + T::one()) - arg(a + T::one()) - arg(b) + arg(b - a))
    };
    let rel_phase = wrap(-two * et - two * g * c * t.ln() + phi0);
    Ok(AmplitudePair { p_plus_mag: (T::one() - p).max(T::zero()).sqrt(), p_minus_mag: p.sqrt(), rel_phase, phi0 })
}

/// Reduces an angle to `(-π, π]`.
pub(crate) fn wrap<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x % two_pi;
    if y > T::PI() {
        y = y - two_pi;
    } else if y <= -T::PI() {
        y = y + two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn inner(a: &Spinor<f64>, b: &Spinor<f64>) -> Complex<f64> {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    #[test]
    fn normalized_across_both_regimes() {
        let p = LzParams::<f64>::new(0.6, 1.3, 1.1, 0.4).unwrap();
        for &t in &[1e-6, 0.01, 0.7, 5.0, 11.0, 11.6, 12.0, 40.0, 300.0] {
            let psi = wavefunction_at(&p, t).unwrap();
            let n = psi[0].norm_sqr() + psi[1].norm_sqr();
            assert!((n - 1.0).abs() < 1e-9, "t={t}: {n}");
        }
    }

    #[test]
    fn starts_in_upper_state() {
        let p = LzParams::<f64>::new(0.9, 1.0, 2.0, 0.0).unwrap();
        let psi = wavefunction_at(&p, 1e-9).unwrap();
        assert!((psi[0].norm() - 1.0).abs() < 1e-8);
        assert!(psi[1].norm() < 1e-8);
    }

    #[test]
    fn continuous_at_regime_switch() {
        let p = LzParams::new(0.35, 1.0, 0.8, 0.0).unwrap();
        let t_switch = SERIES_RADIUS / 2.0;
        let lo = wavefunction_at(&p, t_switch * (1.0 - 1e-12)).unwrap();
        let hi = wavefunction_at(&p, t_switch * (1.0 + 1e-12)).unwrap();
        assert!((lo[0] - hi[0]).norm() < 1e-7 && (lo[1] - hi[1]).norm() < 1e-7);
    }

    #[test]
    fn partner_is_orthogonal() {
        let p = LzParams::new(0.5, 1.0, 1.0, 0.3).unwrap();
        let psi = wavefunction_at(&p, 3.0).unwrap();
        let chi = ground_start_partner(&psi);
        assert!(inner(&psi, &chi).norm() < 1e-15);
    }

    #[test]
    fn amplitudes_match_projection_at_late_time() {
        for &(g, th, phi) in &[(0.3, 1.0, 0.0), (0.8, 2.2, 1.3), (0.05, 0.6, 4.0), (1.4, 1.7, 0.0)] {
            let p = LzParams::new(g, 1.0, th, phi).unwrap();
            let t = 400.0;
            let psi = wavefunction_at(&p, t).unwrap();
            let (plus, minus) = final_eigenvectors(&p);
            let ap = inner(&plus, &psi);
            let am = inner(&minus, &psi);
            let amp = final_amplitudes(&p, t).unwrap();
            // corrections to the asymptotic form are O(g / εt)
            let tol = 1e-2 * g.max(0.05);
            assert!((ap.norm() - amp.p_plus_mag).abs() < tol, "g={g} |+|: {} vs {}", ap.norm(), amp.p_plus_mag);
            assert!((am.norm() - amp.p_minus_mag).abs() < tol);
            let d = wrap((ap / am).arg() - amp.rel_phase);
            assert!(d.abs() < 10.0 * tol, "g={g} th={th}: phase off by {d}");
        }
    }

    #[test]
    fn pre_asymptotic_time_is_rejected() {
        let p = LzParams::new(0.3, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(final_amplitudes(&p, 5.0), Err(LzError::PreAsymptotic { .. })));
    }

    #[test]
    fn phi0_vanishes_on_the_axis() {
        let p = LzParams::new(0.7, 1.0, PI, 0.0).unwrap();
        assert_eq!(final_amplitudes(&p, 50.0).unwrap().phi0, 0.0);
    }
}
