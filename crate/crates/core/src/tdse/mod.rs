//! Numerical solution of the time-dependent Schrödinger equation for the
//! two-level and four-level quench Hamiltonians.
//!
//! The driven part of every run is integrated with an adaptive 8th-order
//! Runge–Kutta scheme. Once the quench term is switched off the Hamiltonian is
//! constant and squares to `|h|²`, so the free evolution is propagated exactly,
//! `U(τ) = cos(|h|τ) - i sin(|h|τ) H/|h|`.

mod average;
mod bloch;
pub mod ode;
mod protocol;

pub use average::{time_average_spin, AverageWindow};
pub use bloch::{bloch_integrate, bloch_trajectory};
pub use ode::{Dop853, OdeError, OdeOptions, OdeStats};
pub use protocol::{default_coulomb_start, PointField, ProtocolKind, QuenchProtocol};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{from_usize, lit, to_f64, Real};

type C<T> = Complex<T>;

/// One state vector, padded to four components.
pub type State<T> = [Complex<T>; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TdseError {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("invalid initial state: {0}")]
    InvalidInitial(String),
    #[error("post-quench field vanishes: no precession to average over")]
    ZeroField,
    #[error("averaging window of length {got} is shorter than the required {required} (10 post-quench periods)")]
    WindowTooShort { required: f64, got: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Preparation of the system at `t_start`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState<T> {
    /// Ground state of `H(t_start)`. For four levels the ground manifold is
    /// twofold degenerate and the uniform mixture of it is used.
    #[default]
    Ground,
    /// A single pure state inside the ground manifold of `H(t_start)`.
    GroundPure,
    /// Explicit normalized amplitudes.
    Custom(Vec<Complex<T>>),
}

/// Four-level start selector used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FourLevelStart {
    #[default]
    Mixed,
    Pure,
}

impl<T> From<FourLevelStart> for InitialState<T> {
    fn from(s: FourLevelStart) -> Self {
        match s {
            FourLevelStart::Mixed => InitialState::Ground,
            FourLevelStart::Pure => InitialState::GroundPure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    /// Ensemble members, each of length `levels`.
    pub state: Vec<Vec<Complex<T>>>,
    /// `⟨γ_i⟩` averaged over the ensemble.
    pub spin: Vec<T>,
}

/// Output density of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    /// Samples per post-quench period `π/|h|`.
    pub samples_per_period: usize,
    /// Record samples during the driven part as well.
    pub record_quench: bool,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { samples_per_period: 32, record_quench: true }
    }
}

/// `Σ h_i Γ_i` with `Γ = (σ_x, σ_y, σ_z)` or `(γ_0, γ_1, γ_2, γ_3)`.
pub(crate) fn hamiltonian<T: Real>(levels: usize, h: &[T; 4]) -> [[C<T>; 4]; 4] {
    let z = C::new(T::zero(), T::zero());
    let re = |x: T| C::new(x, T::zero());
    let mut m = [[z; 4]; 4];
    if levels == 2 {
        m[0][0] = re(h[2]);
        m[1][1] = re(-h[2]);
        m[0][1] = C::new(h[0], -h[1]);
        m[1][0] = C::new(h[0], h[1]);
    } else {
        let off = C::new(h[1], -h[2]);
        m[0] = [re(h[3]), re(h[0]), off, z];
        m[1] = [re(h[0]), re(-h[3]), z, off];
        m[2] = [off.conj(), z, re(-h[3]), re(-h[0])];
        m[3] = [z, off.conj(), re(-h[0]), re(h[3])];
    }
    m
}

fn apply<T: Real>(m: &[[C<T>; 4]; 4], v: &State<T>, d: usize) -> State<T> {
    let mut out = [C::new(T::zero(), T::zero()); 4];
    for r in 0..d {
        let mut acc = C::new(T::zero(), T::zero());
        for c in 0..d {
            acc = acc + m[r][c] * v[c];
        }
        out[r] = acc;
    }
    out
}

fn inner<T: Real>(a: &State<T>, b: &State<T>, d: usize) -> C<T> {
    let mut acc = C::new(T::zero(), T::zero());
    for i in 0..d {
        acc = acc + a[i].conj() * b[i];
    }
    acc
}

fn field_norm<T: Real>(h: &[T; 4], levels: usize) -> T {
    let n = if levels == 4 { 4 } else { 3 };
    h[..n].iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

/// Orthonormal basis of the lower eigenspace of `h·Γ`, built from the columns
/// of the projector `(1 - H/|h|)/2` in order of decreasing norm.
pub(crate) fn ground_manifold<T: Real>(levels: usize, h: &[T; 4]) -> Result<Vec<State<T>>, TdseError> {
    let d = levels;
    let norm = field_norm(h, levels);
    if !(norm > T::zero() && norm.is_finite()) {
        return Err(TdseError::ZeroField);
    }
    let hm = hamiltonian(levels, h);
    let half = lit::<T>(0.5);
    let mut cols: Vec<(T, usize, State<T>)> = (0..d)
        .map(|j| {
            let mut v = [C::new(T::zero(), T::zero()); 4];
            for r in 0..d {
                let id = if r == j { T::one() } else { T::zero() };
                v[r] = (C::new(id, T::zero()) - hm[r][j] / norm) * half;
            }
            let n = inner(&v, &v, d).re.sqrt();
            (n, j, v)
        })
        .collect();
    cols.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let mut basis: Vec<State<T>> = Vec::new();
    for (_, _, mut v) in cols {
        if basis.len() == d / 2 {
            break;
        }
        for b in &basis {
            let p = inner(b, &v, d);
            for i in 0..d {
                v[i] = v[i] - b[i] * p;
            }
        }
        let n = inner(&v, &v, d).re.sqrt();
        if n > lit(1e-3) {
            for x in v.iter_mut().take(d) {
                *x = *x / n;
            }
            basis.push(v);
        }
    }
    Ok(basis)
}

/// `⟨Γ_i⟩` averaged over the ensemble `states`.
pub(crate) fn spin_of<T: Real>(levels: usize, states: &[State<T>]) -> [T; 4] {
    let n = if levels == 4 { 4 } else { 3 };
    let mut out = [T::zero(); 4];
    let w = T::one() / from_usize::<T>(states.len());
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut e = [T::zero(); 4];
        e[i] = T::one();
        let g = hamiltonian(levels, &e);
        for s in states {
            *o = *o + inner(s, &apply(&g, s, levels), levels).re * w;
        }
    }
    out
}

fn initial_states<T: Real>(
    field: &PointField<T>,
    protocol: &QuenchProtocol<T>,
    init: &InitialState<T>,
) -> Result<Vec<State<T>>, TdseError> {
    let d = field.levels;
    match init {
        InitialState::Ground | InitialState::GroundPure => {
            let h0 = if protocol.kind == ProtocolKind::Coulomb && protocol.g == T::zero() {
                // sudden limit: g/t_start dominates for every g > 0
                let mut e = [T::zero(); 4];
                e[field.quench] = T::one();
                e
            } else {
                field.at(protocol, protocol.t_start)
            };
            let mut g = ground_manifold(d, &h0)?;
            if matches!(init, InitialState::GroundPure) {
                g.truncate(1);
            }
            Ok(g)
        }
        InitialState::Custom(v) => {
            if v.len() != d {
                return Err(TdseError::InvalidInitial(format!("expected {d} amplitudes, got {}", v.len())));
            }
            let n: T = v.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
            if (n - T::one()).abs() > lit(1e-10) {
                return Err(TdseError::InvalidInitial(format!("state norm² = {n}, expected 1")));
            }
            let mut s = [C::new(T::zero(), T::zero()); 4];
            s[..d].copy_from_slice(v);
            Ok(vec![s])
        }
    }
}

/// Driven evolution of an ensemble of pure states from `t_start` to
/// `t_quench_end`, calling `on_stop` at each requested time.
struct Driven<'a, T: Real> {
    field: &'a PointField<T>,
    protocol: &'a QuenchProtocol<T>,
    h_static: [[C<T>; 4]; 4],
    g_quench: [[C<T>; 4]; 4],
    m: usize,
}

impl<'a, T: Real> Driven<'a, T> {
    fn new(field: &'a PointField<T>, protocol: &'a QuenchProtocol<T>, m: usize) -> Self {
        let mut e = [T::zero(); 4];
        e[field.quench] = T::one();
        Driven {
            field,
            protocol,
            h_static: hamiltonian(field.levels, &field.h),
            g_quench: hamiltonian(field.levels, &e),
            m,
        }
    }

    fn rhs<const N: usize>(&self, t: T, y: &[T; N], dy: &mut [T; N]) {
        let d = self.field.levels;
        let q = self.protocol.quench_term(t);
        for s in 0..self.m {
            let base = 2 * s * d;
            for r in 0..d {
                let mut ar = T::zero();
                let mut ai = T::zero();
                for c in 0..d {
                    let h = self.h_static[r][c] + self.g_quench[r][c] * q;
                    let yr = y[base + 2 * c];
                    let yi = y[base + 2 * c + 1];
                    ar = ar + h.re * yr - h.im * yi;
                    ai = ai + h.re * yi + h.im * yr;
                }
                // -i (ar + i ai)
                dy[base + 2 * r] = ai;
                dy[base + 2 * r + 1] = -ar;
            }
        }
    }

    fn pack<const N: usize>(&self, states: &[State<T>]) -> [T; N] {
        let d = self.field.levels;
        let mut y = [T::zero(); N];
        for (s, st) in states.iter().enumerate() {
            for i in 0..d {
                y[2 * (s * d + i)] = st[i].re;
                y[2 * (s * d + i) + 1] = st[i].im;
            }
        }
        y
    }

    fn unpack<const N: usize>(&self, y: &[T; N]) -> Vec<State<T>> {
        let d = self.field.levels;
        (0..self.m)
            .map(|s| {
                let mut st = [C::new(T::zero(), T::zero()); 4];
                for i in 0..d {
                    st[i] = C::new(y[2 * (s * d + i)], y[2 * (s * d + i) + 1]);
                }
                st
            })
            .collect()
    }

    fn run<const N: usize>(
        &self,
        states: &[State<T>],
        tol: T,
        stops: &[T],
        on_stop: &mut dyn FnMut(T, &[State<T>]),
    ) -> Result<(Vec<State<T>>, OdeStats), TdseError> {
        let opts = OdeOptions::new(tol)?;
        let mut ode = Dop853::new(self.protocol.t_start, self.pack::<N>(states), opts);
        let mut f = |t: T, y: &[T; N], dy: &mut [T; N]| self.rhs(t, y, dy);
        for &ts in stops {
            if ts > ode.t && ts <= self.protocol.t_quench_end {
                ode.advance_to(&mut f, ts)?;
                on_stop(ts, &self.unpack(&ode.y));
            }
        }
        ode.advance_to(&mut f, self.protocol.t_quench_end)?;
        Ok((self.unpack(&ode.y), ode.stats))
    }
}

/// State of the system at the end of the driven evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchOutcome<T> {
    pub t: T,
    pub levels: usize,
    pub states: Vec<State<T>>,
    pub stats: OdeStats,
    /// Largest `|‖ψ‖² - 1|` over the ensemble.
    pub norm_drift: T,
}

fn drive<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    init: &InitialState<T>,
    tol: T,
    stops: &[T],
    on_stop: &mut dyn FnMut(T, &[State<T>]),
) -> Result<QuenchOutcome<T>, TdseError> {
    protocol.validate()?;
    let states = initial_states(field, protocol, init)?;
    let m = states.len();
    let driven = Driven::new(field, protocol, m);
    let (out, stats) = match (field.levels, m) {
        (2, 1) => driven.run::<4>(&states, tol, stops, on_stop)?,
        (4, 1) => driven.run::<8>(&states, tol, stops, on_stop)?,
        (4, 2) => driven.run::<16>(&states, tol, stops, on_stop)?,
        (l, m) => return Err(TdseError::InvalidInitial(format!("unsupported ensemble: {m} states of {l} levels"))),
    };
    let norm_drift =
        out.iter().map(|s| (inner(s, s, field.levels).re - T::one()).abs()).fold(T::zero(), |a, b| a.max(b));
    Ok(QuenchOutcome { t: protocol.t_quench_end, levels: field.levels, states: out, stats, norm_drift })
}

/// Integrates the driven part only.
pub fn evolve_quench<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    init: &InitialState<T>,
    tol: T,
) -> Result<QuenchOutcome<T>, TdseError> {
    drive(protocol, field, init, tol, &[], &mut |_, _| {})
}

/// Exact free evolution under the post-quench field for a time `tau`.
pub(crate) fn free_evolve<T: Real>(field: &PointField<T>, states: &[State<T>], tau: T) -> Vec<State<T>> {
    let d = field.levels;
    let norm = field.post_norm();
    let hm = hamiltonian(d, &field.h);
    let (s, c) = (norm * tau).sin_cos();
    states
        .iter()
        .map(|psi| {
            let hp = apply(&hm, psi, d);
            let mut out = [C::new(T::zero(), T::zero()); 4];
            for i in 0..d {
                // cos ψ - i sin Hψ/|h|
                out[i] = psi[i] * c + C::new(hp[i].im, -hp[i].re) * (s / norm);
            }
            out
        })
        .collect()
}

/// Period `π/|h|` of the post-quench precession.
pub fn post_quench_period<T: Real>(field: &PointField<T>) -> Result<T, TdseError> {
    let n = field.post_norm();
    if n > T::zero() && n.is_finite() {
        Ok(T::PI() / n)
    } else {
        Err(TdseError::ZeroField)
    }
}

/// Averaging window snapped to a whole number of post-quench periods.
pub fn snapped_window<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
) -> Result<AverageWindow<T>, TdseError> {
    let period = post_quench_period(field)?;
    let len = protocol.t_avg_end - protocol.t_avg_begin;
    let required = period * lit(10.0);
    if len < required {
        return Err(TdseError::WindowTooShort { required: to_f64(required), got: to_f64(len) });
    }
    let cycles = (len / period).floor();
    Ok(AverageWindow { begin: protocol.t_avg_begin, end: protocol.t_avg_begin + cycles * period, period })
}

pub(crate) fn window_times<T: Real>(w: &AverageWindow<T>, samples_per_period: usize) -> Vec<T> {
    let cycles = ((w.end - w.begin) / w.period).round().to_usize().unwrap_or(0);
    let n = cycles * samples_per_period;
    let dt = w.period / from_usize::<T>(samples_per_period);
    (0..=n).map(|j| w.begin + dt * from_usize::<T>(j)).collect()
}

pub(crate) fn quench_times<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    samples_per_period: usize,
) -> Result<Vec<T>, TdseError> {
    let dt = post_quench_period(field)? / from_usize::<T>(samples_per_period);
    let span = protocol.t_quench_end - protocol.t_start;
    let n = (span / dt).ceil().to_usize().unwrap_or(0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(protocol.t_start);
    for j in 1..n {
        out.push(protocol.t_start + dt * from_usize::<T>(j));
    }
    out.push(protocol.t_quench_end);
    Ok(out)
}

fn sample<T: Real>(t: T, levels: usize, states: &[State<T>]) -> TrajectorySample<T> {
    let n = if levels == 4 { 4 } else { 3 };
    TrajectorySample {
        t,
        state: states.iter().map(|s| s[..levels].to_vec()).collect(),
        spin: spin_of(levels, states)[..n].to_vec(),
    }
}

/// Full trajectory through the driven part and the averaging window.
pub fn integrate<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    init: &InitialState<T>,
    tol: T,
    sampling: Sampling,
) -> Result<Vec<TrajectorySample<T>>, TdseError> {
    let spp = sampling.samples_per_period.max(20);
    let window = snapped_window(protocol, field)?;
    let mut samples = Vec::new();
    let stops = if sampling.record_quench { quench_times(protocol, field, spp)? } else { Vec::new() };
    if sampling.record_quench {
        let init_states = initial_states(field, protocol, init)?;
        samples.push(sample(protocol.t_start, field.levels, &init_states));
    }
    let levels = field.levels;
    let outcome = drive(protocol, field, init, tol, &stops, &mut |t, s| samples.push(sample(t, levels, s)))?;
    if sampling.record_quench && samples.last().map(|s| s.t) != Some(outcome.t) {
        samples.push(sample(outcome.t, levels, &outcome.states));
    }
    for t in window_times(&window, spp) {
        if samples.last().is_some_and(|s| s.t >= t) {
            continue;
        }
        let states = free_evolve(field, &outcome.states, t - outcome.t);
        samples.push(sample(t, levels, &states));
    }
    Ok(samples)
}

/// Four-level trajectory. `start` chooses between the uniform mixture of the
/// degenerate ground manifold and a single pure state inside it.
pub fn integrate_four_level<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    tol: T,
    start: FourLevelStart,
    sampling: Sampling,
) -> Result<Vec<TrajectorySample<T>>, TdseError> {
    if field.levels != 4 {
        return Err(TdseError::InvalidInitial("integrate_four_level needs a four-level field".into()));
    }
    integrate(protocol, field, &start.into(), tol, sampling)
}

/// Time-averaged `⟨Γ_i⟩` after the quench, without storing a trajectory.
pub fn averaged_spin_numeric<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    init: &InitialState<T>,
    tol: T,
) -> Result<[T; 4], TdseError> {
    let window = snapped_window(protocol, field)?;
    let outcome = evolve_quench(protocol, field, init, tol)?;
    Ok(average_free(field, &outcome, &window, 32))
}

/// Trapezoidal average of the exactly propagated post-quench state.
pub(crate) fn average_free<T: Real>(
    field: &PointField<T>,
    outcome: &QuenchOutcome<T>,
    window: &AverageWindow<T>,
    samples_per_period: usize,
) -> [T; 4] {
    let times = window_times(window, samples_per_period);
    let n = times.len();
    let mut acc = [T::zero(); 4];
    let half = lit::<T>(0.5);
    for (j, &t) in times.iter().enumerate() {
        let w = if j == 0 || j + 1 == n { half } else { T::one() };
        let s = spin_of(field.levels, &free_evolve(field, &outcome.states, t - outcome.t));
        for i in 0..4 {
            acc[i] = acc[i] + s[i] * w;
        }
    }
    let denom = from_usize::<T>(n - 1);
    acc.map(|a| a / denom)
}

/// Occupation of the upper instantaneous eigenspace of `H(t_quench_end)`,
/// an adiabatic invariant of the late driven evolution.
pub fn excited_occupation<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    outcome: &QuenchOutcome<T>,
) -> T {
    let h = field.with_quench(match protocol.kind {
        ProtocolKind::Coulomb => protocol.g / protocol.t_quench_end,
        ProtocolKind::Linear => protocol.beta * protocol.t_quench_end,
    });
    let norm = field_norm(&h, field.levels);
    let s = spin_of(field.levels, &outcome.states);
    let n = if field.levels == 4 { 4 } else { 3 };
    let proj = (0..n).fold(T::zero(), |a, i| a + s[i] * h[i]) / norm;
    (T::one() + proj) * lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz::{transition_probability, wavefunction_from_ground, LzParams};
    use crate::models::GammaBasis;
    use std::f64::consts::PI;

    #[test]
    fn explicit_hamiltonian_matches_gamma_basis() {
        let h = [0.3, -0.7, 1.1, 0.4];
        let m4 = hamiltonian(4, &h);
        let g4 = GammaBasis::<f64>::four_band().hamiltonian(&h);
        let m2 = hamiltonian(2, &h);
        let g2 = GammaBasis::<f64>::two_band().hamiltonian(&h[..3]);
        for r in 0..4 {
            for c in 0..4 {
                assert!((m4[r][c] - g4[r * 4 + c]).norm() < 1e-15);
                if r < 2 && c < 2 {
                    assert!((m2[r][c] - g2[r * 2 + c]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn ground_manifold_is_lower_eigenspace() {
        let h = [0.2, -0.5, 0.9, 0.3];
        let hm = hamiltonian(4, &h);
        let n = field_norm(&h, 4);
        let g = ground_manifold(4, &h).unwrap();
        assert_eq!(g.len(), 2);
        for v in &g {
            let hv = apply(&hm, v, 4);
            for i in 0..4 {
                assert!((hv[i] + v[i] * n).norm() < 1e-14);
            }
        }
        assert!(inner(&g[0], &g[1], 4).norm() < 1e-14);
    }

    #[test]
    fn stationary_eigenvector() {
        let field = PointField::<f64>::two_level([0.4, 0.3, -0.5], crate::lz::Axis::Z);
        let protocol = QuenchProtocol::coulomb(0.0, 0.1, 20.0, 60.0).unwrap();
        let g = ground_manifold(2, &field.h).unwrap();
        let init = InitialState::Custom(g[0][..2].to_vec());
        let traj = integrate(&protocol, &field, &init, 1e-10, Sampling::default()).unwrap();
        let s0 = traj[0].spin.clone();
        for s in &traj {
            for i in 0..3 {
                assert!((s.spin[i] - s0[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_g_is_the_sudden_limit() {
        let lz = LzParams::new(0.0, 2.0, PI / 3.0, 0.0).unwrap();
        let field = PointField::from_lz(&lz);
        let p = QuenchProtocol::coulomb(0.0, 1e-6, 10.0, 60.0).unwrap();
        let out = evolve_quench(&p, &field, &InitialState::Ground, 1e-10).unwrap();
        let pn = excited_occupation(&p, &field, &out);
        assert!((pn - lz.transition_probability()).abs() < 1e-9);
        assert!((pn - 0.25).abs() < 1e-9);
    }

    #[test]
    fn matches_closed_form_wavefunction() {
        // (g, ε, θ) = (0.5, 2, π/3) at t = 5, started from the ground state
        let p = LzParams::new(0.5, 2.0, PI / 3.0, 0.0).unwrap();
        let field = PointField::from_lz(&p);
        let protocol = QuenchProtocol::coulomb(0.5, default_coulomb_start(0.5, 2.0), 5.0, 100.0).unwrap();
        let out = evolve_quench(&protocol, &field, &InitialState::Ground, 1e-12).unwrap();
        let exact = wavefunction_from_ground(&p, 5.0).unwrap();
        let ov = out.states[0][0].conj() * exact[0] + out.states[0][1].conj() * exact[1];
        assert!(1.0 - ov.norm_sqr() < 1e-6, "fidelity {}", ov.norm_sqr());
    }

    #[test]
    fn numeric_probability_matches_closed_form() {
        for &(g, th) in &[(1.0, PI / 3.0), (0.2, 2.0), (0.05, 1.0)] {
            let p = LzParams::new(g, 2.0, th, 0.0).unwrap();
            let field = PointField::from_lz(&p);
            let protocol = QuenchProtocol::coulomb(g, default_coulomb_start(g, 2.0), 2000.0, 20.0).unwrap();
            let out = evolve_quench(&protocol, &field, &InitialState::Ground, 1e-11).unwrap();
            let pn = excited_occupation(&protocol, &field, &out);
            let pa = transition_probability(g, th).unwrap();
            assert!((pn - pa).abs() < 1e-4, "g={g} th={th}: {pn} vs {pa}");
            assert!(out.norm_drift < 100.0 * 1e-11);
        }
    }

    #[test]
    fn window_too_short_is_reported() {
        let field = PointField::two_level([0.0, 0.0, 1.0], crate::lz::Axis::X);
        let protocol = QuenchProtocol::coulomb(1.0, 1e-6, 10.0, 5.0).unwrap();
        match averaged_spin_numeric(&protocol, &field, &InitialState::Ground, 1e-9) {
            Err(TdseError::WindowTooShort { required, .. }) => assert!((required - 10.0 * PI).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn four_level_polarized_state_is_stationary() {
        let field = PointField::<f64>::four_level([0.8, 0.0, 0.0, 0.0]);
        let protocol = QuenchProtocol::coulomb(1.0, 0.015, 50.0, 50.0).unwrap();
        let traj = integrate_four_level(&protocol, &field, 1e-10, FourLevelStart::Mixed, Sampling::default()).unwrap();
        for s in &traj {
            assert!((s.spin[0] + 1.0).abs() < 1e-8);
            assert!(s.spin[1..].iter().all(|x| x.abs() < 1e-8));
        }
    }

    #[test]
    fn four_level_reduces_to_two_level_average() {
        // H² = |h|² makes every ⟨γ_i⟩ follow the two-level closed form
        let h: [f64; 4] = [0.3, 0.25, -0.4, 0.1];
        let field = PointField::four_level(h);
        let g = 0.7;
        let protocol = QuenchProtocol::coulomb(g, default_coulomb_start(g, 1.0), 3000.0, 200.0).unwrap();
        let s = averaged_spin_numeric(&protocol, &field, &InitialState::Ground, 1e-11).unwrap();
        let eps = field.post_norm();
        let c = h[0] / eps;
        let pr = crate::lz::probability_from_cos(g, c);
        for i in 0..4 {
            let expect = -(1.0 - 2.0 * pr) * h[i] / eps;
            assert!((s[i] - expect).abs() < 2e-3, "γ{i}: {} vs {}", s[i], expect);
        }
    }
}
