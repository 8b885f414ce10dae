//! Dormand–Prince 8(5,3) explicit Runge–Kutta with adaptive step control.
//!
//! The state is a fixed-size real array; complex amplitudes are stored as
//! interleaved `(re, im)` pairs by the callers. Integration only runs forward
//! in time and is fully deterministic.

use thiserror::Error;

use crate::real::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {steps} steps at t = {t}")]
    TooManySteps { t: f64, steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("relative tolerance {0:e} outside [1e-12, 1e-6]")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    /// Relative tolerance on the 2-norm of the local error.
    pub rtol: T,
    /// Absolute floor of the error scale.
    pub atol: T,
    pub max_steps: usize,
    /// Optional cap on the step size.
    pub h_max: Option<T>,
}

impl<T: Real> OdeOptions<T> {
    pub fn new(rtol: T) -> Result<Self, OdeError> {
        let r = to_f64(rtol);
        if !(1e-12..=1e-6).contains(&r) {
            return Err(OdeError::BadTolerance(r));
        }
        Ok(OdeOptions { rtol, atol: rtol * lit(1e-3), max_steps: 50_000_000, h_max: None })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 12] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
        0.0,
    ],
    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
        0.0,
    ],
];
const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const E3: [f64; 13] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
    0.0,
];
const E5: [f64; 13] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
];

const STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

fn norm<T: Real, const N: usize>(v: &[T; N]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

/// Resumable integrator for `y' = f(t, y)`.
#[derive(Debug, Clone)]
pub struct Dop853<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    h: Option<T>,
    opts: OdeOptions<T>,
    pub stats: OdeStats,
}

impl<T: Real, const N: usize> Dop853<T, N> {
    pub fn new(t0: T, y0: [T; N], opts: OdeOptions<T>) -> Self {
        Dop853 { t: t0, y: y0, h: None, opts, stats: OdeStats::default() }
    }

    fn scale(&self, a: &[T; N], b: &[T; N]) -> T {
        self.opts.atol + self.opts.rtol * norm(a).max(norm(b))
    }

    fn initial_step<F: FnMut(T, &[T; N], &mut [T; N])>(&mut self, f: &mut F, f0: &[T; N], span: T) -> T {
        let sc = self.scale(&self.y, &self.y);
        let d0 = norm(&self.y) / sc;
        let d1 = norm(f0) / sc;
        let tiny = lit::<T>(1e-5);
        let h0 = if d0 < tiny || d1 < tiny { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = [T::zero(); N];
        for i in 0..N {
            y1[i] = self.y[i] + h0 * f0[i];
        }
        let mut f1 = [T::zero(); N];
        f(self.t + h0, &y1, &mut f1);
        self.stats.evaluations += 1;
        let mut diff = [T::zero(); N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = norm(&diff) / sc / h0;
        let m = d1.max(d2);
        let h1 =
            if m <= lit(1e-15) { (h0 * lit(1e-3)).max(lit(1e-6)) } else { (lit::<T>(0.01) / m).powf(lit(1.0 / 8.0)) };
        (h0 * lit(100.0)).min(h1)
    }

    /// Advances to exactly `t_end`.
    pub fn advance_to<F: FnMut(T, &[T; N], &mut [T; N])>(&mut self, f: &mut F, t_end: T) -> Result<(), OdeError> {
        if t_end <= self.t {
            return Ok(());
        }
        let mut k = [[T::zero(); N]; STAGES];
        f(self.t, &self.y, &mut k[0]);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, &k[0].clone(), t_end - self.t),
        };
        let mut just_rejected = false;
        let c: [T; STAGES] = C.map(lit);
        let b: [T; STAGES] = B.map(lit);
        let mut tmp = [T::zero(); N];
        let mut y_new = [T::zero(); N];
        let mut e3 = [T::zero(); N];
        let mut e5 = [T::zero(); N];
        loop {
            if let Some(hm) = self.opts.h_max {
                h = h.min(hm);
            }
            let remaining = t_end - self.t;
            let last = h >= remaining;
            let h_step = if last { remaining } else { h };
            if h_step <= T::epsilon() * lit::<T>(10.0) * self.t.abs().max(T::one()) && !last {
                return Err(OdeError::StepUnderflow { t: to_f64(self.t), h: to_f64(h_step) });
            }
            for s in 1..STAGES {
                for i in 0..N {
                    let mut acc = T::zero();
                    for j in 0..s {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc = acc + lit::<T>(a) * k[j][i];
                        }
                    }
                    tmp[i] = self.y[i] + h_step * acc;
                }
                f(self.t + c[s] * h_step, &tmp, &mut k[s]);
            }
            self.stats.evaluations += STAGES - 1;
            for i in 0..N {
                let mut acc = T::zero();
                let mut a3 = T::zero();
                let mut a5 = T::zero();
                for s in 0..STAGES {
                    acc = acc + b[s] * k[s][i];
                    a3 = a3 + lit::<T>(E3[s]) * k[s][i];
                    a5 = a5 + lit::<T>(E5[s]) * k[s][i];
                }
                y_new[i] = self.y[i] + h_step * acc;
                e3[i] = a3;
                e5[i] = a5;
            }
            let sc = self.scale(&self.y, &y_new);
            let n5 = norm(&e5) / sc;
            let n3 = norm(&e3) / sc;
            let err = if n5 == T::zero() && n3 == T::zero() {
                T::zero()
            } else {
                let n5sq = n5 * n5;
                h_step * n5sq / (n5sq + lit::<T>(0.01) * n3 * n3).sqrt()
            };
            if !err.is_finite() || y_new.iter().any(|x| !x.is_finite()) {
                if h_step <= T::epsilon() * self.t.abs().max(T::one()) {
                    return Err(OdeError::NonFinite { t: to_f64(self.t) });
                }
                h = h_step * lit(MIN_FACTOR);
                self.stats.rejected += 1;
                just_rejected = true;
                continue;
            }
            if err <= T::one() {
                let mut factor = if err == T::zero() {
                    lit(MAX_FACTOR)
                } else {
                    (lit::<T>(SAFETY) * err.powf(lit(-1.0 / 8.0))).min(lit(MAX_FACTOR))
                };
                if just_rejected {
                    factor = factor.min(T::one());
                }
                self.t = if last { t_end } else { self.t + h_step };
                self.y = y_new;
                self.stats.accepted += 1;
                just_rejected = false;
                let h_next = h_step * factor;
                if last {
                    // keep the unclipped proposal for the next call
                    self.h = Some(if h_step < h { h } else { h_next });
                    return Ok(());
                }
                h = h_next;
                f(self.t, &self.y, &mut k[0]);
                self.stats.evaluations += 1;
                if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                    return Err(OdeError::TooManySteps { t: to_f64(self.t), steps: self.opts.max_steps });
                }
            } else {
                let factor = (lit::<T>(SAFETY) * err.powf(lit(-1.0 / 8.0))).max(lit(MIN_FACTOR));
                h = h_step * factor;
                self.stats.rejected += 1;
                just_rejected = true;
                if h <= T::epsilon() * lit::<T>(10.0) * self.t.abs().max(T::one()) {
                    return Err(OdeError::StepUnderflow { t: to_f64(self.t), h: to_f64(h) });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        for s in 0..STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-13, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_oscillator() {
        let mut f = |_t: f64, y: &[f64; 2], d: &mut [f64; 2]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let mut ode = Dop853::new(0.0, [1.0, 0.0], OdeOptions::new(1e-10).unwrap());
        ode.advance_to(&mut f, 100.0).unwrap();
        assert!((ode.y[0] - 100f64.cos()).abs() < 1e-7);
        assert!((ode.y[1] + 100f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn exponential_growth() {
        let mut f = |_t: f64, y: &[f64; 1], d: &mut [f64; 1]| d[0] = y[0];
        let mut ode = Dop853::new(0.0, [1.0], OdeOptions::new(1e-12).unwrap());
        ode.advance_to(&mut f, 2.0).unwrap();
        assert!((ode.y[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn resumes_at_stop_times() {
        let mut f = |_t: f64, y: &[f64; 2], d: &mut [f64; 2]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let mut ode = Dop853::new(0.0, [1.0, 0.0], OdeOptions::new(1e-10).unwrap());
        for i in 1..=50 {
            ode.advance_to(&mut f, i as f64 * 0.1).unwrap();
            assert_eq!(ode.t, i as f64 * 0.1);
        }
        assert!((ode.y[0] - 5f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut f = |t: f64, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = (t * 3.0).sin() * y[1];
                d[1] = -y[0] / (1.0 + t);
            };
            let mut ode = Dop853::new(0.0, [1.0, 0.5], OdeOptions::new(1e-9).unwrap());
            ode.advance_to(&mut f, 30.0).unwrap();
            ode.y
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_tolerance_out_of_range() {
        assert!(OdeOptions::<f64>::new(1e-3).is_err());
        assert!(OdeOptions::<f64>::new(1e-14).is_err());
    }
}
