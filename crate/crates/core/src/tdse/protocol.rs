use serde::{Deserialize, Serialize};

use super::TdseError;
use crate::lz::{Axis, LzParams};
use crate::models::BandField;
use crate::real::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// `g/t` on the quench component, `t > 0`.
    Coulomb,
    /// `βt` on the quench component, typically from `t < 0` up to `0`.
    Linear,
}

/// Time dependence of the quench term plus the evolution and averaging
/// windows. The quench term is switched off for `t > t_quench_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol<T> {
    pub kind: ProtocolKind,
    #[serde(default)]
    pub g: T,
    #[serde(default)]
    pub beta: T,
    pub t_start: T,
    pub t_quench_end: T,
    pub t_avg_begin: T,
    pub t_avg_end: T,
}

/// Start time that keeps the initial-state error of a Coulomb run far below
/// `1e-4` in probability. Starting in the instantaneous ground state at `t_s`
/// misses a non-adiabatic amplitude of order `ε t_s / g²`.
pub fn default_coulomb_start<T: Real>(g: T, epsilon: T) -> T {
    let one = T::one();
    let g2 = (g * g).min(one);
    let base = lit::<T>(1e-6) * one.min(one / epsilon.max(lit(1e-300)));
    if g2 > T::zero() {
        base * g2
    } else {
        base
    }
}

impl<T: Real> QuenchProtocol<T> {
    /// Coulomb protocol from `t_start` to `t_quench_end`, then averaged over
    /// `[t_quench_end, t_quench_end + window]`.
    pub fn coulomb(g: T, t_start: T, t_quench_end: T, window: T) -> Result<Self, TdseError> {
        let p = QuenchProtocol {
            kind: ProtocolKind::Coulomb,
            g,
            beta: T::zero(),
            t_start,
            t_quench_end,
            t_avg_begin: t_quench_end,
            t_avg_end: t_quench_end + window,
        };
        p.validate()?;
        Ok(p)
    }

    /// Linear protocol `βt` from `-t0` to `0`, then averaged over `[0, window]`.
    pub fn linear(beta: T, t0: T, window: T) -> Result<Self, TdseError> {
        let p = QuenchProtocol {
            kind: ProtocolKind::Linear,
            g: T::zero(),
            beta,
            t_start: -t0,
            t_quench_end: T::zero(),
            t_avg_begin: T::zero(),
            t_avg_end: window,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TdseError> {
        let bad = |m: &str| Err(TdseError::InvalidProtocol(m.to_string()));
        let vals = [self.g, self.beta, self.t_start, self.t_quench_end, self.t_avg_begin, self.t_avg_end];
        if vals.iter().any(|v| !v.is_finite()) {
            return bad("protocol values must be finite");
        }
        match self.kind {
            ProtocolKind::Coulomb => {
                if self.t_start <= T::zero() {
                    return bad("Coulomb protocol needs t_start > 0");
                }
                if self.g < T::zero() {
                    return bad("g must be >= 0");
                }
            }
            ProtocolKind::Linear => {
                if self.beta <= T::zero() {
                    return bad("beta must be > 0");
                }
            }
        }
        if self.t_quench_end <= self.t_start {
            return bad("t_quench_end must exceed t_start");
        }
        if self.t_avg_begin < self.t_quench_end {
            return bad("averaging must begin after the quench ends");
        }
        if self.t_avg_end <= self.t_avg_begin {
            return bad("averaging window is empty");
        }
        Ok(())
    }

    /// Instantaneous protocol term.
    pub fn quench_term(&self, t: T) -> T {
        if t > self.t_quench_end {
            return T::zero();
        }
        match self.kind {
            ProtocolKind::Coulomb => self.g / t,
            ProtocolKind::Linear => self.beta * t,
        }
    }
}

/// A band field frozen at one momentum: static components plus the index of
/// the quenched one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointField<T> {
    /// `(h_x, h_y, h_z, 0)` for two levels, `(h_0, h_1, h_2, h_3)` for four.
    pub h: [T; 4],
    pub levels: usize,
    pub quench: usize,
}

impl<T: Real> PointField<T> {
    pub fn two_level(h: [T; 3], axis: Axis) -> Self {
        PointField { h: [h[0], h[1], h[2], T::zero()], levels: 2, quench: axis.index() }
    }

    pub fn four_level(h: [T; 4]) -> Self {
        PointField { h, levels: 4, quench: 0 }
    }

    /// Canonical Landau–Zener problem: static field `ε n`, quench on `z`.
    pub fn from_lz(p: &LzParams<T>) -> Self {
        let n = p.direction();
        Self::two_level([p.epsilon * n[0], p.epsilon * n[1], p.epsilon * n[2]], Axis::Z)
    }

    pub fn n_components(&self) -> usize {
        if self.levels == 4 {
            4
        } else {
            3
        }
    }

    /// Field with the protocol term `q` added.
    pub fn with_quench(&self, q: T) -> [T; 4] {
        let mut h = self.h;
        h[self.quench] = h[self.quench] + q;
        h
    }

    pub fn at(&self, protocol: &QuenchProtocol<T>, t: T) -> [T; 4] {
        self.with_quench(protocol.quench_term(t))
    }

    /// Magnitude of the post-quench field.
    pub fn post_norm(&self) -> T {
        self.h[..self.n_components()].iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
    }
}

impl<T: Real> BandField<T> {
    /// The field at momentum `k`, ready for integration.
    pub fn at(&self, k: &[T]) -> PointField<T> {
        let h = self.post_quench(k);
        if self.bands() == 4 {
            PointField::four_level(h)
        } else {
            PointField { h, levels: 2, quench: self.quench_component() }
        }
    }
}
