use serde::{Deserialize, Serialize};

use super::{averaged_spin, LzError, LzParams};
use crate::real::{norm, Real};

/// Spin axis along which the quench term acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    #[default]
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        match i {
            0 => Some(Axis::X),
            1 => Some(Axis::Y),
            2 => Some(Axis::Z),
            _ => None,
        }
    }

    /// Cyclic relabeling that moves this axis to `z`: canonical component `i`
    /// is original component `permutation()[i]`.
    pub fn permutation(self) -> [usize; 3] {
        match self {
            Axis::Z => [0, 1, 2],
            Axis::Y => [2, 0, 1],
            Axis::X => [1, 2, 0],
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

/// A static field relabeled so that the quench axis is `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCanonicalization<T> {
    pub params: LzParams<T>,
    pub axis: Axis,
    pub permutation: [usize; 3],
}

impl<T: Real> AxisCanonicalization<T> {
    pub fn to_canonical(&self, v: [T; 3]) -> [T; 3] {
        let p = self.permutation;
        [v[p[0]], v[p[1]], v[p[2]]]
    }

    pub fn to_original(&self, v: [T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, &src) in self.permutation.iter().enumerate() {
            out[src] = v[i];
        }
        out
    }

    /// Time-averaged spin expressed in the original axes.
    pub fn averaged_spin(&self) -> [T; 3] {
        self.to_original(averaged_spin(&self.params))
    }
}

/// Builds the canonical Landau–Zener parameters for a static field `field`
/// (original axes) quenched along `axis` with strength `g`.
pub fn canonicalize_axis<T: Real>(field: [T; 3], axis: Axis, g: T) -> Result<AxisCanonicalization<T>, LzError> {
    let permutation = axis.permutation();
    let h = [field[permutation[0]], field[permutation[1]], field[permutation[2]]];
    let eps = norm(&h);
    if !(eps.is_finite() && eps > T::zero()) {
        return Err(LzError::ZeroField);
    }
    let c = (h[2] / eps).max(-T::one()).min(T::one());
    let theta = c.acos();
    let phi = if h[0] == T::zero() && h[1] == T::zero() { T::zero() } else { h[1].atan2(h[0]) };
    let params = LzParams::new(g, eps, theta, phi)?;
    Ok(AxisCanonicalization { params, axis, permutation })
}
