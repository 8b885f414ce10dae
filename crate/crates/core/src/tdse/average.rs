use super::{TdseError, TrajectorySample};
use crate::real::{lit, to_f64, Real};

/// Averaging interval and the post-quench period it must resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageWindow<T> {
    pub begin: T,
    pub end: T,
    /// Post-quench precession period `π/|h|`.
    pub period: T,
}

/// Trapezoidal time average of the sampled spin over `window`.
pub fn time_average_spin<T: Real>(
    traj: &[TrajectorySample<T>],
    window: &AverageWindow<T>,
) -> Result<Vec<T>, TdseError> {
    let len = window.end - window.begin;
    let required = window.period * lit(10.0);
    if len < required {
        return Err(TdseError::WindowTooShort { required: to_f64(required), got: to_f64(len) });
    }
    let slack = len * lit(1e-9);
    let pts: Vec<&TrajectorySample<T>> =
        traj.iter().filter(|s| s.t >= window.begin - slack && s.t <= window.end + slack).collect();
    let covered = pts.len() >= 2 && pts[0].t <= window.begin + slack && pts[pts.len() - 1].t >= window.end - slack;
    if !covered {
        return Err(TdseError::InvalidProtocol(format!(
            "trajectory does not cover the window [{}, {}]",
            window.begin, window.end
        )));
    }
    let d = pts[0].spin.len();
    let mut acc = vec![T::zero(); d];
    let half = lit::<T>(0.5);
    for w in pts.windows(2) {
        let dt = w[1].t - w[0].t;
        for i in 0..d {
            acc[i] = acc[i] + (w[0].spin[i] + w[1].spin[i]) * half * dt;
        }
    }
    let span = pts[pts.len() - 1].t - pts[0].t;
    Ok(acc.into_iter().map(|a| a / span).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(f: impl Fn(f64) -> Vec<f64>, n: usize, t1: f64) -> Vec<TrajectorySample<f64>> {
        (0..=n)
            .map(|j| {
                let t = t1 * j as f64 / n as f64;
                TrajectorySample { t, state: vec![], spin: f(t) }
            })
            .collect()
    }

    #[test]
    fn constant_spin() {
        let tr = traj(|_| vec![0.1, -0.2, 0.3], 100, 10.0);
        let w = AverageWindow { begin: 0.0, end: 10.0, period: 1.0 };
        let a = time_average_spin(&tr, &w).unwrap();
        assert!(a.iter().zip([0.1, -0.2, 0.3]).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn oscillation_averages_out_over_whole_periods() {
        let tr = traj(|t| vec![(2.0 * std::f64::consts::PI * t).cos() + 0.5], 320, 10.0);
        let w = AverageWindow { begin: 0.0, end: 10.0, period: 1.0 };
        let a = time_average_spin(&tr, &w).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn short_window_reports_minimum() {
        let tr = traj(|_| vec![0.0], 10, 5.0);
        let w = AverageWindow { begin: 0.0, end: 5.0, period: 1.0 };
        assert_eq!(time_average_spin(&tr, &w), Err(TdseError::WindowTooShort { required: 10.0, got: 5.0 }));
    }
}
