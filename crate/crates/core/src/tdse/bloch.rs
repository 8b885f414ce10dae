use super::{
    post_quench_period, quench_times, snapped_window, window_times, Dop853, OdeOptions, PointField, QuenchProtocol,
    Sampling, TdseError,
};
use crate::real::{cross3, Real};

/// Integrates `dσ/dt = -2 σ × h(t)` from `t0`, returning `σ` at `times`.
pub fn bloch_integrate<T: Real, H: Fn(T) -> [T; 3]>(
    h: H,
    sigma0: [T; 3],
    t0: T,
    times: &[T],
    tol: T,
) -> Result<Vec<(T, [T; 3])>, TdseError> {
    let mut ode = Dop853::new(t0, sigma0, OdeOptions::new(tol)?);
    let two = T::one() + T::one();
    let mut f = |t: T, s: &[T; 3], d: &mut [T; 3]| {
        let c = cross3(s, &h(t));
        for i in 0..3 {
            d[i] = -two * c[i];
        }
    };
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        ode.advance_to(&mut f, t)?;
        out.push((t, ode.y));
    }
    Ok(out)
}

/// Bloch-vector trajectory of a two-level quench, started antiparallel to
/// the field at `t_start` and sampled like [`super::integrate`].
pub fn bloch_trajectory<T: Real>(
    protocol: &QuenchProtocol<T>,
    field: &PointField<T>,
    tol: T,
    sampling: Sampling,
) -> Result<Vec<(T, [T; 3])>, TdseError> {
    protocol.validate()?;
    if field.levels != 2 {
        return Err(TdseError::InvalidInitial("Bloch dynamics needs a two-level field".into()));
    }
    post_quench_period(field)?;
    let spp = sampling.samples_per_period.max(20);
    let window = snapped_window(protocol, field)?;
    let mut times = if sampling.record_quench { quench_times(protocol, field, spp)? } else { Vec::new() };
    for t in window_times(&window, spp) {
        if times.last().is_none_or(|&l| t > l) {
            times.push(t);
        }
    }
    let h0 = field.at(protocol, protocol.t_start);
    let n = (h0[0] * h0[0] + h0[1] * h0[1] + h0[2] * h0[2]).sqrt();
    if !(n > T::zero()) {
        return Err(TdseError::ZeroField);
    }
    let sigma0 = [-h0[0] / n, -h0[1] / n, -h0[2] / n];
    let hf = |t: T| {
        let h = field.at(protocol, t);
        [h[0], h[1], h[2]]
    };
    let mut out = bloch_integrate(hf, sigma0, protocol.t_start, &times, tol)?;
    if sampling.record_quench && out.first().is_some_and(|s| s.0 == protocol.t_start) {
        out[0].1 = sigma0;
    }
    Ok(out)
}
