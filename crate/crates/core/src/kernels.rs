//! Numerical kernels over trajectories and scalar series.

use crate::error::{Error, Result};
use crate::scalar::{dist, Scalar};
use crate::trajectory::Trajectory;

/// Minimum sample count for the third-difference stencil with replicated boundaries.
pub const MIN_JERK_SAMPLES: usize = 7;

/// Linear interpolation onto `new_len` uniformly spaced parameters.
///
/// Endpoints are copied exactly and `dt` is rescaled so the total duration is
/// unchanged. Resampling to the current length returns identical samples.
pub fn resample<S: Scalar>(traj: &Trajectory<S>, new_len: usize) -> Result<Trajectory<S>> {
    if new_len < 2 {
        return Err(Error::param(format!("resample length must be >= 2, got {new_len}")));
    }
    if let Some(pos) = traj.samples().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / traj.dim(),
            col: pos % traj.dim(),
        });
    }
    let len = traj.len();
    if new_len == len {
        return Ok(traj.clone());
    }
    let dim = traj.dim();
    let span = S::from_usize_lossy(len - 1);
    let steps = S::from_usize_lossy(new_len - 1);
    let mut out = Vec::with_capacity(new_len * dim);
    for k in 0..new_len {
        if k == new_len - 1 {
            out.extend_from_slice(traj.row(len - 1));
            continue;
        }
        let u = S::from_usize_lossy(k) * span / steps;
        let i0 = u.floor().to_usize().unwrap_or(0).min(len - 2);
        let frac = u - S::from_usize_lossy(i0);
        let (a, b) = (traj.row(i0), traj.row(i0 + 1));
        out.extend(a.iter().zip(b).map(|(&x, &y)| x + (y - x) * frac));
    }
    let dt = traj.dt() * span / steps;
    Ok(traj.with_len(out, dt))
}

/// Per-sample jerk magnitude.
///
/// Each dimension is min-max normalized to `[0, 1]` (constant dimensions
/// contribute zero), differenced with the second-order central stencil
/// `(f[i+2] - 2 f[i+1] + 2 f[i-1] - f[i-2]) / (2 dt^3)`, and the per-dimension
/// values are combined with an L2 norm. The two samples at each end copy the
/// nearest interior value.
pub fn third_derivative_magnitude<S: Scalar>(traj: &Trajectory<S>) -> Result<Vec<S>> {
    let len = traj.len();
    if len < MIN_JERK_SAMPLES {
        return Err(Error::InvalidTrajectory(format!(
            "jerk needs at least {MIN_JERK_SAMPLES} samples, got {len}"
        )));
    }
    let dt3 = traj.dt() * traj.dt() * traj.dt();
    let two = S::lit(2.0);
    let mut sq = vec![S::zero(); len];
    for d in 0..traj.dim() {
        let col = traj.column(d);
        let (lo, hi) = col.iter().fold((S::infinity(), S::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let range = hi - lo;
        if !(range > S::zero()) {
            continue;
        }
        let f: Vec<S> = col.iter().map(|&v| (v - lo) / range).collect();
        for i in 2..len - 2 {
            let j = (f[i + 2] - two * f[i + 1] + two * f[i - 1] - f[i - 2]) / (two * dt3);
            sq[i] += j * j;
        }
    }
    let mut out: Vec<S> = sq.into_iter().map(|v| v.sqrt()).collect();
    let (first, last) = (out[2], out[len - 3]);
    out[0] = first;
    out[1] = first;
    out[len - 2] = last;
    out[len - 1] = last;
    Ok(out)
}

/// Centered moving average of width `w`, truncated at the ends (each output
/// averages only the in-range samples of its window).
pub fn sliding_window_mean<S: Scalar>(series: &[S], w: usize) -> Result<Vec<S>> {
    let n = series.len();
    if w == 0 || w > n {
        return Err(Error::param(format!("window must satisfy 1 <= w <= {n}, got {w}")));
    }
    let before = (w - 1) / 2;
    let after = w / 2;
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(n - 1);
            let sum: S = series[lo..=hi].iter().copied().sum();
            sum / S::from_usize_lossy(hi - lo + 1)
        })
        .collect())
}

/// Polyline length: sum of Euclidean steps.
pub fn arc_length<S: Scalar>(traj: &Trajectory<S>) -> S {
    traj.rows().zip(traj.rows().skip(1)).map(|(a, b)| dist(a, b)).sum()
}

/// Relative tolerance under which neighbouring values count as equal when
/// looking for plateaus.
pub const PLATEAU_RTOL: f64 = 1e-9;

/// Interior local maxima of a series. A run of equal values (within
/// `PLATEAU_RTOL` of the largest magnitude) counts once, at its lower middle,
/// when both neighbours of the run are strictly lower.
pub fn local_maxima<S: Scalar>(series: &[S]) -> Vec<usize> {
    let n = series.len();
    let scale = series.iter().fold(S::zero(), |m, v| m.max(v.abs()));
    let tol = scale * S::lit(PLATEAU_RTOL);
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if series[i] > series[i - 1] + tol {
            let mut j = i;
            while j + 1 < n && (series[j + 1] - series[i]).abs() <= tol {
                j += 1;
            }
            if j + 1 < n && series[j + 1] < series[i] - tol {
                out.push(i + (j - i) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile<S: Scalar>(values: &[S], q: f64) -> S {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = S::lit(pos - lo as f64);
    v[lo] + (v[hi] - v[lo]) * frac
}

/// Greedy selection of candidates in descending score (ties by lower index),
/// keeping pairwise spacing and distance to both ends of `0..len` at least
/// `min_gap`. Returns sorted indices.
pub(crate) fn greedy_spaced<S: Scalar>(
    candidates: &[usize],
    score: impl Fn(usize) -> S,
    len: usize,
    min_gap: usize,
) -> Vec<usize> {
    let mut order: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| i >= min_gap && i + min_gap < len)
        .collect();
    order.sort_by(|&a, &b| {
        score(b)
            .partial_cmp(&score(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| k.abs_diff(i) >= min_gap) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn resample_inserts_midpoint() {
        let t = Trajectory::from_rows(&[[0.0, 0.0], [1.0, 1.0]], 1.0).unwrap();
        let r = resample(&t, 3).unwrap();
        assert_eq!(r.row(1), &[0.5, 0.5]);
        assert_eq!(r.dt(), 0.5);
    }

    #[test]
    fn resample_sine_close_to_analytic() {
        let n = 101;
        let xs: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).sin())
            .collect();
        let t = Trajectory::from_flat(xs, 1, 0.01).unwrap();
        let r = resample(&t, 51).unwrap();
        let max_dev = (0..51)
            .map(|k| {
                let analytic = (2.0 * std::f64::consts::PI * k as f64 / 50.0).sin();
                (r.row(k)[0] - analytic).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-3, "max deviation {max_dev}");
        assert_relative_eq!(r.duration(), t.duration(), epsilon = 1e-12);
    }

    #[test]
    fn jerk_of_cubic_is_constant() {
        let n = 20;
        let dt = 0.1;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).powi(3)).collect();
        let range = ((n - 1) as f64).powi(3);
        let t = Trajectory::from_flat(xs, 1, dt).unwrap();
        let j = third_derivative_magnitude(&t).unwrap();
        let expected = 6.0 / dt.powi(3) / range;
        for v in &j {
            assert_relative_eq!(*v, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn jerk_zero_for_constant_and_line() {
        let c = Trajectory::from_flat(vec![3.0; 20], 2, 0.01).unwrap();
        assert!(third_derivative_magnitude(&c).unwrap().iter().all(|&v| v == 0.0));
        let l = Trajectory::from_series(&(0..15).map(|i| 2.0 * i as f64 - 1.0).collect::<Vec<_>>()).unwrap();
        assert!(third_derivative_magnitude(&l).unwrap().iter().all(|&v| v.abs() < 1e-12));
        assert!(third_derivative_magnitude(&Trajectory::from_series(&[0.0; 6]).unwrap()).is_err());
    }

    #[test]
    fn window_mean_examples() {
        let m = sliding_window_mean(&[0.0, 0.0, 1.0, 0.0, 0.0], 3).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(m, vec![0.0, third, third, third, 0.0]);
        let s = [0.3, -1.2, 4.0, 0.5];
        assert_eq!(sliding_window_mean(&s, 1).unwrap(), s.to_vec());
        assert!(sliding_window_mean(&s, 5).is_err());
        assert!(sliding_window_mean(&s, 0).is_err());
    }

    #[test]
    fn full_window_mean_at_center_is_global_mean() {
        // Truncated centred windows only cover the whole series at the centre.
        let s = [0.7, -0.4, 1.9, 0.2, -1.1];
        let m = sliding_window_mean(&s, 5).unwrap();
        let mean = s.iter().sum::<f64>() / 5.0;
        assert_relative_eq!(m[2], mean, epsilon = 1e-15);
    }

    #[test]
    fn arc_length_examples() {
        let seg = Trajectory::from_rows(&[[0.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        assert_eq!(arc_length(&seg), 1.0);
        let sq = Trajectory::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]], 1.0).unwrap();
        assert_eq!(arc_length(&sq), 4.0);
        let n = 1000;
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let semi = Trajectory::from_rows(&rows, 1.0).unwrap();
        assert!((arc_length(&semi) - std::f64::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn local_maxima_handles_plateaus() {
        assert_eq!(local_maxima(&[0.0, 1.0, 0.0, 2.0, 2.0, 2.0, 1.0]), vec![1, 4]);
        assert!(local_maxima(&[1.0, 1.0, 1.0]).is_empty());
        assert!(local_maxima(&[0.0, 1.0, 1.0]).is_empty());
        // rounding noise inside a plateau
        let noisy = [0.0, 5.0, 5.0 + 1e-14, 5.0 - 1e-14, 5.0 + 2e-14, 5.0, 1.0];
        assert_eq!(local_maxima(&noisy), vec![3]);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0, 5.0], 0.5), 3.0);
        assert_relative_eq!(quantile(&[0.0, 10.0], 0.95), 9.5);
    }

    fn arb_traj() -> impl Strategy<Value = Trajectory<f64>> {
        (2usize..40, 1usize..4).prop_flat_map(|(n, d)| {
            proptest::collection::vec(-100.0f64..100.0, n * d)
                .prop_map(move |v| Trajectory::from_flat(v, d, 0.05).unwrap())
        })
    }

    proptest! {
        #[test]
        fn resample_identity_and_endpoints(t in arb_traj(), n in 2usize..80) {
            prop_assert_eq!(&resample(&t, t.len()).unwrap(), &t);
            let r = resample(&t, n).unwrap();
            prop_assert_eq!(r.row(0), t.row(0));
            prop_assert_eq!(r.row(n - 1), t.row(t.len() - 1));
        }

        #[test]
        fn jerk_vanishes_for_affine_in_time(
            n in 7usize..60, a in proptest::collection::vec(-5.0f64..5.0, 3),
            b in proptest::collection::vec(prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], 3)
        ) {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..3).map(|d| a[d] + b[d] * i as f64 * 0.01).collect())
                .collect();
            let t = Trajectory::from_rows(&rows, 0.01).unwrap();
            let j = third_derivative_magnitude(&t).unwrap();
            // rounding noise scales with |a| / (|b| dt^3), hence |b| >= 0.1
            for v in &j[2..n - 2] {
                prop_assert!(*v < 1e-6, "{}", v);
            }
        }

        #[test]
        fn arc_length_rigid_invariance(t in arb_traj(), angle in 0.0f64..std::f64::consts::TAU, shift in -50.0f64..50.0) {
            prop_assume!(t.dim() == 2);
            let (s, c) = angle.sin_cos();
            let moved = t.map_rows(|src, dst| {
                dst[0] = c * src[0] - s * src[1] + shift;
                dst[1] = s * src[0] + c * src[1] - shift;
            });
            let (a, b) = (arc_length(&t), arc_length(&moved));
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
