//! Dynamic time warping with a Euclidean local cost.

use crate::error::{Error, Result};
use crate::scalar::{dist, Scalar};
use crate::trajectory::Trajectory;

/// Classic DTW cost: both endpoints matched, steps (1,0), (0,1), (1,1), each
/// visited cell contributing its local distance once.
pub fn dtw_distance<S: Scalar>(a: &Trajectory<S>, b: &Trajectory<S>) -> Result<S> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let m = b.len();
    let inf = S::infinity();
    // Two rolling rows of the accumulated cost table.
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, ra) in a.rows().enumerate() {
        for (j, rb) in b.rows().enumerate() {
            let cost = dist(ra, rb);
            let best = if i == 0 && j == 0 {
                S::zero()
            } else {
                let up = prev[j];
                let left = if j > 0 { cur[j - 1] } else { inf };
                let diag = if j > 0 { prev[j - 1] } else { inf };
                up.min(left).min(diag)
            };
            cur[j] = best + cost;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> Trajectory<f64> {
        Trajectory::from_series(v).unwrap()
    }

    /// Exhaustive minimum over all monotone warping paths.
    fn brute(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
        let c = (a[i] - b[j]).abs();
        if i == 0 && j == 0 {
            return c;
        }
        let mut best = f64::INFINITY;
        if i > 0 {
            best = best.min(brute(a, b, i - 1, j));
        }
        if j > 0 {
            best = best.min(brute(a, b, i, j - 1));
        }
        if i > 0 && j > 0 {
            best = best.min(brute(a, b, i - 1, j - 1));
        }
        c + best
    }

    #[test]
    fn examples() {
        let a = series(&[0.0, 1.0, 2.0]);
        assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(dtw_distance(&a, &series(&[0.0, 0.0, 1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(dtw_distance(&series(&[0.0, 0.0]), &series(&[1.0, 1.0])).unwrap(), 2.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = series(&[0.0, 1.0]);
        let b = Trajectory::from_rows(&[[0.0, 0.0], [1.0, 1.0]], 1.0).unwrap();
        assert!(matches!(dtw_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn matches_exhaustive_and_is_symmetric(
            a in proptest::collection::vec(-3.0f64..3.0, 2..7),
            b in proptest::collection::vec(-3.0f64..3.0, 2..7),
        ) {
            let (ta, tb) = (series(&a), series(&b));
            let d = dtw_distance(&ta, &tb).unwrap();
            let oracle = brute(&a, &b, a.len() - 1, b.len() - 1);
            prop_assert!((d - oracle).abs() < 1e-12);
            prop_assert!(d >= 0.0);
            prop_assert!((d - dtw_distance(&tb, &ta).unwrap()).abs() < 1e-12);
        }
    }
}
