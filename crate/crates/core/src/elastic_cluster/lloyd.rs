//! Plain Lloyd's k-means, kept separate from the energy-system path so the
//! zero-stretching case can be cross-checked against it.

use super::FeatureSet;
use crate::scalar::{sq_dist, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LloydResult<S = f64> {
    pub centers: Vec<S>,
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

fn nearest<S: Scalar>(row: &[S], centers: &[S], dim: usize) -> usize {
    let mut best = 0;
    let mut best_d = S::infinity();
    for (i, c) in centers.chunks_exact(dim).enumerate() {
        let d = sq_dist(row, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Runs Lloyd iterations from `init` until assignments stop changing.
/// Empty clusters take the point farthest from its centre (lowest index on ties).
pub fn lloyd<S: Scalar>(data: &FeatureSet<S>, init: &[S], max_iter: usize) -> LloydResult<S> {
    let dim = data.dim();
    let k = init.len() / dim;
    let mut centers = init.to_vec();
    let assign_all = |c: &[S]| -> Vec<usize> { data.rows().map(|r| nearest(r, c, dim)).collect() };
    let mut assignment = assign_all(&centers);
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        // fix empties
        for _ in 0..=k {
            let mut counts = vec![0usize; k];
            for &a in &assignment {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let mut far = None;
            let mut far_d = S::neg_infinity();
            for (j, row) in data.rows().enumerate() {
                let a = assignment[j];
                if counts[a] < 2 {
                    continue;
                }
                let d = sq_dist(row, &centers[a * dim..(a + 1) * dim]);
                if d > far_d {
                    far_d = d;
                    far = Some(j);
                }
            }
            let Some(j) = far else { break };
            centers[empty * dim..(empty + 1) * dim].copy_from_slice(data.row(j));
            assignment = assign_all(&centers);
        }
        let mut sums = vec![S::zero(); k * dim];
        let mut counts = vec![0usize; k];
        for (row, &a) in data.rows().zip(&assignment) {
            counts[a] += 1;
            for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(row) {
                *s += *v;
            }
        }
        for i in 0..k {
            if counts[i] > 0 {
                let c = S::from_usize_lossy(counts[i]);
                for d in 0..dim {
                    centers[i * dim + d] = sums[i * dim + d] / c;
                }
            }
        }
        let next = assign_all(&centers);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    LloydResult {
        centers,
        assignment,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_groups() {
        let rows = [[0.0], [1.0], [8.0], [9.0]];
        let d = FeatureSet::from_rows(&rows).unwrap();
        let r = lloyd(&d, &[0.0, 1.0], 100);
        assert_eq!(r.centers, vec![0.5, 8.5]);
        assert_eq!(r.assignment, vec![0, 0, 1, 1]);
    }
}
