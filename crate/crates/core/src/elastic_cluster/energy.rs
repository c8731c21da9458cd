use super::{ElasticClusterModel, FeatureSet};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky};
use crate::scalar::{sq_dist, Scalar};

/// Normal equations `A x = C` of the M-step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySystem<S = f64> {
    /// `n × n`, symmetric.
    pub a: Vec<S>,
    /// `n × dim` cluster sums.
    pub c: Vec<S>,
    pub n: usize,
    pub dim: usize,
}

impl<S: Scalar> EnergySystem<S> {
    pub fn is_positive_definite(&self) -> bool {
        Cholesky::factor(&self.a, self.n).is_ok()
    }

    pub fn smallest_eigenvalue(&self) -> S {
        symmetric_eigenvalues(&self.a, self.n)[0]
    }
}

/// `U_X`: squared distances from every datum to its node.
pub fn approximation_energy<S: Scalar>(data: &FeatureSet<S>, model: &ElasticClusterModel<S>) -> S {
    approx_energy_raw(data, &model.nodes, &model.assignment)
}

pub(crate) fn approx_energy_raw<S: Scalar>(data: &FeatureSet<S>, nodes: &[S], assignment: &[usize]) -> S {
    let dim = data.dim();
    data.rows()
        .zip(assignment)
        .map(|(row, &a)| sq_dist(row, &nodes[a * dim..(a + 1) * dim]))
        .sum()
}

/// `U_E = -lambda * sum_{i <= j} |x_i - x_j|^2`.
pub fn stretching_energy<S: Scalar>(model: &ElasticClusterModel<S>) -> S {
    stretch_energy_raw(&model.nodes, model.dim, model.lambda)
}

pub(crate) fn stretch_energy_raw<S: Scalar>(nodes: &[S], dim: usize, lambda: S) -> S {
    let n = nodes.len() / dim;
    let mut sum = S::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            sum += sq_dist(&nodes[i * dim..(i + 1) * dim], &nodes[j * dim..(j + 1) * dim]);
        }
    }
    -lambda * sum
}

/// Builds `A = diag(|k_i| - (n-1) lambda) + lambda (ones - I)` and `C_i = sum of cluster i`.
pub fn build_energy_system<S: Scalar>(
    data: &FeatureSet<S>,
    assignment: &[usize],
    n: usize,
    lambda: S,
) -> Result<EnergySystem<S>> {
    if assignment.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: assignment.len(),
        });
    }
    if let Some(&bad) = assignment.iter().find(|&&a| a >= n) {
        return Err(Error::param(format!("assignment {bad} out of range for {n} clusters")));
    }
    let dim = data.dim();
    let mut a = vec![lambda; n * n];
    let off = S::from_usize_lossy(n - 1) * lambda;
    for i in 0..n {
        a[i * n + i] = -off;
    }
    let mut c = vec![S::zero(); n * dim];
    for (row, &k) in data.rows().zip(assignment) {
        a[k * n + k] += S::one();
        for (acc, v) in c[k * dim..(k + 1) * dim].iter_mut().zip(row) {
            *acc += *v;
        }
    }
    Ok(EnergySystem { a, c, n, dim })
}

/// Solves `A x = C` by Cholesky; a failed factorization means the stretching
/// constant is too large for the current cluster occupancy.
pub fn m_step<S: Scalar>(sys: &EnergySystem<S>) -> Result<Vec<S>> {
    let chol = Cholesky::factor(&sys.a, sys.n).map_err(|_| Error::InfeasibleStretching {
        smallest_eigenvalue: sys.smallest_eigenvalue().as_f64(),
    })?;
    let mut x = sys.c.clone();
    chol.solve_in_place(&mut x, sys.dim);
    Ok(x)
}

/// Nearest-node assignment; ties go to the lowest node index.
pub fn e_step<S: Scalar>(data: &FeatureSet<S>, nodes: &[S]) -> Vec<usize> {
    let dim = data.dim();
    data.rows()
        .map(|row| {
            let mut best = 0;
            let mut best_d = S::infinity();
            for (i, node) in nodes.chunks_exact(dim).enumerate() {
                let d = sq_dist(row, node);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}
