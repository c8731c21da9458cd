//! Elastic clustering: k-means-like EM where cluster centres are elastic-map
//! nodes pushed apart by a stretching energy, plus an outer search that grows
//! the number of nodes until the energy stops improving.

mod energy;
mod fit;
pub mod lloyd;
mod report;

pub use energy::{approximation_energy, build_energy_system, e_step, m_step, stretching_energy, EnergySystem};
pub use fit::{
    fit_auto, fit_fixed_n, fit_from_init, initial_nodes, restart_seed, AutoFit, AutoOptions, FitOptions, NTrace,
    StopEnergy,
};
pub use report::{ClusterAssignment, ClusterReport, EnergyReport, TraceEntry};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `M` feature vectors of width `F`, each with an id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<S = f64> {
    data: Vec<S>,
    dim: usize,
    ids: Vec<String>,
}

impl<S: Scalar> FeatureSet<S> {
    pub fn new(data: Vec<S>, dim: usize, ids: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("feature width must be at least 1"));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::param(format!(
                "{} values do not form rows of width {dim}",
                data.len()
            )));
        }
        let m = data.len() / dim;
        if ids.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: ids.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::DuplicateId(dup.clone()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { data, dim, ids })
    }

    /// Rows with generated ids `0, 1, ...`.
    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.as_ref().len(),
                });
            }
            data.extend_from_slice(r.as_ref());
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(data, dim, ids)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[S] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, S> {
        self.data.chunks_exact(self.dim)
    }

    pub fn translated(&self, offset: &[S]) -> Self {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dim) {
            for (v, o) in row.iter_mut().zip(offset) {
                *v += *o;
            }
        }
        Self {
            data,
            dim: self.dim,
            ids: self.ids.clone(),
        }
    }

    pub fn mean(&self) -> Vec<S> {
        let mut mean = vec![S::zero(); self.dim];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += *v;
            }
        }
        let m = S::from_usize_lossy(self.len());
        mean.iter_mut().for_each(|v| *v /= m);
        mean
    }

    /// Total variance: sum over dimensions of the per-dimension variance.
    pub fn total_variance(&self) -> S {
        let mean = self.mean();
        let ss: S = self.rows().map(|r| crate::scalar::sq_dist(r, &mean)).sum();
        ss / S::from_usize_lossy(self.len())
    }

    /// Largest absolute coordinate, used to scale convergence tolerances.
    pub fn scale(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }
}

/// Fitted node positions, assignments and energies.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticClusterModel<S = f64> {
    /// `n_nodes × dim`, row-major.
    pub nodes: Vec<S>,
    pub dim: usize,
    pub assignment: Vec<usize>,
    pub lambda: S,
    pub approx_energy: S,
    pub stretch_energy: S,
    pub total_energy: S,
    pub converged: bool,
    pub iterations: usize,
}

impl<S: Scalar> ElasticClusterModel<S> {
    pub fn n_clusters(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn node(&self, i: usize) -> &[S] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    /// `U_X + |U_E|`: approximation energy with stretching counted as a cost.
    pub fn penalized_energy(&self) -> S {
        self.approx_energy - self.stretch_energy
    }
}

/// Largest stretching constant that keeps the energy matrix comfortably
/// positive definite for the given cluster sizes: `min |cluster| / N`.
pub fn lambda_guidance(cluster_sizes: &[usize]) -> f64 {
    let n = cluster_sizes.len().max(1);
    cluster_sizes.iter().copied().min().unwrap_or(0) as f64 / n as f64
}

/// `lambda * total_variance / M`, for scale-free stretching.
pub fn scaled_lambda<S: Scalar>(lambda: S, data: &FeatureSet<S>) -> S {
    lambda * data.total_variance() / S::from_usize_lossy(data.len())
}
