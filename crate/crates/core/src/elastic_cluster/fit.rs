use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{approx_energy_raw, build_energy_system, e_step, m_step, stretch_energy_raw};
use super::{ElasticClusterModel, FeatureSet};
use crate::error::{Error, Result};
use crate::scalar::{sq_dist, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence when the largest node move is below `tol * (1 + data scale)`.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

/// Energy compared across node counts when searching for `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopEnergy {
    /// `U_X + U_E` as optimized.
    Total,
    /// `U_X - U_E`: stretching counted as a cost of spreading nodes out.
    #[default]
    Penalized,
}

impl StopEnergy {
    pub fn of<S: Scalar>(self, model: &ElasticClusterModel<S>) -> S {
        match self {
            StopEnergy::Total => model.total_energy,
            StopEnergy::Penalized => model.penalized_energy(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoOptions {
    pub restarts: usize,
    pub fit: FitOptions,
    pub stop: StopEnergy,
    /// Upper bound on `N` (defaults to `M`).
    pub max_n: Option<usize>,
}

impl Default for AutoOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            fit: FitOptions::default(),
            stop: StopEnergy::default(),
            max_n: None,
        }
    }
}

/// Per-`N` summary of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct NTrace<S = f64> {
    pub n: usize,
    /// Lowest total energy over feasible restarts, `None` if all failed.
    pub best_energy: Option<S>,
    /// The energy used by the stopping rule for that best restart.
    pub stop_energy: Option<S>,
    pub feasible_restarts: usize,
}

#[derive(Debug, Clone)]
pub struct AutoFit<S = f64> {
    pub model: ElasticClusterModel<S>,
    pub trace: Vec<NTrace<S>>,
}

/// Seed for restart `r` at node count `n`, derived from the master seed.
pub fn restart_seed(master: u64, n: usize, r: usize) -> u64 {
    // splitmix64 finalizer over a counter mixed into the master seed
    let mut z = master
        .wrapping_add(((n as u64) << 32 | r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` distinct data rows, drawn without replacement in seeded order.
pub fn initial_nodes<S: Scalar>(data: &FeatureSet<S>, n: usize, seed: u64) -> Result<Vec<S>> {
    if n == 0 || n > data.len() {
        return Err(Error::param(format!("node count {n} must lie in 1..={}", data.len())));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut picked: Vec<usize> = Vec::with_capacity(n);
    for j in order {
        if picked.iter().all(|&p| data.row(p) != data.row(j)) {
            picked.push(j);
            if picked.len() == n {
                break;
            }
        }
    }
    if picked.len() < n {
        return Err(Error::TooFewDistinctRows {
            requested: n,
            available: picked.len(),
        });
    }
    Ok(picked.iter().flat_map(|&j| data.row(j).to_vec()).collect())
}

pub fn fit_fixed_n<S: Scalar>(
    data: &FeatureSet<S>,
    n: usize,
    lambda: S,
    seed: u64,
    opts: FitOptions,
) -> Result<ElasticClusterModel<S>> {
    let init = initial_nodes(data, n, seed)?;
    fit_from_init(data, init, lambda, opts)
}

/// EM from explicit initial nodes (`n × dim`, row-major).
pub fn fit_from_init<S: Scalar>(
    data: &FeatureSet<S>,
    init: Vec<S>,
    lambda: S,
    opts: FitOptions,
) -> Result<ElasticClusterModel<S>> {
    let dim = data.dim();
    if init.is_empty() || !init.len().is_multiple_of(dim) {
        return Err(Error::param("initial nodes must be a non-empty n × dim matrix"));
    }
    let n = init.len() / dim;
    if n > data.len() {
        return Err(Error::param(format!(
            "{n} nodes requested for {} data rows",
            data.len()
        )));
    }
    if !(lambda >= S::zero()) {
        return Err(Error::param("lambda must be non-negative"));
    }
    let tol = S::lit(opts.tol) * (S::one() + data.scale());

    let mut nodes = init;
    let mut previous: Option<Vec<usize>> = None;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let mut assignment = e_step(data, &nodes);
        let repaired = repair_empty_clusters(data, &mut nodes, &mut assignment)?;
        if !repaired && previous.as_ref() == Some(&assignment) {
            converged = true;
            break;
        }
        let sys = build_energy_system(data, &assignment, n, lambda)?;
        let next = m_step(&sys)?;
        let shift = nodes
            .iter()
            .zip(&next)
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        nodes = next;
        if shift <= tol && e_step(data, &nodes) == assignment {
            converged = true;
            break;
        }
        previous = Some(assignment);
    }

    let assignment = e_step(data, &nodes);
    let approx_energy = approx_energy_raw(data, &nodes, &assignment);
    let stretch_energy = stretch_energy_raw(&nodes, dim, lambda);
    Ok(ElasticClusterModel {
        nodes,
        dim,
        assignment,
        lambda,
        approx_energy,
        stretch_energy,
        total_energy: approx_energy + stretch_energy,
        converged,
        iterations,
    })
}

/// Moves the node of each empty cluster onto the datum farthest from its own
/// node (taken from a cluster with at least two members) and reassigns.
fn repair_empty_clusters<S: Scalar>(
    data: &FeatureSet<S>,
    nodes: &mut [S],
    assignment: &mut Vec<usize>,
) -> Result<bool> {
    let dim = data.dim();
    let n = nodes.len() / dim;
    let mut repaired = false;
    for _ in 0..=n {
        let mut sizes = vec![0usize; n];
        assignment.iter().for_each(|&a| sizes[a] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return Ok(repaired);
        };
        let mut far: Option<(usize, S)> = None;
        for (j, row) in data.rows().enumerate() {
            let a = assignment[j];
            if sizes[a] < 2 {
                continue;
            }
            let d = sq_dist(row, &nodes[a * dim..(a + 1) * dim]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((j, d));
            }
        }
        let Some((j, _)) = far else {
            return Err(Error::EmptyCluster { cluster: empty });
        };
        nodes[empty * dim..(empty + 1) * dim].copy_from_slice(data.row(j));
        *assignment = e_step(data, nodes);
        repaired = true;
    }
    let mut sizes = vec![0usize; n];
    assignment.iter().for_each(|&a| sizes[a] += 1);
    match sizes.iter().position(|&s| s == 0) {
        Some(cluster) => Err(Error::EmptyCluster { cluster }),
        None => Ok(repaired),
    }
}

fn is_discardable(e: &Error) -> bool {
    matches!(
        e,
        Error::InfeasibleStretching { .. } | Error::EmptyCluster { .. } | Error::TooFewDistinctRows { .. }
    )
}

/// Grows `N` from 1 while the best-of-restarts stopping energy keeps falling.
pub fn fit_auto<S: Scalar>(data: &FeatureSet<S>, lambda: S, seed: u64, opts: AutoOptions) -> Result<AutoFit<S>> {
    if opts.restarts == 0 {
        return Err(Error::param("restarts must be positive"));
    }
    let max_n = opts.max_n.unwrap_or(data.len()).min(data.len()).max(1);
    let mut trace = Vec::new();
    let mut best_so_far: Option<(ElasticClusterModel<S>, S)> = None;

    for n in 1..=max_n {
        let runs: Vec<Result<ElasticClusterModel<S>>> = (0..opts.restarts)
            .into_par_iter()
            .map(|r| fit_fixed_n(data, n, lambda, restart_seed(seed, n, r), opts.fit))
            .collect();
        let mut best: Option<ElasticClusterModel<S>> = None;
        let mut feasible = 0;
        for run in runs {
            match run {
                Ok(m) => {
                    feasible += 1;
                    if best.as_ref().is_none_or(|b| m.total_energy < b.total_energy) {
                        best = Some(m);
                    }
                }
                Err(e) if is_discardable(&e) => {}
                Err(e) => return Err(e),
            }
        }
        let Some(best) = best else {
            trace.push(NTrace {
                n,
                best_energy: None,
                stop_energy: None,
                feasible_restarts: 0,
            });
            break;
        };
        let score = opts.stop.of(&best);
        trace.push(NTrace {
            n,
            best_energy: Some(best.total_energy),
            stop_energy: Some(score),
            feasible_restarts: feasible,
        });
        if let Some((_, prev)) = &best_so_far {
            if score >= *prev {
                break;
            }
        }
        best_so_far = Some((best, score));
    }

    let (model, _) = best_so_far.ok_or(Error::InfeasibleStretching {
        smallest_eigenvalue: f64::NAN,
    })?;
    Ok(AutoFit { model, trace })
}
