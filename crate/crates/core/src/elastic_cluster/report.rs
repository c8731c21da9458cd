use serde::{Deserialize, Serialize};

use super::{AutoFit, ElasticClusterModel, FeatureSet, NTrace, StopEnergy};
use crate::scalar::Scalar;

/// `clusters.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub seed: u64,
    pub lambda: f64,
    pub n_clusters: usize,
    pub energies: EnergyReport,
    pub nodes: Vec<Vec<f64>>,
    pub assignments: Vec<ClusterAssignment>,
    pub per_n_energy_trace: Vec<TraceEntry>,
    #[serde(default)]
    pub stop_energy: StopEnergy,
    #[serde(default)]
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "U_X")]
    pub approx: f64,
    #[serde(rename = "U_E")]
    pub stretch: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub id: String,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: usize,
    pub best_energy: Option<f64>,
    #[serde(default)]
    pub stop_energy: Option<f64>,
    #[serde(default)]
    pub feasible_restarts: usize,
}

impl<S: Scalar> From<&NTrace<S>> for TraceEntry {
    fn from(t: &NTrace<S>) -> Self {
        Self {
            n: t.n,
            best_energy: t.best_energy.map(Scalar::as_f64),
            stop_energy: t.stop_energy.map(Scalar::as_f64),
            feasible_restarts: t.feasible_restarts,
        }
    }
}

impl ClusterReport {
    pub fn from_model<S: Scalar>(
        data: &FeatureSet<S>,
        model: &ElasticClusterModel<S>,
        trace: &[NTrace<S>],
        stop_energy: StopEnergy,
        seed: u64,
    ) -> Self {
        Self {
            seed,
            lambda: model.lambda.as_f64(),
            n_clusters: model.n_clusters(),
            // `+ 0.0` turns a negative zero into zero
            energies: EnergyReport {
                approx: model.approx_energy.as_f64() + 0.0,
                stretch: model.stretch_energy.as_f64() + 0.0,
                total: model.total_energy.as_f64() + 0.0,
            },
            nodes: (0..model.n_clusters())
                .map(|i| model.node(i).iter().map(|v| v.as_f64()).collect())
                .collect(),
            assignments: data
                .ids()
                .iter()
                .zip(&model.assignment)
                .map(|(id, &cluster)| ClusterAssignment {
                    id: id.clone(),
                    cluster,
                })
                .collect(),
            per_n_energy_trace: trace.iter().map(TraceEntry::from).collect(),
            stop_energy,
            converged: model.converged,
        }
    }

    pub fn from_auto<S: Scalar>(data: &FeatureSet<S>, fit: &AutoFit<S>, stop: StopEnergy, seed: u64) -> Self {
        Self::from_model(data, &fit.model, &fit.trace, stop, seed)
    }
}
