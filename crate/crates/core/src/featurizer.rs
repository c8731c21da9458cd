//! Fixed-length features for primitives: canonicalized DTW distance to each
//! class representative.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::dtw_distance;
use crate::elastic_cluster::FeatureSet;
use crate::error::{Error, Result};
use crate::kernels::{arc_length, resample};
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

pub const DEFAULT_RESAMPLE_LEN: usize = 100;

/// Resampled to `len`, shifted so the first sample is the origin and scaled
/// to unit arc length. The flag is set when the arc length is zero and no
/// scaling was applied.
pub fn canonicalize<S: Scalar>(traj: &Trajectory<S>, len: usize) -> Result<(Trajectory<S>, bool)> {
    let r = resample(traj, len)?;
    let origin: Vec<S> = r.row(0).iter().map(|v| -*v).collect();
    let shifted = r.translated(&origin)?;
    let length = arc_length(&shifted);
    if length > S::zero() {
        Ok((shifted.scaled(S::one() / length), false))
    } else {
        Ok((shifted, true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeInfo {
    pub name: String,
    /// Id of the primitive the representative came from, when known.
    pub source_id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RepresentativeSet<S = f64> {
    info: Vec<RepresentativeInfo>,
    canonical: Vec<Trajectory<S>>,
    resample_len: usize,
}

impl<S: Scalar> RepresentativeSet<S> {
    pub fn new(reps: Vec<(String, Trajectory<S>)>, resample_len: usize) -> Result<Self> {
        let with_info = reps
            .into_iter()
            .map(|(name, t)| (RepresentativeInfo { name, source_id: None }, t))
            .collect();
        Self::with_info(with_info, resample_len)
    }

    pub fn with_info(reps: Vec<(RepresentativeInfo, Trajectory<S>)>, resample_len: usize) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::param("at least one representative is required"));
        }
        if resample_len < 2 {
            return Err(Error::param("resample length must be at least 2"));
        }
        let dim = reps[0].1.dim();
        let mut names = std::collections::HashSet::new();
        let mut info = Vec::with_capacity(reps.len());
        let mut canonical = Vec::with_capacity(reps.len());
        for (i, t) in reps {
            if !names.insert(i.name.clone()) {
                return Err(Error::param(format!("duplicate representative `{}`", i.name)));
            }
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
            canonical.push(canonicalize(&t, resample_len)?.0);
            info.push(i);
        }
        Ok(Self {
            info,
            canonical,
            resample_len,
        })
    }

    /// One medoid per label, labels in sorted order.
    pub fn from_labeled<'a>(
        items: impl IntoIterator<Item = (&'a str, &'a Trajectory<S>, &'a str)>,
        resample_len: usize,
    ) -> Result<Self> {
        let mut by_label: BTreeMap<&str, Vec<(&str, &Trajectory<S>)>> = BTreeMap::new();
        for (id, t, label) in items {
            by_label.entry(label).or_default().push((id, t));
        }
        let mut reps = Vec::with_capacity(by_label.len());
        for (label, members) in by_label {
            let trajs: Vec<Trajectory<S>> = members.iter().map(|(_, t)| (*t).clone()).collect();
            let m = pick_medoid(&trajs, resample_len)?;
            reps.push((
                RepresentativeInfo {
                    name: label.to_owned(),
                    source_id: Some(members[m].0.to_owned()),
                },
                trajs[m].clone(),
            ));
        }
        Self::with_info(reps, resample_len)
    }

    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn is_empty(&self) -> bool {
        self.info.is_empty()
    }

    pub fn info(&self) -> &[RepresentativeInfo] {
        &self.info
    }

    pub fn resample_len(&self) -> usize {
        self.resample_len
    }

    pub fn dim(&self) -> usize {
        self.canonical[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<S = f64> {
    pub values: Vec<S>,
    /// The primitive had zero arc length and was not scale-normalized.
    pub degenerate: bool,
}

pub fn featurize<S: Scalar>(prim: &Trajectory<S>, reps: &RepresentativeSet<S>) -> Result<FeatureVector<S>> {
    if prim.dim() != reps.dim() {
        return Err(Error::DimensionMismatch {
            expected: reps.dim(),
            found: prim.dim(),
        });
    }
    let (canon, degenerate) = canonicalize(prim, reps.resample_len)?;
    let values = reps
        .canonical
        .iter()
        .map(|r| dtw_distance(&canon, r))
        .collect::<Result<Vec<S>>>()?;
    Ok(FeatureVector { values, degenerate })
}

/// Featurizes many primitives in parallel. Returns the feature set and the
/// ids of degenerate primitives.
pub fn featurize_all<S: Scalar>(
    prims: &[(String, Trajectory<S>)],
    reps: &RepresentativeSet<S>,
) -> Result<(FeatureSet<S>, Vec<String>)> {
    let vectors: Vec<FeatureVector<S>> = prims
        .par_iter()
        .map(|(_, t)| featurize(t, reps))
        .collect::<Result<_>>()?;
    let degenerate = prims
        .iter()
        .zip(&vectors)
        .filter(|(_, v)| v.degenerate)
        .map(|((id, _), _)| id.clone())
        .collect();
    let data = vectors.into_iter().flat_map(|v| v.values).collect();
    let ids = prims.iter().map(|(id, _)| id.clone()).collect();
    Ok((FeatureSet::new(data, reps.len(), ids)?, degenerate))
}

/// Index minimizing the summed canonical DTW distance to all others
/// (lowest index on ties).
pub fn pick_medoid<S: Scalar>(trajs: &[Trajectory<S>], resample_len: usize) -> Result<usize> {
    if trajs.is_empty() {
        return Err(Error::param("medoid of an empty set"));
    }
    let dim = trajs[0].dim();
    if let Some(t) = trajs.iter().find(|t| t.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: t.dim(),
        });
    }
    let canon: Vec<Trajectory<S>> = trajs
        .iter()
        .map(|t| canonicalize(t, resample_len).map(|c| c.0))
        .collect::<Result<_>>()?;
    let n = canon.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let dists: Vec<S> = pairs
        .par_iter()
        .map(|&(i, j)| dtw_distance(&canon[i], &canon[j]))
        .collect::<Result<_>>()?;
    let mut sums = vec![S::zero(); n];
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        sums[i] += d;
        sums[j] += d;
    }
    let mut best = 0;
    for i in 1..n {
        if sums[i] < sums[best] {
            best = i;
        }
    }
    Ok(best)
}
