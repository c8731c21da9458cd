//! Trajectory and demonstration containers.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::kernels::resample;
use crate::scalar::Scalar;

/// A uniformly sampled multi-dimensional signal: `len` rows of `dim` values,
/// `dt` seconds apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = f64> {
    samples: Vec<S>,
    len: usize,
    dim: usize,
    dt: S,
    dim_names: Vec<String>,
}

fn default_names(dim: usize) -> Vec<String> {
    (0..dim).map(|d| format!("x{d}")).collect()
}

impl<S: Scalar> Trajectory<S> {
    /// Builds a trajectory from row-major samples.
    pub fn new(samples: Vec<S>, dim: usize, dt: S, dim_names: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTrajectory("dimension must be at least 1".into()));
        }
        if !samples.len().is_multiple_of(dim) {
            return Err(Error::InvalidTrajectory(format!(
                "{} values do not fill rows of width {dim}",
                samples.len()
            )));
        }
        let len = samples.len() / dim;
        if len < 2 {
            return Err(Error::InvalidTrajectory(format!("need at least 2 samples, got {len}")));
        }
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(Error::InvalidTrajectory(format!("dt must be positive, got {dt}")));
        }
        if dim_names.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: dim_names.len(),
            });
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            samples,
            len,
            dim,
            dt,
            dim_names,
        })
    }

    /// Builds a trajectory with default dimension names `x0, x1, ...`.
    pub fn from_flat(samples: Vec<S>, dim: usize, dt: S) -> Result<Self> {
        Self::new(samples, dim, dt, default_names(dim))
    }

    pub fn from_rows<R: AsRef<[S]>>(rows: &[R], dt: S) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(flat, dim, dt)
    }

    /// One-dimensional trajectory with unit time step.
    pub fn from_series(values: &[S]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1, S::one())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: a trajectory holds at least two samples.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn duration(&self) -> S {
        self.dt * S::from_usize_lossy(self.len - 1)
    }

    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, S> {
        self.samples.chunks_exact(self.dim)
    }

    pub fn column(&self, d: usize) -> Vec<S> {
        self.rows().map(|r| r[d]).collect()
    }

    /// Inclusive sub-range `[start, end]` as a new trajectory.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if end >= self.len || start >= end {
            return Err(Error::param(format!(
                "slice [{start}, {end}] invalid for length {}",
                self.len
            )));
        }
        Ok(Self {
            samples: self.samples[start * self.dim..(end + 1) * self.dim].to_vec(),
            len: end - start + 1,
            dim: self.dim,
            dt: self.dt,
            dim_names: self.dim_names.clone(),
        })
    }

    /// Same metadata, new samples of identical shape.
    pub(crate) fn with_samples(&self, samples: Vec<S>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            samples,
            len: self.len,
            dim: self.dim,
            dt: self.dt,
            dim_names: self.dim_names.clone(),
        }
    }

    pub(crate) fn with_len(&self, samples: Vec<S>, dt: S) -> Self {
        Self {
            len: samples.len() / self.dim,
            samples,
            dim: self.dim,
            dt,
            dim_names: self.dim_names.clone(),
        }
    }

    pub fn map_rows(&self, mut f: impl FnMut(&[S], &mut [S])) -> Self {
        let mut out = self.samples.clone();
        for (src, dst) in self.rows().zip(out.chunks_exact_mut(self.dim)) {
            f(src, dst);
        }
        self.with_samples(out)
    }

    pub fn translated(&self, offset: &[S]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: offset.len(),
            });
        }
        Ok(self.map_rows(|src, dst| {
            for ((d, s), o) in dst.iter_mut().zip(src).zip(offset) {
                *d = *s + *o;
            }
        }))
    }

    pub fn scaled(&self, factor: S) -> Self {
        self.map_rows(|src, dst| {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = *s * factor;
            }
        })
    }

    /// Lossless for f32 -> f64, rounding for f64 -> f32.
    pub fn cast<T: Scalar>(&self) -> Trajectory<T> {
        Trajectory {
            samples: self.samples.iter().map(|v| T::lit(v.as_f64())).collect(),
            len: self.len,
            dim: self.dim,
            dt: T::lit(self.dt.as_f64()),
            dim_names: self.dim_names.clone(),
        }
    }
}

/// A time-aligned bundle of named streams sharing one sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration<S = f64> {
    id: String,
    streams: IndexMap<String, Trajectory<S>>,
}

impl<S: Scalar> Demonstration<S> {
    /// Builds a demonstration, resampling every stream to the longest one.
    pub fn new(id: impl Into<String>, streams: impl IntoIterator<Item = (String, Trajectory<S>)>) -> Result<Self> {
        let mut map = IndexMap::new();
        for (name, traj) in streams {
            if map.insert(name.clone(), traj).is_some() {
                return Err(Error::param(format!("duplicate stream name `{name}`")));
            }
        }
        if map.is_empty() {
            return Err(Error::param("demonstration needs at least one stream"));
        }
        let longest = map.values().map(Trajectory::len).max().unwrap_or(0);
        for traj in map.values_mut() {
            if traj.len() != longest {
                *traj = resample(traj, longest)?;
            }
        }
        Ok(Self {
            id: id.into(),
            streams: map,
        })
    }

    pub fn single(id: impl Into<String>, name: impl Into<String>, traj: Trajectory<S>) -> Self {
        let mut streams = IndexMap::new();
        streams.insert(name.into(), traj);
        Self { id: id.into(), streams }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    /// Shared sample count.
    pub fn len(&self) -> usize {
        self.streams[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn streams(&self) -> &IndexMap<String, Trajectory<S>> {
        &self.streams
    }

    pub fn stream(&self, name: &str) -> Option<&Trajectory<S>> {
        self.streams.get(name)
    }

    pub fn stream_names(&self) -> impl Iterator<Item = &str> {
        self.streams.keys().map(String::as_str)
    }

    /// Inclusive sub-range of every stream.
    pub fn slice(&self, id: impl Into<String>, start: usize, end: usize) -> Result<Self> {
        let streams = self
            .streams
            .iter()
            .map(|(k, t)| Ok((k.clone(), t.slice(start, end)?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        Ok(Self { id: id.into(), streams })
    }
}
