//! Multimodal segmentation of demonstrations into motion primitives.
//!
//! Each stream is segmented on its own from a windowed jerk statistic. The
//! resulting changepoints are turned into Gaussians, multiplied across
//! streams into one keypoint density, and keypoints are read off that
//! density either deterministically (peaks) or by seeded sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    greedy_spaced, local_maxima, quantile, sliding_window_mean, third_derivative_magnitude, MIN_JERK_SAMPLES,
};
use crate::scalar::Scalar;
use crate::trajectory::{Demonstration, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    #[default]
    Deterministic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    /// Sliding window width in samples.
    pub window: usize,
    /// Minimum segment length in samples.
    pub min_segment: usize,
    /// Threshold on the windowed, normalized jerk.
    pub threshold: f64,
    /// Per-stream density floor; `None` means `1 / T`.
    pub density_floor: Option<f64>,
    pub mode: ExtractionMode,
    pub sample_count: usize,
    /// Fused-density quantile a peak must exceed in deterministic mode.
    pub peak_quantile: f64,
    /// Fraction of samples a cluster needs in sampled mode.
    pub min_cluster_mass: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            window: 16,
            min_segment: 64,
            threshold: 0.16,
            density_floor: None,
            mode: ExtractionMode::Deterministic,
            sample_count: 2000,
            peak_quantile: 0.95,
            min_cluster_mass: 0.05,
        }
    }
}

impl SegmentationParams {
    pub fn new(window: usize, min_segment: usize, threshold: f64) -> Result<Self> {
        let p = Self {
            window,
            min_segment,
            threshold,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::param("window must be positive"));
        }
        if self.min_segment < self.window {
            return Err(Error::param(format!(
                "min segment ({}) must be at least the window ({})",
                self.min_segment, self.window
            )));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::param("threshold must be positive"));
        }
        if let Some(eps) = self.density_floor {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::param("density floor must be positive"));
            }
        }
        if self.sample_count == 0 {
            return Err(Error::param("sample count must be positive"));
        }
        if !(0.0..1.0).contains(&self.peak_quantile) {
            return Err(Error::param("peak quantile must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.min_cluster_mass) {
            return Err(Error::param("cluster mass fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Keypoint standard deviation in samples: half the window.
    pub fn sigma(&self) -> f64 {
        self.window as f64 / 2.0
    }

    fn floor_for(&self, len: usize) -> f64 {
        self.density_floor.unwrap_or(1.0 / len as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangepointSet {
    pub stream_name: String,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian<S = f64> {
    pub mean: S,
    pub std: S,
}

impl<S: Scalar> Gaussian<S> {
    pub fn pdf(&self, x: S) -> S {
        let z = (x - self.mean) / self.std;
        (-z * z / S::lit(2.0)).exp() / (self.std * (S::lit(2.0) * S::PI()).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticKeypoints<S = f64> {
    pub stream_name: String,
    pub gaussians: Vec<Gaussian<S>>,
}

/// Normalized, strictly positive keypoint density over sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedKeypointDensity<S = f64> {
    pub values: Vec<S>,
}

impl<S: Scalar> FusedKeypointDensity<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct KeypointSet {
    pub indices: Vec<usize>,
    /// Streams with a changepoint within one window of each keypoint.
    pub provenance: Vec<Vec<String>>,
}

/// Windowed jerk statistic that changepoint detection thresholds.
pub fn windowed_jerk<S: Scalar>(stream: &Trajectory<S>, window: usize) -> Result<Vec<S>> {
    let jerk = third_derivative_magnitude(stream)?;
    sliding_window_mean(&jerk, window.min(jerk.len()))
}

/// Changepoints of a single stream.
pub fn detect_changepoints<S: Scalar>(
    name: &str,
    stream: &Trajectory<S>,
    p: &SegmentationParams,
) -> Result<ChangepointSet> {
    p.validate()?;
    let len = stream.len();
    let mut indices = Vec::new();
    if len >= 2 * p.min_segment && len >= MIN_JERK_SAMPLES {
        let j = windowed_jerk(stream, p.window)?;
        let theta = S::lit(p.threshold);
        let candidates: Vec<usize> = local_maxima(&j).into_iter().filter(|&i| j[i] > theta).collect();
        indices = greedy_spaced(&candidates, |i| j[i], len, p.min_segment);
    }
    Ok(ChangepointSet {
        stream_name: name.to_owned(),
        indices,
    })
}

pub fn to_probabilistic<S: Scalar>(k: &ChangepointSet, p: &SegmentationParams) -> ProbabilisticKeypoints<S> {
    let std = S::lit(p.sigma());
    ProbabilisticKeypoints {
        stream_name: k.stream_name.clone(),
        gaussians: k
            .indices
            .iter()
            .map(|&i| Gaussian {
                mean: S::from_usize_lossy(i),
                std,
            })
            .collect(),
    }
}

/// Product over streams of `floor + sum of keypoint pdfs`, normalized to sum 1.
pub fn fuse<S: Scalar>(
    streams: &[ProbabilisticKeypoints<S>],
    len: usize,
    p: &SegmentationParams,
) -> Result<FusedKeypointDensity<S>> {
    if streams.is_empty() {
        return Err(Error::param("fusion needs at least one stream"));
    }
    if len == 0 {
        return Err(Error::param("fusion needs a positive length"));
    }
    let floor = S::lit(p.floor_for(len));
    // Accumulate in log space; the product of many small densities underflows in f32.
    let mut log_density = vec![S::zero(); len];
    for s in streams {
        for (t, acc) in log_density.iter_mut().enumerate() {
            let x = S::from_usize_lossy(t);
            let v: S = floor + s.gaussians.iter().map(|g| g.pdf(x)).sum::<S>();
            *acc += v.ln();
        }
    }
    let max = log_density.iter().copied().fold(S::neg_infinity(), S::max);
    let mut values: Vec<S> = log_density.iter().map(|&l| (l - max).exp()).collect();
    let total: S = values.iter().copied().sum();
    for v in &mut values {
        *v /= total;
    }
    Ok(FusedKeypointDensity { values })
}

/// Reads keypoints off the fused density. `seed` is only used in sampled mode.
pub fn extract_keypoints<S: Scalar>(
    density: &FusedKeypointDensity<S>,
    p: &SegmentationParams,
    seed: u64,
) -> Result<KeypointSet> {
    p.validate()?;
    let len = density.len();
    let indices = match p.mode {
        ExtractionMode::Deterministic => {
            let v = &density.values;
            let cut = quantile(v, p.peak_quantile);
            let peaks: Vec<usize> = local_maxima(v).into_iter().filter(|&i| v[i] > cut).collect();
            greedy_spaced(&peaks, |i| v[i], len, p.min_segment)
        }
        ExtractionMode::Sampled => sampled_keypoints(density, p, seed)?,
    };
    Ok(KeypointSet {
        provenance: vec![Vec::new(); indices.len()],
        indices,
    })
}

fn sampled_keypoints<S: Scalar>(
    density: &FusedKeypointDensity<S>,
    p: &SegmentationParams,
    seed: u64,
) -> Result<Vec<usize>> {
    let len = density.len();
    let weights: Vec<f64> = density.values.iter().map(|v| v.as_f64()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::param(format!("density cannot be sampled: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; len];
    for _ in 0..p.sample_count {
        counts[dist.sample(&mut rng)] += 1;
    }

    // Grow clusters around the most-sampled remaining index, absorbing
    // everything within half a window.
    let radius = p.window / 2;
    let mut clusters: Vec<(usize, usize)> = Vec::new(); // (mass, rounded mean)
    loop {
        let mut seed_idx = None;
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 && seed_idx.is_none_or(|s: usize| c > counts[s]) {
                seed_idx = Some(i);
            }
        }
        let Some(centre) = seed_idx else { break };
        let lo = centre.saturating_sub(radius);
        let hi = (centre + radius).min(len - 1);
        let (mut mass, mut weighted) = (0usize, 0usize);
        for (i, c) in counts.iter_mut().enumerate().take(hi + 1).skip(lo) {
            mass += *c;
            weighted += i * *c;
            *c = 0;
        }
        let mean = (weighted as f64 / mass as f64).round() as usize;
        clusters.push((mass, mean));
    }

    let min_mass = p.min_cluster_mass * p.sample_count as f64;
    let kept: Vec<(usize, usize)> = clusters
        .into_iter()
        .filter(|&(mass, _)| mass as f64 >= min_mass)
        .collect();
    let candidates: Vec<usize> = kept.iter().map(|&(_, i)| i).collect();
    let mass_at = |i: usize| {
        kept.iter()
            .filter(|&&(_, k)| k == i)
            .map(|&(m, _)| m)
            .max()
            .unwrap_or(0) as f64
    };
    Ok(greedy_spaced(&candidates, mass_at, len, p.min_segment))
}

/// Everything produced while segmenting one demonstration.
#[derive(Debug, Clone)]
pub struct Segmentation<S = f64> {
    pub keypoints: KeypointSet,
    pub changepoints: Vec<ChangepointSet>,
    pub density: FusedKeypointDensity<S>,
    /// Windowed jerk per stream, in stream order.
    pub jerk: Vec<(String, Vec<S>)>,
    pub segments: Vec<Demonstration<S>>,
}

pub fn segment_demonstration<S: Scalar>(
    demo: &Demonstration<S>,
    p: &SegmentationParams,
    seed: u64,
) -> Result<Segmentation<S>> {
    p.validate()?;
    let len = demo.len();
    for (name, t) in demo.streams() {
        if t.len() < MIN_JERK_SAMPLES {
            return Err(Error::InvalidTrajectory(format!(
                "stream `{name}` has {} samples, need at least {MIN_JERK_SAMPLES}",
                t.len()
            )));
        }
        if t.len() != len {
            return Err(Error::InvalidTrajectory(format!(
                "stream `{name}` has {} samples, expected {len}",
                t.len()
            )));
        }
    }

    let streams: Vec<(&String, &Trajectory<S>)> = demo.streams().iter().collect();
    let per_stream: Vec<(ChangepointSet, Vec<S>)> = streams
        .par_iter()
        .map(|(name, t)| {
            let cps = detect_changepoints(name, t, p)?;
            let j = windowed_jerk(t, p.window)?;
            Ok((cps, j))
        })
        .collect::<Result<_>>()?;

    let probabilistic: Vec<ProbabilisticKeypoints<S>> =
        per_stream.iter().map(|(c, _)| to_probabilistic(c, p)).collect();
    let density = fuse(&probabilistic, len, p)?;
    let mut keypoints = extract_keypoints(&density, p, seed)?;
    keypoints.provenance = keypoints
        .indices
        .iter()
        .map(|&k| {
            per_stream
                .iter()
                .filter(|(c, _)| c.indices.iter().any(|&i| i.abs_diff(k) <= p.window))
                .map(|(c, _)| c.stream_name.clone())
                .collect()
        })
        .collect();

    let segments = split_at(demo, &keypoints.indices)?;
    let (changepoints, jerk) = per_stream
        .into_iter()
        .map(|(c, j)| {
            let name = c.stream_name.clone();
            (c, (name, j))
        })
        .unzip();
    Ok(Segmentation {
        keypoints,
        changepoints,
        density,
        jerk,
        segments,
    })
}

/// Splits every stream at `cuts`; neighbouring segments share the cut sample.
pub fn split_at<S: Scalar>(demo: &Demonstration<S>, cuts: &[usize]) -> Result<Vec<Demonstration<S>>> {
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(cuts);
    bounds.push(demo.len() - 1);
    bounds
        .windows(2)
        .enumerate()
        .map(|(i, w)| demo.slice(format!("{}/seg{i}", demo.id()), w[0], w[1]))
        .collect()
}
