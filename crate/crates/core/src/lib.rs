//! Motion-primitive toolkit: segment multi-stream demonstrations at fused
//! jerk changepoints, featurize segments by DTW distance to representatives,
//! cluster them with elastic EM, store them in an on-disk library, and
//! retarget them with Laplacian editing.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); `f64` is the
//! default type parameter everywhere and the aliases below name both.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtw;
pub mod elastic_cluster;
pub mod error;
pub mod featurizer;
pub mod io;
pub mod kernels;
pub mod library;
pub mod linalg;
pub mod lte;
pub mod scalar;
pub mod segmenter;
pub mod synthetic;
pub mod trajectory;

pub use elastic_cluster::{
    fit_auto, fit_fixed_n, AutoFit, AutoOptions, ClusterReport, ElasticClusterModel, FeatureSet, FitOptions, StopEnergy,
};
pub use error::{Error, Result};
pub use featurizer::{featurize, featurize_all, RepresentativeSet};
pub use library::{Library, LibraryManifest, PrimitiveMeta, PrimitiveRecord, Query};
pub use lte::{edit, select_candidates, Constraint, EditResult, Ranking};
pub use scalar::Scalar;
pub use segmenter::{segment_demonstration, ExtractionMode, Segmentation, SegmentationParams};
pub use trajectory::{Demonstration, Trajectory};

pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type Demonstration64 = Demonstration<f64>;
pub type Demonstration32 = Demonstration<f32>;
pub type FeatureSet64 = FeatureSet<f64>;
pub type FeatureSet32 = FeatureSet<f32>;
pub type ElasticClusterModel64 = ElasticClusterModel<f64>;
pub type ElasticClusterModel32 = ElasticClusterModel<f32>;
