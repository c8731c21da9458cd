//! On-disk primitive library.
//!
//! Layout: `manifest.json` plus `primitives/<id>/{demo.json, <stream>.csv}`.
//! Ids may contain `/`, which nests the directories. One writer at a time is
//! enforced with a `.lock` file; the manifest is replaced by rename so readers
//! never see a partial file.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elastic_cluster::{ClusterReport, FeatureSet};
use crate::error::{Error, Result};
use crate::io::{read_demonstration, read_json, write_demonstration, write_json};
use crate::scalar::Scalar;
use crate::trajectory::Demonstration;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PRIMITIVES_DIR: &str = "primitives";
pub const LOCK_FILE: &str = ".lock";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveMeta {
    pub id: String,
    pub source_demo: String,
    pub segment_index: usize,
    pub streams: Vec<String>,
    pub sample_count: usize,
    #[serde(default)]
    pub features: Option<Vec<f64>>,
    #[serde(default)]
    pub cluster_id: Option<usize>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub cluster_id: usize,
    pub node: Vec<f64>,
    pub members: Vec<String>,
    pub majority_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryManifest {
    pub version: u32,
    pub primitives: Vec<PrimitiveMeta>,
    pub clusters: Vec<ClusterEntry>,
    #[serde(default)]
    pub params_provenance: serde_json::Map<String, serde_json::Value>,
}

impl Default for LibraryManifest {
    fn default() -> Self {
        Self {
            version: MANIFEST_VERSION,
            primitives: Vec::new(),
            clusters: Vec::new(),
            params_provenance: serde_json::Map::new(),
        }
    }
}

impl LibraryManifest {
    /// Checks the version, id uniqueness and that the cluster table is a
    /// disjoint cover of exactly the primitives carrying a cluster id.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.version != MANIFEST_VERSION {
            return Err(format!("unsupported manifest version {}", self.version));
        }
        let mut by_id = BTreeMap::new();
        for p in &self.primitives {
            check_id(&p.id).map_err(|e| e.to_string())?;
            if by_id.insert(p.id.as_str(), p).is_some() {
                return Err(format!("duplicate primitive id `{}`", p.id));
            }
        }
        let mut seen_clusters = HashSet::new();
        let mut covered = HashSet::new();
        for c in &self.clusters {
            if !seen_clusters.insert(c.cluster_id) {
                return Err(format!("duplicate cluster id {}", c.cluster_id));
            }
            for m in &c.members {
                let Some(p) = by_id.get(m.as_str()) else {
                    return Err(format!("cluster {} lists unknown primitive `{m}`", c.cluster_id));
                };
                if !covered.insert(m.as_str()) {
                    return Err(format!("primitive `{m}` is in more than one cluster"));
                }
                if p.cluster_id != Some(c.cluster_id) {
                    return Err(format!("primitive `{m}` disagrees with cluster {}", c.cluster_id));
                }
            }
        }
        for p in &self.primitives {
            if p.cluster_id.is_some() && !covered.contains(p.id.as_str()) {
                return Err(format!("primitive `{}` has a cluster id but no cluster lists it", p.id));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&PrimitiveMeta> {
        self.primitives.iter().find(|p| p.id == id)
    }
}

/// A primitive with its trajectory data.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveRecord<S = f64> {
    pub meta: PrimitiveMeta,
    pub streams: Demonstration<S>,
}

impl<S: Scalar> PrimitiveRecord<S> {
    /// Metadata is derived from the demonstration; its id becomes the record id.
    pub fn new(streams: Demonstration<S>, source_demo: impl Into<String>, segment_index: usize) -> Self {
        let meta = PrimitiveMeta {
            id: streams.id().to_owned(),
            source_demo: source_demo.into(),
            segment_index,
            streams: streams.stream_names().map(str::to_owned).collect(),
            sample_count: streams.len(),
            features: None,
            cluster_id: None,
            label: None,
        };
        Self { meta, streams }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.meta.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Label(String),
    Cluster(usize),
    SourceDemo(String),
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.split('/').all(|part| {
            !part.is_empty()
                && part != "."
                && part != ".."
                && part
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        });
    if ok {
        Ok(())
    } else {
        Err(Error::param(format!("primitive id `{id}` is not a valid path")))
    }
}

/// Majority over the given labels; ties go to the lexicographically first.
pub fn majority_label<'a>(labels: impl IntoIterator<Item = &'a str>) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (l, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((l, c));
        }
    }
    best.map(|(l, _)| l.to_owned())
}

struct WriteLock {
    path: PathBuf,
}

impl WriteLock {
    fn acquire(root: &Path) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone)]
pub struct Library {
    root: PathBuf,
    manifest: LibraryManifest,
}

impl Library {
    /// Creates an empty library. Fails if a manifest already exists.
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join(PRIMITIVES_DIR))?;
        let _lock = WriteLock::acquire(&root)?;
        let path = root.join(MANIFEST_FILE);
        if path.exists() {
            return Err(Error::param(format!("library already exists at {}", root.display())));
        }
        let manifest = LibraryManifest::default();
        write_json(&path, &manifest)?;
        Ok(Self { root, manifest })
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let manifest = Self::read_manifest(&root)?;
        Ok(Self { root, manifest })
    }

    pub fn open_or_create(root: impl AsRef<Path>) -> Result<Self> {
        if root.as_ref().join(MANIFEST_FILE).exists() {
            Self::open(root)
        } else {
            Self::create(root)
        }
    }

    fn read_manifest(root: &Path) -> Result<LibraryManifest> {
        let path = root.join(MANIFEST_FILE);
        let manifest: LibraryManifest = read_json(&path)?;
        manifest.validate().map_err(|m| Error::parse(&path, m))?;
        Ok(manifest)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &LibraryManifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.manifest.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.primitives.is_empty()
    }

    pub fn primitive_dir(&self, id: &str) -> PathBuf {
        id.split('/')
            .fold(self.root.join(PRIMITIVES_DIR), |p, part| p.join(part))
    }

    /// Takes the writer lock, reloads the manifest, applies `f` and persists
    /// the result. Nothing is written if `f` fails.
    fn mutate(&mut self, f: impl FnOnce(&Path, &mut LibraryManifest) -> Result<()>) -> Result<()> {
        let _lock = WriteLock::acquire(&self.root)?;
        let mut manifest = Self::read_manifest(&self.root)?;
        f(&self.root, &mut manifest)?;
        manifest
            .validate()
            .map_err(|m| Error::InvalidParameter(format!("manifest would become invalid: {m}")))?;
        write_json(&self.root.join(MANIFEST_FILE), &manifest)?;
        self.manifest = manifest;
        Ok(())
    }

    pub fn add_primitives<S: Scalar>(&mut self, records: &[PrimitiveRecord<S>]) -> Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        let mut batch = HashSet::new();
        for r in records {
            check_id(&r.meta.id)?;
            if !batch.insert(r.meta.id.as_str()) {
                return Err(Error::DuplicateId(r.meta.id.clone()));
            }
        }
        let dirs: Vec<PathBuf> = records.iter().map(|r| self.primitive_dir(&r.meta.id)).collect();
        self.mutate(|_, manifest| {
            if let Some(r) = records.iter().find(|r| manifest.get(&r.meta.id).is_some()) {
                return Err(Error::DuplicateId(r.meta.id.clone()));
            }
            for (r, dir) in records.iter().zip(&dirs) {
                let mut demo = r.streams.clone();
                demo.set_id(r.meta.id.clone());
                write_demonstration(dir, &demo)?;
                let mut meta = r.meta.clone();
                meta.streams = demo.stream_names().map(str::to_owned).collect();
                meta.sample_count = demo.len();
                meta.cluster_id = None;
                manifest.primitives.push(meta);
            }
            manifest.primitives.sort_by(|a, b| a.id.cmp(&b.id));
            Ok(())
        })
    }

    /// Writes `cluster_id` for every assigned primitive and rebuilds the
    /// cluster table. Primitives absent from the report lose their cluster id.
    pub fn assign_clusters(&mut self, report: &ClusterReport) -> Result<()> {
        self.mutate(|_, manifest| {
            let mut assign = BTreeMap::new();
            for a in &report.assignments {
                if manifest.get(&a.id).is_none() {
                    return Err(Error::UnknownId(a.id.clone()));
                }
                if a.cluster >= report.n_clusters || a.cluster >= report.nodes.len() {
                    return Err(Error::param(format!(
                        "assignment of `{}` to cluster {} exceeds {} clusters",
                        a.id, a.cluster, report.n_clusters
                    )));
                }
                if assign.insert(a.id.as_str(), a.cluster).is_some() {
                    return Err(Error::DuplicateId(a.id.clone()));
                }
            }
            for p in &mut manifest.primitives {
                p.cluster_id = assign.get(p.id.as_str()).copied();
            }
            manifest.clusters = (0..report.n_clusters)
                .map(|k| ClusterEntry {
                    cluster_id: k,
                    node: report.nodes[k].clone(),
                    members: Vec::new(),
                    majority_label: None,
                })
                .collect();
            rebuild_cluster_members(manifest);
            manifest
                .params_provenance
                .insert("clustering".into(), cluster_provenance(report));
            Ok(())
        })
    }

    /// Stores feature vectors for the listed primitives.
    pub fn set_features<S: Scalar>(&mut self, features: &FeatureSet<S>) -> Result<()> {
        self.mutate(|_, manifest| {
            for (i, id) in features.ids().iter().enumerate() {
                let p = manifest
                    .primitives
                    .iter_mut()
                    .find(|p| &p.id == id)
                    .ok_or_else(|| Error::UnknownId(id.clone()))?;
                p.features = Some(features.row(i).iter().map(|v| v.as_f64()).collect());
            }
            Ok(())
        })
    }

    pub fn set_label(&mut self, id: &str, label: Option<String>) -> Result<()> {
        self.set_labels(&[(id.to_owned(), label)])
    }

    /// Applies all label changes in one manifest write, or none of them.
    pub fn set_labels(&mut self, labels: &[(String, Option<String>)]) -> Result<()> {
        self.mutate(|_, manifest| {
            for (id, label) in labels {
                let p = manifest
                    .primitives
                    .iter_mut()
                    .find(|p| &p.id == id)
                    .ok_or_else(|| Error::UnknownId(id.clone()))?;
                p.label = label.clone();
            }
            rebuild_cluster_members(manifest);
            Ok(())
        })
    }

    pub fn set_provenance(&mut self, key: &str, value: serde_json::Value) -> Result<()> {
        self.mutate(|_, manifest| {
            manifest.params_provenance.insert(key.to_owned(), value);
            Ok(())
        })
    }

    /// Matching primitives in id order, or segment order for `SourceDemo`.
    pub fn query(&self, q: &Query) -> Vec<&PrimitiveMeta> {
        let mut out: Vec<&PrimitiveMeta> = self
            .manifest
            .primitives
            .iter()
            .filter(|p| match q {
                Query::Label(l) => p.label.as_deref() == Some(l.as_str()),
                Query::Cluster(c) => p.cluster_id == Some(*c),
                Query::SourceDemo(d) => &p.source_demo == d,
            })
            .collect();
        match q {
            Query::SourceDemo(_) => out.sort_by(|a, b| a.segment_index.cmp(&b.segment_index).then(a.id.cmp(&b.id))),
            _ => out.sort_by(|a, b| a.id.cmp(&b.id)),
        }
        out
    }

    pub fn load<S: Scalar>(&self, id: &str) -> Result<PrimitiveRecord<S>> {
        let meta = self
            .manifest
            .get(id)
            .ok_or_else(|| Error::UnknownId(id.to_owned()))?
            .clone();
        let streams = read_demonstration(&self.primitive_dir(id))?;
        Ok(PrimitiveRecord { meta, streams })
    }

    pub fn load_all<S: Scalar>(&self) -> Result<Vec<PrimitiveRecord<S>>> {
        self.manifest.primitives.iter().map(|p| self.load(&p.id)).collect()
    }
}

fn rebuild_cluster_members(manifest: &mut LibraryManifest) {
    for c in &mut manifest.clusters {
        let members: Vec<&PrimitiveMeta> = manifest
            .primitives
            .iter()
            .filter(|p| p.cluster_id == Some(c.cluster_id))
            .collect();
        c.members = members.iter().map(|p| p.id.clone()).collect();
        c.majority_label = majority_label(members.iter().filter_map(|p| p.label.as_deref()));
    }
}

fn cluster_provenance(report: &ClusterReport) -> serde_json::Value {
    serde_json::json!({
        "seed": report.seed,
        "lambda": report.lambda,
        "n_clusters": report.n_clusters,
        "stop_energy": report.stop_energy,
    })
}
