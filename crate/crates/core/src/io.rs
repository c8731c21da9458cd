//! On-disk formats: trajectory CSV, demonstration directories, feature CSV.
//!
//! Numbers are written with 17 significant digits so `f64` values survive a
//! write/read cycle bit-exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elastic_cluster::FeatureSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::{Demonstration, Trajectory};

pub const DEMO_META_FILE: &str = "demo.json";

/// Relative tolerance on time-column uniformity.
const TIME_TOLERANCE: f64 = 1e-9;

pub fn format_number<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v.as_f64())
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn trajectory_to_csv<S: Scalar>(traj: &Trajectory<S>) -> String {
    let mut out = String::from("t");
    for name in traj.dim_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (k, row) in traj.rows().enumerate() {
        let t = traj.dt().as_f64() * k as f64;
        out.push_str(&format_number(t));
        for v in row {
            out.push(',');
            out.push_str(&format_number(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv<S: Scalar>(path: &Path, traj: &Trajectory<S>) -> Result<()> {
    write_atomic(path, trajectory_to_csv(traj).as_bytes())
}

pub fn read_trajectory_csv<S: Scalar>(path: &Path) -> Result<Trajectory<S>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::parse(path, "header must be `t,<dim names...>`"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let dim = names.len();
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = line + 2;
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(path, format!("line {row}: bad number `{s}`")))
        };
        times.push(parse(&rec[0])?);
        for field in rec.iter().skip(1) {
            let v = parse(field)?;
            if !v.is_finite() {
                return Err(Error::parse(path, format!("line {row}: non-finite value")));
            }
            samples.push(S::lit(v));
        }
    }
    if times.len() < 2 {
        return Err(Error::parse(path, "need at least 2 samples"));
    }
    // first step: exact for files written here, whose times are `k * dt`
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::parse(path, "time column must be strictly increasing"));
    }
    for (k, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if !(step > 0.0) {
            return Err(Error::parse(
                path,
                format!("time not strictly increasing at line {}", k + 3),
            ));
        }
        if (step - dt).abs() > TIME_TOLERANCE * dt.max(w[1].abs()) {
            return Err(Error::parse(path, format!("non-uniform time step at line {}", k + 3)));
        }
    }
    Trajectory::new(samples, dim, S::lit(dt), names).map_err(|e| Error::parse(path, e.to_string()))
}

/// `demo.json` contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoMeta {
    pub id: String,
    pub streams: Vec<String>,
    pub sample_count: usize,
}

fn check_stream_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::param(format!("stream name `{name}` is not a valid file stem")))
    }
}

pub fn write_demonstration<S: Scalar>(dir: &Path, demo: &Demonstration<S>) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, traj) in demo.streams() {
        check_stream_name(name)?;
        write_trajectory_csv(&dir.join(format!("{name}.csv")), traj)?;
    }
    let meta = DemoMeta {
        id: demo.id().to_owned(),
        streams: demo.stream_names().map(str::to_owned).collect(),
        sample_count: demo.len(),
    };
    write_json(&dir.join(DEMO_META_FILE), &meta)
}

pub fn read_demonstration<S: Scalar>(dir: &Path) -> Result<Demonstration<S>> {
    let meta_path = dir.join(DEMO_META_FILE);
    let meta: DemoMeta = read_json(&meta_path)?;
    let mut streams = Vec::with_capacity(meta.streams.len());
    for name in &meta.streams {
        check_stream_name(name)?;
        let traj = read_trajectory_csv(&dir.join(format!("{name}.csv")))?;
        streams.push((name.clone(), traj));
    }
    let demo = Demonstration::new(meta.id, streams).map_err(|e| Error::parse(&meta_path, e.to_string()))?;
    if demo.len() != meta.sample_count {
        return Err(Error::parse(
            &meta_path,
            format!(
                "sample_count {} does not match stream length {}",
                meta.sample_count,
                demo.len()
            ),
        ));
    }
    Ok(demo)
}

pub fn features_to_csv<S: Scalar>(features: &FeatureSet<S>) -> String {
    let mut out = String::from("id");
    for f in 0..features.dim() {
        out.push_str(&format!(",f{f}"));
    }
    out.push('\n');
    for (id, row) in features.ids().iter().zip(features.rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&format_number(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_feature_csv<S: Scalar>(path: &Path, features: &FeatureSet<S>) -> Result<()> {
    write_atomic(path, features_to_csv(features).as_bytes())
}

pub fn read_feature_csv<S: Scalar>(path: &Path) -> Result<FeatureSet<S>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "id" {
        return Err(Error::parse(path, "header must be `id,f0,f1,...`"));
    }
    let dim = header.len() - 1;
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        ids.push(rec[0].to_owned());
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad number `{field}`", line + 2)))?;
            data.push(S::lit(v));
        }
    }
    FeatureSet::new(data, dim, ids).map_err(|e| Error::parse(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<[f64; 2]> = (0..50)
            .map(|i| [(i as f64 * 0.37).sin() / 3.0, 1e-7 * i as f64 + 0.1])
            .collect();
        let t = Trajectory::from_rows(&rows, 0.013).unwrap();
        let p = dir.path().join("s.csv");
        write_trajectory_csv(&p, &t).unwrap();
        let back: Trajectory<f64> = read_trajectory_csv(&p).unwrap();
        assert_eq!(back.samples(), t.samples());
        assert_eq!(back.dt().to_bits(), t.dt().to_bits());
        assert_eq!(back.dim_names(), t.dim_names());
    }

    #[test]
    fn rejects_non_uniform_time() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "t,x\n0,1\n1,2\n2.5,3\n").unwrap();
        assert!(matches!(read_trajectory_csv::<f64>(&p), Err(Error::Parse { .. })));
        fs::write(&p, "t,x\n0,1\n0,2\n").unwrap();
        assert!(read_trajectory_csv::<f64>(&p).is_err());
        fs::write(&p, "time,x\n0,1\n1,2\n").unwrap();
        assert!(read_trajectory_csv::<f64>(&p).is_err());
    }

    #[test]
    fn demonstration_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = Trajectory::from_series(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let b = Trajectory::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]], 1.0).unwrap();
        let demo = Demonstration::new("demo1", [("pos".into(), a), ("force".into(), b)]).unwrap();
        write_demonstration(dir.path(), &demo).unwrap();
        let back: Demonstration<f64> = read_demonstration(dir.path()).unwrap();
        assert_eq!(back, demo);
    }

    #[test]
    fn feature_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let fs_ = FeatureSet::new(vec![0.1, 0.2, 1.0 / 3.0, 4.0], 2, vec!["a".into(), "b".into()]).unwrap();
        let p = dir.path().join("f.csv");
        write_feature_csv(&p, &fs_).unwrap();
        let back: FeatureSet<f64> = read_feature_csv(&p).unwrap();
        assert_eq!(back, fs_);
    }
}
