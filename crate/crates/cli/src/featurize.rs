use std::path::PathBuf;

use serde::Serialize;

use primlib::featurizer::{featurize_all, RepresentativeInfo, RepresentativeSet, DEFAULT_RESAMPLE_LEN};
use primlib::io::{write_feature_csv, write_json};
use primlib::{Demonstration, Library, Trajectory};

use crate::exit::{CliError, Context};
use crate::paths;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Library whose primitives are featurized.
    #[arg(long)]
    pub library: PathBuf,
    /// Output directory for `features.csv` and `features_meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Stream to compare (default: each primitive's first stream).
    #[arg(long)]
    pub stream: Option<String>,
    /// Samples after resampling, before DTW.
    #[arg(long, default_value_t = DEFAULT_RESAMPLE_LEN)]
    pub resample: usize,
    /// Representative demonstrations. Without this, one medoid is taken per
    /// label among labelled primitives.
    #[arg(long, num_args = 1..)]
    pub reps: Vec<PathBuf>,
    /// Also store the feature vectors in the library manifest.
    #[arg(long)]
    pub store: bool,
    #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct MetaFile<'a> {
    seed: u64,
    resample_len: usize,
    stream: Option<&'a str>,
    representatives: &'a [RepresentativeInfo],
    primitive_count: usize,
    degenerate: Vec<String>,
}

pub fn pick_stream(demo: &Demonstration, stream: Option<&str>) -> Result<Trajectory, CliError> {
    match stream {
        Some(name) => demo
            .stream(name)
            .cloned()
            .ok_or_else(|| CliError::input(format!("`{}` has no stream `{name}`", demo.id()))),
        None => Ok(demo.streams()[0].clone()),
    }
}

pub fn run(a: Args) -> Result<(), CliError> {
    if a.resample < 2 {
        return Err(CliError::params("--resample must be at least 2"));
    }
    paths::require_dir(&a.library)?;
    for r in &a.reps {
        if !r.exists() {
            return Err(CliError::input(format!("{} does not exist", r.display())));
        }
    }
    let mut lib = Library::open(&a.library).context(a.library.display())?;
    paths::out_dir(&a.out)?;

    let records = lib.load_all::<f64>().context(a.library.display())?;
    if records.is_empty() {
        return Err(CliError::input("library has no primitives"));
    }
    let stream = a.stream.as_deref();
    let prims: Vec<(String, Trajectory)> = records
        .iter()
        .map(|r| Ok((r.meta.id.clone(), pick_stream(&r.streams, stream)?)))
        .collect::<Result<_, CliError>>()?;

    let reps = if a.reps.is_empty() {
        let labelled: Vec<(&str, &Trajectory, &str)> = records
            .iter()
            .zip(&prims)
            .filter_map(|(r, (id, t))| r.meta.label.as_deref().map(|l| (id.as_str(), t, l)))
            .collect();
        if labelled.is_empty() {
            return Err(CliError::params(
                "no representatives: pass --reps or label some primitives",
            ));
        }
        RepresentativeSet::from_labeled(labelled, a.resample)?
    } else {
        let mut list = Vec::with_capacity(a.reps.len());
        for p in &a.reps {
            let d = paths::load_demo(p)?;
            list.push((
                RepresentativeInfo {
                    name: d.id().to_owned(),
                    source_id: None,
                },
                pick_stream(&d, stream)?,
            ));
        }
        RepresentativeSet::with_info(list, a.resample)?
    };

    let (features, degenerate) = featurize_all(&prims, &reps)?;
    write_feature_csv(&a.out.join("features.csv"), &features)?;
    write_json(
        &a.out.join("features_meta.json"),
        &MetaFile {
            seed: a.seed,
            resample_len: a.resample,
            stream,
            representatives: reps.info(),
            primitive_count: features.len(),
            degenerate: degenerate.clone(),
        },
    )?;
    if a.store {
        lib.set_features(&features).context(a.library.display())?;
    }
    for id in &degenerate {
        eprintln!("warning: `{id}` has zero arc length; features computed without scaling");
    }
    println!("{} primitives x {} representatives", features.len(), reps.len());
    Ok(())
}
