use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use primlib::io::{write_demonstration, write_json};
use primlib::{segment_demonstration, ExtractionMode, Library, PrimitiveRecord, SegmentationParams};

use crate::exit::{CliError, Context};
use crate::{paths, plot};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Deterministic,
    Sampled,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Demonstration directory, or a single trajectory CSV.
    pub demo: PathBuf,
    /// Output directory for `seg<i>/` and `keypoints.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Sliding window width in samples.
    #[arg(long, default_value_t = 16)]
    pub window: usize,
    /// Minimum segment length in samples (at least the window).
    #[arg(long = "min-seg", default_value_t = 64)]
    pub min_seg: usize,
    /// Threshold on the normalized windowed jerk.
    #[arg(long, default_value_t = 0.16)]
    pub threshold: f64,
    /// Keypoint extraction from the fused density.
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    pub mode: Mode,
    /// Draws taken in sampled mode.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Per-stream density floor (default 1/T).
    #[arg(long)]
    pub density_floor: Option<f64>,
    #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Also write an SVG of the fused density and per-stream jerk.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Also add the segments to this library (created if missing).
    #[arg(long)]
    pub library: Option<PathBuf>,
}

#[derive(Serialize)]
struct KeypointOut {
    index: usize,
    streams: Vec<String>,
}

#[derive(Serialize)]
struct SegmentOut {
    id: String,
    dir: String,
    start: usize,
    end: usize,
}

#[derive(Serialize)]
struct KeypointsFile<'a> {
    seed: u64,
    demo_id: &'a str,
    sample_count: usize,
    params: &'a SegmentationParams,
    keypoints: Vec<KeypointOut>,
    changepoints: Vec<(&'a str, &'a [usize])>,
    density: &'a [f64],
    segments: Vec<SegmentOut>,
}

pub fn run(a: Args) -> Result<(), CliError> {
    let params = SegmentationParams {
        window: a.window,
        min_segment: a.min_seg,
        threshold: a.threshold,
        density_floor: a.density_floor,
        mode: match a.mode {
            Mode::Deterministic => ExtractionMode::Deterministic,
            Mode::Sampled => ExtractionMode::Sampled,
        },
        sample_count: a.samples,
        ..SegmentationParams::default()
    };
    params.validate()?;
    let demo = paths::load_demo(&a.demo)?;
    paths::out_dir(&a.out)?;
    if let Some(p) = &a.plot {
        paths::out_file(p)?;
    }

    let seg = segment_demonstration(&demo, &params, a.seed).context(a.demo.display())?;

    let mut bounds = vec![0];
    bounds.extend_from_slice(&seg.keypoints.indices);
    bounds.push(demo.len() - 1);
    let mut segments = Vec::with_capacity(seg.segments.len());
    for (i, s) in seg.segments.iter().enumerate() {
        let dir = format!("seg{i}");
        write_demonstration(&a.out.join(&dir), s).context(&dir)?;
        segments.push(SegmentOut {
            id: s.id().to_owned(),
            dir,
            start: bounds[i],
            end: bounds[i + 1],
        });
    }
    let file = KeypointsFile {
        seed: a.seed,
        demo_id: demo.id(),
        sample_count: demo.len(),
        params: &params,
        keypoints: seg
            .keypoints
            .indices
            .iter()
            .zip(&seg.keypoints.provenance)
            .map(|(&index, streams)| KeypointOut {
                index,
                streams: streams.clone(),
            })
            .collect(),
        changepoints: seg
            .changepoints
            .iter()
            .map(|c| (c.stream_name.as_str(), c.indices.as_slice()))
            .collect(),
        density: &seg.density.values,
        segments,
    };
    write_json(&a.out.join("keypoints.json"), &file)?;

    if let Some(p) = &a.plot {
        let svg = plot::segmentation_svg(&seg, a.seed);
        primlib::io::write_atomic(p, svg.as_bytes()).context(p.display())?;
    }

    if let Some(root) = &a.library {
        let mut lib = Library::open_or_create(root).context(root.display())?;
        let records: Vec<PrimitiveRecord> = seg
            .segments
            .into_iter()
            .enumerate()
            .map(|(i, s)| PrimitiveRecord::new(s, demo.id(), i))
            .collect();
        lib.add_primitives(&records).context(root.display())?;
        lib.set_provenance("segmentation", serde_json::json!({ "seed": a.seed, "params": params }))?;
    }

    println!(
        "{}: {} keypoints, {} segments",
        demo.id(),
        seg.keypoints.indices.len(),
        file.segments.len()
    );
    Ok(())
}
