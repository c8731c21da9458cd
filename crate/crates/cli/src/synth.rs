use std::path::PathBuf;

use clap::Subcommand;
use serde::Serialize;

use primlib::io::{write_demonstration, write_feature_csv, write_json, write_trajectory_csv};
use primlib::synthetic;
use primlib::{Demonstration, Library, PrimitiveRecord};

use crate::exit::{CliError, Context};
use crate::paths;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-corner 2-D stroke as a single trajectory CSV.
    RShape {
        #[arg(long)]
        out: PathBuf,
    },
    /// Four-stream demonstration with three events; also writes `events.json`.
    Multimodal {
        #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random piecewise-linear demonstration.
    Random {
        #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Three 2-D Gaussian blobs (10/20/30 points) as a feature CSV.
    Blobs {
        #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write generative labels as `id,label`.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Labelled trajectory families added to a library.
    Families {
        #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        per_family: usize,
        /// Largest blend weight towards another family.
        #[arg(long, default_value_t = 0.2)]
        overlap: f64,
        /// Store the label of every k-th primitive per family (sparse labels).
        #[arg(long, default_value_t = 5)]
        label_every: usize,
        #[arg(long)]
        library: PathBuf,
        /// Also write all generative labels as `id,label`.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct EventsFile {
    seed: u64,
    demo_id: String,
    events: Vec<usize>,
}

pub fn run(c: Command) -> Result<(), CliError> {
    match c {
        Command::RShape { out } => {
            paths::out_file(&out)?;
            let (t, corners) = synthetic::r_shape();
            write_trajectory_csv(&out, &t).context(out.display())?;
            println!("corners at {corners:?}");
        }
        Command::Multimodal { seed, out } => {
            paths::out_dir(&out)?;
            let (demo, events) = synthetic::multimodal_demo(seed);
            write_demonstration(&out, &demo).context(out.display())?;
            write_json(
                &out.join("events.json"),
                &EventsFile {
                    seed,
                    demo_id: demo.id().to_owned(),
                    events: events.to_vec(),
                },
            )?;
            println!("events at {events:?}");
        }
        Command::Random { seed, out } => {
            paths::out_dir(&out)?;
            let demo = synthetic::random_demo(seed);
            write_demonstration(&out, &demo).context(out.display())?;
            println!("{} samples, {} streams", demo.len(), demo.streams().len());
        }
        Command::Blobs { seed, out, labels } => {
            paths::out_file(&out)?;
            if let Some(l) = &labels {
                paths::out_file(l)?;
            }
            let (features, truth) = synthetic::three_blobs(seed);
            write_feature_csv(&out, &features).context(out.display())?;
            if let Some(l) = &labels {
                let rows: Vec<(String, String)> = features
                    .ids()
                    .iter()
                    .zip(&truth)
                    .map(|(id, k)| (id.clone(), format!("blob{k}")))
                    .collect();
                paths::write_labels(l, &rows)?;
            }
            println!("{} points", features.len());
        }
        Command::Families {
            seed,
            per_family,
            overlap,
            label_every,
            library,
            labels,
        } => {
            if per_family == 0 || label_every == 0 {
                return Err(CliError::params("--per-family and --label-every must be positive"));
            }
            if !(0.0..=1.0).contains(&overlap) {
                return Err(CliError::params("--overlap must lie in [0, 1]"));
            }
            if let Some(l) = &labels {
                paths::out_file(l)?;
            }
            let samples = synthetic::trajectory_families(per_family, overlap, seed);
            let records: Vec<PrimitiveRecord> = samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let demo = Demonstration::single(s.id.clone(), "pos", s.traj.clone());
                    let r = PrimitiveRecord::new(demo, format!("families{seed}"), i);
                    if (i % per_family) % label_every == 0 {
                        r.with_label(s.label.clone())
                    } else {
                        r
                    }
                })
                .collect();
            let mut lib = Library::open_or_create(&library).context(library.display())?;
            lib.add_primitives(&records).context(library.display())?;
            if let Some(l) = &labels {
                let rows: Vec<(String, String)> = samples.iter().map(|s| (s.id.clone(), s.label.clone())).collect();
                paths::write_labels(l, &rows)?;
            }
            println!("added {} primitives", records.len());
        }
    }
    Ok(())
}
