use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde::Deserialize;

use primlib::io::read_json;
use primlib::{ClusterReport, Library, PrimitiveRecord, Query};

use crate::exit::{CliError, Context};
use crate::{paths, table};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty library.
    Init { library: PathBuf },
    /// Add demonstrations as primitives. A `segment` output directory adds
    /// all of its segments.
    Add {
        library: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Sparse label given to every added primitive.
        #[arg(long)]
        label: Option<String>,
        /// Source demonstration for plain demonstration inputs (default: own id).
        #[arg(long)]
        source_demo: Option<String>,
        /// Segment index for plain demonstration inputs.
        #[arg(long, default_value_t = 0)]
        segment_index: usize,
    },
    /// Print every primitive.
    List { library: PathBuf },
    /// Print primitives matching one key.
    #[command(group(clap::ArgGroup::new("key").required(true).args(["label", "cluster", "source_demo"])))]
    Query {
        library: PathBuf,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        cluster: Option<usize>,
        #[arg(long)]
        source_demo: Option<String>,
    },
    /// Store a `clusters.json` assignment and rebuild the cluster table.
    Assign {
        library: PathBuf,
        #[arg(long)]
        clusters: PathBuf,
    },
    /// Set or clear sparse labels.
    #[command(group(clap::ArgGroup::new("what").required(true).args(["id", "from"])))]
    Label {
        library: PathBuf,
        /// Primitive id.
        id: Option<String>,
        /// New label; omit to clear.
        label: Option<String>,
        /// `id,label` CSV applied in bulk.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
struct SegmentEntry {
    dir: String,
}

#[derive(Deserialize)]
struct SegmentsFile {
    demo_id: String,
    segments: Vec<SegmentEntry>,
}

fn records_from(
    input: &Path,
    source_demo: Option<&str>,
    segment_index: usize,
    label: Option<&str>,
) -> Result<Vec<PrimitiveRecord>, CliError> {
    let kp = input.join("keypoints.json");
    let records = if input.is_dir() && kp.is_file() {
        let file: SegmentsFile = read_json(&kp).context(kp.display())?;
        file.segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let demo = paths::load_demo(&input.join(&s.dir))?;
                Ok(PrimitiveRecord::new(demo, file.demo_id.clone(), i))
            })
            .collect::<Result<Vec<_>, CliError>>()?
    } else {
        let demo = paths::load_demo(input)?;
        let source = source_demo.unwrap_or(demo.id()).to_owned();
        vec![PrimitiveRecord::new(demo, source, segment_index)]
    };
    Ok(records
        .into_iter()
        .map(|r| match label {
            Some(l) => r.with_label(l),
            None => r,
        })
        .collect())
}

fn open(root: &Path) -> Result<Library, CliError> {
    paths::require_dir(root)?;
    Library::open(root).context(root.display())
}

pub fn run(c: Command) -> Result<(), CliError> {
    match c {
        Command::Init { library } => {
            Library::create(&library).context(library.display())?;
            println!("created {}", library.display());
        }
        Command::Add {
            library,
            inputs,
            label,
            source_demo,
            segment_index,
        } => {
            for i in &inputs {
                if !i.exists() {
                    return Err(CliError::input(format!("{} does not exist", i.display())));
                }
            }
            let mut records = Vec::new();
            for i in &inputs {
                records.extend(records_from(
                    i,
                    source_demo.as_deref(),
                    segment_index,
                    label.as_deref(),
                )?);
            }
            let mut lib = Library::open_or_create(&library).context(library.display())?;
            lib.add_primitives(&records).context(library.display())?;
            println!("added {} primitives ({} total)", records.len(), lib.len());
        }
        Command::List { library } => {
            let lib = open(&library)?;
            let all: Vec<_> = lib.manifest().primitives.iter().collect();
            print!("{}", table::primitives(&all));
        }
        Command::Query {
            library,
            label,
            cluster,
            source_demo,
        } => {
            let lib = open(&library)?;
            let q = match (label, cluster, source_demo) {
                (Some(l), _, _) => Query::Label(l),
                (_, Some(c), _) => Query::Cluster(c),
                (_, _, Some(d)) => Query::SourceDemo(d),
                _ => unreachable!("clap requires one key"),
            };
            print!("{}", table::primitives(&lib.query(&q)));
        }
        Command::Assign { library, clusters } => {
            paths::require_file(&clusters)?;
            let mut lib = open(&library)?;
            let report: ClusterReport = read_json(&clusters).context(clusters.display())?;
            lib.assign_clusters(&report).context(clusters.display())?;
            for c in &lib.manifest().clusters {
                println!(
                    "cluster {}: {} members, majority {}",
                    c.cluster_id,
                    c.members.len(),
                    c.majority_label.as_deref().unwrap_or("-")
                );
            }
        }
        Command::Label {
            library,
            id,
            label,
            from,
        } => {
            let mut lib = open(&library)?;
            if let Some(f) = from {
                let labels: Vec<(String, Option<String>)> = paths::read_labels(&f)?
                    .into_iter()
                    .map(|(id, l)| (id, Some(l)))
                    .collect();
                lib.set_labels(&labels).context(f.display())?;
            } else if let Some(id) = id {
                lib.set_label(&id, label).context(&id)?;
            }
        }
    }
    Ok(())
}
