use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use primlib::io::{read_json, write_json, write_trajectory_csv};
use primlib::kernels::arc_length;
use primlib::lte::ConstraintSpec;
use primlib::{select_candidates, Constraint, Library, Query, Ranking, Trajectory};

use crate::exit::{CliError, Context, EMPTY_SELECTION};
use crate::featurize::pick_stream;
use crate::paths;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Rank {
    /// Edited length closest to the original.
    LeastDistortion,
    /// Shortest edited curve.
    Shortest,
}

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("key").required(true).args(["cluster", "label"])))]
pub struct Args {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub cluster: Option<usize>,
    #[arg(long)]
    pub label: Option<String>,
    /// JSON list of `{"index", "target", "weight"}` (or an object with a
    /// `constraints` list). Negative indices count from the end.
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    /// Stream to edit (default: each primitive's first stream).
    #[arg(long)]
    pub stream: Option<String>,
    #[arg(long, value_enum, default_value_t = Rank::LeastDistortion)]
    pub rank: Rank,
    #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory for `rank<k>.csv` files and `selection.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConstraintsFile {
    List(Vec<ConstraintSpec>),
    Wrapped { constraints: Vec<ConstraintSpec> },
}

#[derive(Serialize)]
struct CandidateOut {
    rank: usize,
    id: String,
    file: String,
    constraint_residual: f64,
    length_ratio: f64,
    arc_length: f64,
}

#[derive(Serialize)]
struct FailureOut {
    id: String,
    error: String,
}

#[derive(Serialize)]
struct SelectionFile<'a> {
    seed: u64,
    query: serde_json::Value,
    ranking: Ranking,
    top_k: usize,
    stream: Option<&'a str>,
    constraints: &'a [ConstraintSpec],
    candidates: Vec<CandidateOut>,
    failures: Vec<FailureOut>,
}

pub fn run(a: Args) -> Result<(), CliError> {
    if a.top_k == 0 {
        return Err(CliError::params("--top-k must be at least 1"));
    }
    paths::require_dir(&a.library)?;
    paths::require_file(&a.constraints)?;
    let specs = match read_json::<ConstraintsFile>(&a.constraints).context(a.constraints.display())? {
        ConstraintsFile::List(v) | ConstraintsFile::Wrapped { constraints: v } => v,
    };
    if specs.is_empty() {
        return Err(CliError::params("constraints file lists no constraints"));
    }
    let lib = Library::open(&a.library).context(a.library.display())?;
    paths::out_dir(&a.out)?;

    let (query, query_json) = match (&a.cluster, &a.label) {
        (Some(c), _) => (Query::Cluster(*c), serde_json::json!({ "cluster": c })),
        (_, Some(l)) => (Query::Label(l.clone()), serde_json::json!({ "label": l })),
        _ => unreachable!("clap requires one key"),
    };
    let matches = lib.query(&query);
    if matches.is_empty() {
        return Err(CliError::new(EMPTY_SELECTION, "no matching primitives"));
    }
    let stream = a.stream.as_deref();
    let prims: Vec<(String, Trajectory)> = matches
        .iter()
        .map(|m| {
            let rec = lib.load::<f64>(&m.id).context(&m.id)?;
            Ok((m.id.clone(), pick_stream(&rec.streams, stream)?))
        })
        .collect::<Result<_, CliError>>()?;

    let constraints: Vec<Constraint> = specs.iter().map(ConstraintSpec::to_constraint).collect();
    let ranking = match a.rank {
        Rank::LeastDistortion => Ranking::LeastDistortion,
        Rank::Shortest => Ranking::Shortest,
    };
    let sel = select_candidates(&prims, &constraints, a.top_k, ranking)?;
    if sel.ranked.is_empty() {
        let (id, err) = &sel.errors[0];
        return Err(CliError::params(format!("no primitive could be edited; `{id}`: {err}")));
    }

    let mut candidates = Vec::with_capacity(sel.ranked.len());
    for c in &sel.ranked {
        let file = format!("rank{}.csv", c.rank);
        write_trajectory_csv(&a.out.join(&file), &c.result.edited).context(&file)?;
        candidates.push(CandidateOut {
            rank: c.rank,
            id: c.id.clone(),
            file,
            constraint_residual: c.result.constraint_residual,
            length_ratio: c.result.length_ratio,
            arc_length: arc_length(&c.result.edited),
        });
    }
    let failures = sel
        .errors
        .iter()
        .map(|(id, e)| FailureOut {
            id: id.clone(),
            error: e.clone(),
        })
        .collect();
    write_json(
        &a.out.join("selection.json"),
        &SelectionFile {
            seed: a.seed,
            query: query_json,
            ranking,
            top_k: a.top_k,
            stream,
            constraints: &specs,
            candidates,
            failures,
        },
    )?;
    for c in &sel.ranked {
        println!(
            "{}  {}  residual {:.3e}  length ratio {:.4}",
            c.rank, c.id, c.result.constraint_residual, c.result.length_ratio
        );
    }
    Ok(())
}
