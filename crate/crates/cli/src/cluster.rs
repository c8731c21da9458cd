use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use primlib::elastic_cluster::lloyd::lloyd;
use primlib::elastic_cluster::{fit_from_init, initial_nodes, lambda_guidance, restart_seed, scaled_lambda, NTrace};
use primlib::io::{read_feature_csv, write_json};
use primlib::{
    fit_auto, fit_fixed_n, AutoOptions, ClusterReport, ElasticClusterModel, Error, FeatureSet, FitOptions, StopEnergy,
};

use crate::exit::{CliError, Context, INFEASIBLE};
use crate::paths;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LambdaScale {
    /// Use `--lambda` as given.
    None,
    /// Multiply by total feature variance over the number of rows.
    Variance,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Stop {
    /// `U_X - U_E`
    Penalized,
    /// `U_X + U_E`
    Total,
}

impl From<Stop> for StopEnergy {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Penalized => StopEnergy::Penalized,
            Stop::Total => StopEnergy::Total,
        }
    }
}

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("count").required(true).args(["auto", "n"])))]
pub struct Args {
    /// Feature CSV (`id,f0,f1,...`).
    #[arg(long)]
    pub features: PathBuf,
    /// Stretching constant.
    #[arg(long, default_value_t = 0.4)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = LambdaScale::None)]
    pub lambda_scale: LambdaScale,
    /// Grow the number of clusters until the energy stops falling.
    #[arg(long)]
    pub auto: bool,
    /// Fixed number of clusters.
    #[arg(long)]
    pub n: Option<usize>,
    /// Upper bound on the cluster count in `--auto`.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Random restarts per cluster count.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Energy compared across cluster counts in `--auto`.
    #[arg(long, value_enum, default_value_t = Stop::Penalized)]
    pub stop_energy: Stop,
    #[arg(long, env = "PRIMLIB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output `clusters.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also compare a zero-stretching fit with plain Lloyd's k-means from the
    /// same start; writes `kmeans_oracle.json` next to `--out`.
    #[arg(long)]
    pub kmeans_oracle: bool,
    /// `id,label` CSV; writes the cluster-majority misclustering rate to
    /// `cluster_eval.json` next to `--out`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleFile {
    seed: u64,
    n_clusters: usize,
    agreement: f64,
    identical_assignments: bool,
    max_center_difference: f64,
    lloyd_iterations: usize,
    elastic_iterations: usize,
}

#[derive(Serialize)]
struct ClusterEval {
    cluster: usize,
    size: usize,
    majority_label: Option<String>,
    majority_count: usize,
}

#[derive(Serialize)]
struct EvalFile {
    seed: u64,
    labelled: usize,
    misclustered: usize,
    misclustering_rate: f64,
    clusters: Vec<ClusterEval>,
}

fn infeasible(m: usize, factor: f64, lambda: f64) -> CliError {
    let guide = lambda_guidance(&[m / 2, m - m / 2]) / factor;
    CliError::new(
        INFEASIBLE,
        format!(
            "stretching constant {lambda} is infeasible for two clusters; \
             keep lambda below roughly min cluster size / N (about {guide:.4} here)"
        ),
    )
}

fn best_fixed(
    data: &FeatureSet,
    n: usize,
    lambda: f64,
    a: &Args,
    fit: FitOptions,
) -> Result<(ElasticClusterModel, Vec<NTrace>), Error> {
    let mut best: Option<ElasticClusterModel> = None;
    let mut feasible = 0;
    let mut last_err = None;
    for r in 0..a.restarts {
        match fit_fixed_n(data, n, lambda, restart_seed(a.seed, n, r), fit) {
            Ok(m) => {
                feasible += 1;
                if best.as_ref().is_none_or(|b| m.total_energy < b.total_energy) {
                    best = Some(m);
                }
            }
            Err(e @ (Error::InfeasibleStretching { .. } | Error::EmptyCluster { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let model = best.ok_or_else(|| last_err.expect("at least one restart"))?;
    let stop = StopEnergy::from(a.stop_energy);
    let trace = vec![NTrace {
        n,
        best_energy: Some(model.total_energy),
        stop_energy: Some(stop.of(&model)),
        feasible_restarts: feasible,
    }];
    Ok((model, trace))
}

pub fn run(a: Args) -> Result<(), CliError> {
    if a.restarts == 0 {
        return Err(CliError::params("--restarts must be at least 1"));
    }
    if !a.lambda.is_finite() || a.lambda < 0.0 {
        return Err(CliError::params("--lambda must be a non-negative number"));
    }
    paths::require_file(&a.features)?;
    if let Some(l) = &a.labels {
        paths::require_file(l)?;
    }
    paths::out_file(&a.out)?;

    let data: FeatureSet = read_feature_csv(&a.features).context(a.features.display())?;
    let labels = a.labels.as_deref().map(paths::read_labels).transpose()?;
    if let Some(n) = a.n {
        if n == 0 || n > data.len() {
            return Err(CliError::params(format!("--n must lie in 1..={}", data.len())));
        }
    }
    let factor = match a.lambda_scale {
        LambdaScale::None => 1.0,
        LambdaScale::Variance => scaled_lambda(1.0, &data),
    };
    let lambda = a.lambda * factor;
    let fit = FitOptions {
        max_iter: a.max_iter,
        tol: a.tol,
    };
    let stop = StopEnergy::from(a.stop_energy);

    let (model, trace) = if let Some(n) = a.n {
        match best_fixed(&data, n, lambda, &a, fit) {
            Ok(v) => v,
            Err(Error::InfeasibleStretching { .. }) => return Err(infeasible(data.len(), factor, a.lambda)),
            Err(e) => return Err(e.into()),
        }
    } else {
        let opts = AutoOptions {
            restarts: a.restarts,
            fit,
            stop,
            max_n: a.max_n,
        };
        let auto = fit_auto(&data, lambda, a.seed, opts)?;
        let two_failed = auto.trace.get(1).is_some_and(|t| t.feasible_restarts == 0);
        if two_failed
            && matches!(
                fit_fixed_n(&data, 2, lambda, restart_seed(a.seed, 2, 0), fit),
                Err(Error::InfeasibleStretching { .. })
            )
        {
            return Err(infeasible(data.len(), factor, a.lambda));
        }
        (auto.model, auto.trace)
    };

    // `lambda` in the report is the effective constant after scaling
    let report = ClusterReport::from_model(&data, &model, &trace, stop, a.seed);

    let oracle = if a.kmeans_oracle {
        let n = model.n_clusters();
        let init = initial_nodes(&data, n, restart_seed(a.seed, n, 0))?;
        let elastic = fit_from_init(&data, init.clone(), 0.0, fit)?;
        let reference = lloyd(&data, &init, a.max_iter);
        let same = elastic
            .assignment
            .iter()
            .zip(&reference.assignment)
            .filter(|(x, y)| x == y)
            .count();
        let diff = elastic
            .nodes
            .iter()
            .zip(&reference.centers)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        Some(OracleFile {
            seed: a.seed,
            n_clusters: n,
            agreement: same as f64 / data.len() as f64,
            identical_assignments: same == data.len(),
            max_center_difference: diff,
            lloyd_iterations: reference.iterations,
            elastic_iterations: elastic.iterations,
        })
    } else {
        None
    };

    let eval = labels.map(|labels| evaluate(&data, &model, &labels, a.seed));

    write_json(&a.out, &report).context(a.out.display())?;
    if let Some(o) = &oracle {
        let p = paths::sibling(&a.out, "kmeans_oracle.json");
        write_json(&p, o).context(p.display())?;
    }
    if let Some(e) = &eval {
        let p = paths::sibling(&a.out, "cluster_eval.json");
        write_json(&p, e).context(p.display())?;
    }

    println!(
        "{} clusters, total energy {:.6}",
        report.n_clusters, report.energies.total
    );
    if let Some(o) = &oracle {
        println!(
            "k-means oracle agreement {:.1}%, max centre difference {:.3e}",
            100.0 * o.agreement,
            o.max_center_difference
        );
    }
    if let Some(e) = &eval {
        println!(
            "misclustered {} of {} labelled ({:.1}%)",
            e.misclustered,
            e.labelled,
            100.0 * e.misclustering_rate
        );
    }
    Ok(())
}

/// Cluster-majority misclustering over the rows that have a label.
fn evaluate(data: &FeatureSet, model: &ElasticClusterModel, labels: &BTreeMap<String, String>, seed: u64) -> EvalFile {
    let mut per: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut sizes = vec![0usize; model.n_clusters()];
    for (id, &c) in data.ids().iter().zip(&model.assignment) {
        sizes[c] += 1;
        if let Some(l) = labels.get(id) {
            *per.entry(c).or_default().entry(l.as_str()).or_default() += 1;
        }
    }
    let mut labelled = 0;
    let mut correct = 0;
    let clusters = (0..model.n_clusters())
        .map(|c| {
            let counts = per.get(&c);
            let majority = counts.and_then(|m| {
                // ties go to the lexicographically first label
                m.iter().fold(None, |best: Option<(&str, usize)>, (l, &k)| match best {
                    Some((_, bk)) if bk >= k => best,
                    _ => Some((l, k)),
                })
            });
            labelled += counts.map(|m| m.values().sum::<usize>()).unwrap_or(0);
            correct += majority.map(|(_, k)| k).unwrap_or(0);
            ClusterEval {
                cluster: c,
                size: sizes[c],
                majority_label: majority.map(|(l, _)| l.to_owned()),
                majority_count: majority.map(|(_, k)| k).unwrap_or(0),
            }
        })
        .collect();
    EvalFile {
        seed,
        labelled,
        misclustered: labelled - correct,
        misclustering_rate: if labelled > 0 {
            (labelled - correct) as f64 / labelled as f64
        } else {
            0.0
        },
        clusters,
    }
}
