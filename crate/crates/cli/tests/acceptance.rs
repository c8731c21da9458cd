//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in `KNOWN_UNATTAINABLE`
//! (or if a listed one unexpectedly passes).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use primlib::elastic_cluster::lloyd::lloyd;
use primlib::elastic_cluster::{
    approximation_energy, build_energy_system, fit_from_init, initial_nodes, m_step, scaled_lambda, stretching_energy,
};
use primlib::featurizer::{featurize_all, RepresentativeSet, DEFAULT_RESAMPLE_LEN};
use primlib::segmenter::detect_changepoints;
use primlib::synthetic;
use primlib::{
    edit, fit_auto, segment_demonstration, AutoOptions, Constraint, Demonstration, ElasticClusterModel, FeatureSet,
    FitOptions, SegmentationParams, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria known to fail as specified; see README.
const KNOWN_UNATTAINABLE: &[&str] = &["3", "7b"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn random_features(rng: &mut ChaCha8Rng, m: usize, f: usize) -> FeatureSet {
    // a few loose groups so that clusters are non-trivial
    let groups = rng.random_range(1..=4);
    let centres: Vec<Vec<f64>> = (0..groups)
        .map(|_| (0..f).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let c = &centres[rng.random_range(0..groups)];
            c.iter().map(|v| v + rng.random_range(-1.5..1.5)).collect()
        })
        .collect();
    FeatureSet::from_rows(&rows).unwrap()
}

fn c1_kmeans_oracle() -> Vec<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for i in 0..200u64 {
        let m = rng.random_range(8..=60);
        let f = rng.random_range(1..=4);
        let n = rng.random_range(2..=4);
        let data = random_features(&mut rng, m, f);
        let init = initial_nodes(&data, n, i).unwrap();
        let elastic = fit_from_init(&data, init.clone(), 0.0, FitOptions::default()).unwrap();
        let reference = lloyd(&data, &init, 200);
        if elastic.assignment != reference.assignment {
            mismatched += 1;
        }
        for (a, b) in elastic.nodes.iter().zip(&reference.centers) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    vec![outcome(
        "1",
        mismatched == 0 && worst <= 1e-9 && secs < 10.0,
        format!("k-means oracle: 200 instances, {mismatched} assignment mismatches, max centre diff {worst:.2e}, {secs:.2}s"),
    )]
}

fn total_energy(data: &FeatureSet, nodes: &[f64], assignment: &[usize], lambda: f64) -> f64 {
    let model = ElasticClusterModel {
        nodes: nodes.to_vec(),
        dim: data.dim(),
        assignment: assignment.to_vec(),
        lambda,
        approx_energy: 0.0,
        stretch_energy: 0.0,
        total_energy: 0.0,
        converged: false,
        iterations: 0,
    };
    approximation_energy(data, &model) + stretching_energy(&model)
}

fn c2_m_step_optimality() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let f = rng.random_range(1..=4);
        let m = rng.random_range(n..=40);
        let data = random_features(&mut rng, m, f);
        // every cluster non-empty
        let mut assignment: Vec<usize> = (0..m).map(|j| if j < n { j } else { rng.random_range(0..n) }).collect();
        assignment.rotate_left(rng.random_range(0..m));
        let mut sizes = vec![0usize; n];
        assignment.iter().for_each(|&a| sizes[a] += 1);
        let bound = *sizes.iter().min().unwrap() as f64 / n as f64;
        let lambda = rng.random_range(0.0..0.9) * bound;
        let sys = build_energy_system(&data, &assignment, n, lambda).unwrap();
        let nodes = m_step(&sys).unwrap();
        for k in 0..nodes.len() {
            let mut up = nodes.clone();
            let mut down = nodes.clone();
            up[k] += h;
            down[k] -= h;
            let g = (total_energy(&data, &up, &assignment, lambda) - total_energy(&data, &down, &assignment, lambda))
                / (2.0 * h);
            worst = worst.max(g.abs());
        }
    }
    let data = FeatureSet::from_rows(&[[0.0], [2.0]]).unwrap();
    let sys = build_energy_system(&data, &[0, 1], 2, 0.4).unwrap();
    let nodes = m_step(&sys).unwrap();
    let e = total_energy(&data, &nodes, &[0, 1], 0.4);
    let exact = (nodes[0] + 4.0).abs() <= 1e-9 && (nodes[1] - 6.0).abs() <= 1e-9 && (e + 8.0).abs() <= 1e-9;
    vec![outcome(
        "2",
        worst < 1e-4 && exact,
        format!(
            "M-step optimality: max |FD gradient| {worst:.2e} over 100 instances; example nodes ({:.12}, {:.12}), energy {e:.12}",
            nodes[0], nodes[1]
        ),
    )]
}

/// Largest number of rows explained by a one-to-one matching of clusters
/// to labels.
fn best_matching(counts: &[Vec<usize>], used: &mut Vec<bool>, c: usize) -> usize {
    if c == counts.len() {
        return 0;
    }
    let mut best = best_matching(counts, used, c + 1);
    for l in 0..used.len() {
        if !used[l] {
            used[l] = true;
            best = best.max(counts[c][l] + best_matching(counts, used, c + 1));
            used[l] = false;
        }
    }
    best
}

fn c3_auto_n() -> Vec<Outcome> {
    let start = Instant::now();
    let mut found_three = 0;
    let mut worst = 0.0f64;
    let mut ns = Vec::new();
    for seed in 0..10u64 {
        let (data, truth) = synthetic::three_blobs(seed);
        let fit = fit_auto(&data, 0.4, seed, AutoOptions::default()).unwrap();
        let n = fit.model.n_clusters();
        ns.push(n);
        if n == 3 {
            found_three += 1;
        }
        let mut counts = vec![vec![0usize; 3]; n];
        for (&a, &t) in fit.model.assignment.iter().zip(&truth) {
            counts[a][t] += 1;
        }
        let right = best_matching(&counts, &mut vec![false; 3], 0);
        worst = worst.max(1.0 - right as f64 / truth.len() as f64);
    }
    let secs = start.elapsed().as_secs_f64();
    vec![outcome(
        "3",
        found_three >= 9 && worst <= 0.05 && secs < 5.0,
        format!(
            "auto-N on three blobs: N=3 in {found_three}/10 (N per seed {ns:?}), worst misassignment {:.1}%, {secs:.2}s",
            100.0 * worst
        ),
    )]
}

fn default_params() -> SegmentationParams {
    SegmentationParams::new(16, 64, 0.16).unwrap()
}

fn c4_r_shape() -> Vec<Outcome> {
    let (t, corners) = synthetic::r_shape();
    let cps = detect_changepoints("r", &t, &default_params()).unwrap();
    let near = cps.indices.len() == 2 && cps.indices.iter().zip(corners).all(|(c, g)| c.abs_diff(g) <= 16);
    vec![outcome(
        "4",
        near,
        format!(
            "two-corner polyline: changepoints {:?}, corners {corners:?}",
            cps.indices
        ),
    )]
}

fn flattened(demo: &Demonstration, stream: &str) -> Demonstration {
    let streams = demo.streams().iter().map(|(k, t)| {
        let t = if k == stream {
            let first = t.row(0).to_vec();
            t.map_rows(|_, out| out.copy_from_slice(&first))
        } else {
            t.clone()
        };
        (k.clone(), t)
    });
    Demonstration::new(demo.id(), streams.collect::<Vec<_>>()).unwrap()
}

fn without(demo: &Demonstration, stream: &str) -> Demonstration {
    let streams: Vec<_> = demo
        .streams()
        .iter()
        .filter(|(k, _)| *k != stream)
        .map(|(k, t)| (k.clone(), t.clone()))
        .collect();
    Demonstration::new(demo.id(), streams).unwrap()
}

fn c5_multimodal() -> Vec<Outcome> {
    let p = default_params();
    let mut bad = Vec::new();
    let mut floor_cases = 0;
    let mut floor_bad = Vec::new();
    for seed in 0..20u64 {
        let (demo, events) = synthetic::multimodal_demo(seed);
        let seg = segment_demonstration(&demo, &p, seed).unwrap();
        let cuts = &seg.keypoints.indices;
        let ok = seg.segments.len() == 4 && cuts.iter().zip(events).all(|(c, e)| c.abs_diff(e) <= p.window);
        if !ok {
            bad.push((seed, cuts.clone(), events));
        }
        let names: Vec<String> = demo.stream_names().map(str::to_owned).collect();
        for name in &names {
            let silent = flattened(&demo, name);
            let rest = without(&demo, name);
            let with_silent = segment_demonstration(&silent, &p, seed).unwrap().keypoints.indices;
            let others = segment_demonstration(&rest, &p, seed).unwrap().keypoints.indices;
            floor_cases += 1;
            if others.iter().any(|k| !with_silent.contains(k)) {
                floor_bad.push((seed, name.clone()));
            }
        }
    }
    vec![
        outcome(
            "5a",
            bad.is_empty(),
            format!(
                "four-stream demo: exactly 4 segments with cuts within ±16 in {}/20 seeds {bad:?}",
                20 - bad.len()
            ),
        ),
        outcome(
            "5b",
            floor_bad.is_empty(),
            format!(
                "silent stream never suppresses keypoints of the others: {}/{floor_cases} cases {floor_bad:?}",
                floor_cases - floor_bad.len()
            ),
        ),
    ]
}

fn c6_families() -> Vec<Outcome> {
    let overlap = 0.2;
    let lambda = 0.1;
    let mut rates = Vec::new();
    let mut ns = Vec::new();
    for seed in 0..10u64 {
        let fam = synthetic::trajectory_families(50, overlap, seed);
        // sparse labels: every fifth primitive per family
        let labelled: Vec<(&str, &Trajectory, &str)> = fam
            .iter()
            .enumerate()
            .filter(|(i, _)| (i % 50) % 5 == 0)
            .map(|(_, f)| (f.id.as_str(), &f.traj, f.label.as_str()))
            .collect();
        let reps = RepresentativeSet::from_labeled(labelled, DEFAULT_RESAMPLE_LEN).unwrap();
        let prims: Vec<(String, Trajectory)> = fam.iter().map(|f| (f.id.clone(), f.traj.clone())).collect();
        let (features, _) = featurize_all(&prims, &reps).unwrap();
        let fit = fit_auto(
            &features,
            scaled_lambda(lambda, &features),
            seed,
            AutoOptions::default(),
        )
        .unwrap();
        ns.push(fit.model.n_clusters());
        let mut per: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
        for (a, f) in fit.model.assignment.iter().zip(&fam) {
            *per.entry(*a).or_default().entry(f.label.as_str()).or_default() += 1;
        }
        let majority: usize = per.values().map(|m| m.values().max().unwrap()).sum();
        rates.push(1.0 - majority as f64 / fam.len() as f64);
    }
    let passing = rates.iter().filter(|&&r| r <= 0.15).count();
    let shown: Vec<String> = rates.iter().map(|r| format!("{:.1}%", 100.0 * r)).collect();
    vec![outcome(
        "6",
        passing == 10,
        format!(
            "150 family primitives (overlap {overlap}, scaled lambda {lambda}): misclustering <= 15% in {passing}/10 seeds {shown:?}, N {ns:?}"
        ),
    )]
}

fn random_traj(rng: &mut ChaCha8Rng) -> Trajectory {
    let len = rng.random_range(5..=80);
    let dim = rng.random_range(1..=3);
    let mut rows = vec![vec![0.0; dim]];
    for i in 1..len {
        let prev = rows[i - 1].clone();
        rows.push(prev.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect());
    }
    Trajectory::from_rows(&rows, 0.01).unwrap()
}

fn c7_lte() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut worst_identity = 0.0f64;
    for _ in 0..50 {
        let t = random_traj(&mut rng);
        let c = [
            Constraint::new(0, t.row(0).to_vec()),
            Constraint::new(-1, t.row(t.len() - 1).to_vec()),
        ];
        let r = edit(&t, &c).unwrap();
        for (a, b) in r.edited.samples().iter().zip(t.samples()) {
            worst_identity = worst_identity.max((a - b).abs());
        }
    }

    let line: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let t = Trajectory::from_series(&line).unwrap();
    let r = edit(&t, &[Constraint::new(0, vec![0.0]), Constraint::new(-1, vec![20.0])]).unwrap();
    let doubling = r
        .edited
        .column(0)
        .iter()
        .zip(&line)
        .fold(0.0f64, |m, (a, b)| m.max((a - 2.0 * b).abs()));

    let mut monotone = 0;
    for _ in 0..50 {
        let t = random_traj(&mut rng);
        let dim = t.dim();
        let target = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect() };
        let targets = [target(&mut rng), target(&mut rng), target(&mut rng)];
        let mid = (t.len() / 2) as isize;
        let residuals: Vec<f64> = [1e1, 1e2, 1e3, 1e4]
            .iter()
            .map(|&w| {
                let c = [
                    Constraint::new(0, targets[0].clone()).with_weight(w),
                    Constraint::new(mid, targets[1].clone()).with_weight(w),
                    Constraint::new(-1, targets[2].clone()).with_weight(w),
                ];
                edit(&t, &c).unwrap().constraint_residual
            })
            .collect();
        if residuals.windows(2).all(|p| p[1] < p[0]) {
            monotone += 1;
        }
    }
    vec![
        outcome(
            "7a",
            worst_identity <= 1e-8,
            format!("identity edit: max deviation {worst_identity:.2e} over 50 instances"),
        ),
        outcome(
            "7b",
            doubling <= 1e-6,
            format!("endpoint-doubling of a line (T=11): max deviation from doubled line {doubling:.3e}"),
        ),
        outcome(
            "7c",
            monotone == 50,
            format!("residual strictly decreasing in weight: {monotone}/50 instances"),
        ),
    ]
}

// ---- criterion 8: CLI determinism ----

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_primlib")
}

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("PRIMLIB_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn pipeline(dir: &Path, threads: &str) -> Result<(), String> {
    let t = ["--threads", threads];
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "r-shape", "--out", "r.csv"],
        vec!["synth", "multimodal", "--seed", "5", "--out", "demo"],
        vec!["synth", "random", "--seed", "5", "--out", "random"],
        vec![
            "synth",
            "blobs",
            "--seed",
            "5",
            "--out",
            "blobs.csv",
            "--labels",
            "blob_labels.csv",
        ],
        vec![
            "synth",
            "families",
            "--seed",
            "5",
            "--per-family",
            "20",
            "--library",
            "fam",
            "--labels",
            "fam_labels.csv",
        ],
        vec!["segment", "r.csv", "--out", "rseg", "--plot", "rseg.svg"],
        vec![
            "segment",
            "demo",
            "--out",
            "seg",
            "--seed",
            "5",
            "--plot",
            "seg.svg",
            "--library",
            "lib",
        ],
        vec![
            "segment",
            "demo",
            "--out",
            "seg_sampled",
            "--mode",
            "sampled",
            "--seed",
            "5",
        ],
        vec!["library", "add", "lib", "random", "--label", "misc"],
        vec!["library", "label", "lib", "demo5/seg1", "press"],
        vec!["featurize", "--library", "fam", "--out", "feat", "--store"],
        vec![
            "cluster",
            "--features",
            "feat/features.csv",
            "--lambda",
            "0.1",
            "--lambda-scale",
            "variance",
            "--auto",
            "--seed",
            "5",
            "--out",
            "cl/clusters.json",
            "--labels",
            "fam_labels.csv",
        ],
        vec![
            "cluster",
            "--features",
            "blobs.csv",
            "--lambda",
            "0",
            "--n",
            "3",
            "--kmeans-oracle",
            "--seed",
            "5",
            "--out",
            "km/clusters.json",
        ],
        vec!["library", "assign", "fam", "--clusters", "cl/clusters.json"],
        vec![
            "select",
            "--library",
            "fam",
            "--cluster",
            "0",
            "--constraints",
            "cons.json",
            "--top-k",
            "4",
            "--seed",
            "5",
            "--out",
            "sel",
        ],
    ];
    fs::write(
        dir.join("cons.json"),
        r#"[{"index": 0, "target": [0.0, 0.0]}, {"index": -1, "target": [1.0, 0.4]}]"#,
    )
    .map_err(|e| e.to_string())?;
    for s in steps {
        let args: Vec<&str> = t.iter().copied().chain(s).collect();
        run(dir, &args)?;
    }
    Ok(())
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c8_determinism() -> Vec<Outcome> {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if let Err(e) = pipeline(a.path(), "1").and_then(|_| pipeline(b.path(), "4")) {
        return vec![outcome("8", false, format!("CLI determinism: pipeline failed: {e}"))];
    }
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    let differing: Vec<_> = ta
        .iter()
        .filter(|(k, v)| tb.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .chain(
            tb.keys()
                .filter(|k| !ta.contains_key(*k))
                .map(|k| k.display().to_string()),
        )
        .collect();
    vec![outcome(
        "8",
        differing.is_empty() && !ta.is_empty(),
        format!(
            "CLI determinism: {} artifacts from every subcommand, byte-identical across two runs (1 vs 4 threads); differing {differing:?}",
            ta.len()
        ),
    )]
}

fn c9_reconstruction() -> Vec<Outcome> {
    let p = SegmentationParams::new(8, 24, 0.16).unwrap();
    let mut exact = 0;
    let mut with_cuts = 0;
    for seed in 0..100u64 {
        let demo = synthetic::random_demo(seed);
        let seg = segment_demonstration(&demo, &p, seed).unwrap();
        if seg.segments.len() > 1 {
            with_cuts += 1;
        }
        let ok = demo.streams().iter().all(|(name, t)| {
            let mut samples: Vec<f64> = Vec::new();
            for (i, s) in seg.segments.iter().enumerate() {
                let part = s.stream(name).unwrap();
                let skip = if i == 0 { 0 } else { part.dim() };
                samples.extend_from_slice(&part.samples()[skip..]);
            }
            samples.len() == t.samples().len()
                && samples.iter().zip(t.samples()).all(|(a, b)| a.to_bits() == b.to_bits())
        });
        if ok {
            exact += 1;
        }
    }
    vec![outcome(
        "9",
        exact == 100,
        format!("segment reconstruction: {exact}/100 demos bit-exact ({with_cuts} had at least one cut)"),
    )]
}

fn main() {
    let criteria: [fn() -> Vec<Outcome>; 9] = [
        c1_kmeans_oracle,
        c2_m_step_optimality,
        c3_auto_n,
        c4_r_shape,
        c5_multimodal,
        c6_families,
        c7_lte,
        c8_determinism,
        c9_reconstruction,
    ];
    let mut unexpected = Vec::new();
    for c in criteria {
        for o in c() {
            let known = KNOWN_UNATTAINABLE.contains(&o.id);
            let tag = match (o.pass, known) {
                (true, false) => "PASS",
                (false, false) => "FAIL",
                (false, true) => "FAIL (known, see README)",
                (true, true) => "PASS (listed as unattainable)",
            };
            println!("{tag:<26} {:<3} {}", o.id, o.detail);
            if o.pass == known {
                unexpected.push(o.id);
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected");
    } else {
        println!("acceptance: unexpected results for {unexpected:?}");
        std::process::exit(1);
    }
}
