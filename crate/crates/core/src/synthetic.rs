//! Seeded synthetic data: corner polylines, multi-stream demonstrations,
//! Gaussian blobs and labelled trajectory families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::elastic_cluster::FeatureSet;
use crate::error::Result;
use crate::trajectory::{Demonstration, Trajectory};

/// Piecewise-linear path through `waypoints`, reaching waypoint `k` at sample
/// `knots[k]`. `knots` must start at 0 and be strictly increasing.
pub fn polyline(waypoints: &[Vec<f64>], knots: &[usize], dt: f64) -> Result<Trajectory> {
    assert_eq!(waypoints.len(), knots.len());
    assert!(knots.len() >= 2 && knots[0] == 0);
    let dim = waypoints[0].len();
    let len = knots[knots.len() - 1] + 1;
    let mut samples = Vec::with_capacity(len * dim);
    let mut seg = 0;
    for i in 0..len {
        while seg + 2 < knots.len() && i > knots[seg + 1] {
            seg += 1;
        }
        let (a, b) = (knots[seg], knots[seg + 1]);
        let u = (i - a) as f64 / (b - a) as f64;
        for (p, q) in waypoints[seg].iter().zip(&waypoints[seg + 1]) {
            samples.push(p + u * (q - p));
        }
    }
    Trajectory::from_flat(samples, dim, dt)
}

/// Two-corner 2-D stroke of 300 samples: up, across to the right, then
/// diagonally down. Returns the trajectory and its corner indices.
pub fn r_shape() -> (Trajectory, [usize; 2]) {
    let corners = [100, 200];
    let t = polyline(
        &[vec![0.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.7], vec![0.9, 0.0]],
        &[0, corners[0], corners[1], 299],
        0.01,
    )
    .expect("valid polyline");
    (t, corners)
}

/// Four-stream demonstration of 400 samples with three events near 100, 200
/// and 300 (jittered by `seed`). Task-space and joint-proxy streams bend at
/// the events, the force proxy pulses at them and the gripper stays constant.
pub fn multimodal_demo(seed: u64) -> (Demonstration, [usize; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = 400;
    let dt = 0.01;
    let events = [
        100 + rng.random_range(0..=16) - 8,
        200 + rng.random_range(0..=16) - 8,
        300 + rng.random_range(0..=16) - 8,
    ];

    let point =
        |rng: &mut ChaCha8Rng, dim: usize| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let task_pts: Vec<Vec<f64>> = (0..5).map(|_| point(&mut rng, 3)).collect();
    let task = polyline(&task_pts, &[0, events[0], events[1], events[2], len - 1], dt).expect("valid polyline");

    let jitter: Vec<usize> = events.iter().map(|&e| e + rng.random_range(0..=4) - 2).collect();
    let joint_pts: Vec<Vec<f64>> = (0..5).map(|_| point(&mut rng, 4)).collect();
    let joint = polyline(&joint_pts, &[0, jitter[0], jitter[1], jitter[2], len - 1], dt).expect("valid polyline");

    // Triangular contact pulses centred on the events.
    let half = 4usize;
    let mut force = vec![0.0; len];
    for &e in &events {
        let height = rng.random_range(5.0..15.0);
        for k in 0..=half {
            let v = height * (1.0 - k as f64 / half as f64);
            force[e + k] = v;
            force[e - k] = v;
        }
    }
    let force = Trajectory::from_flat(force, 1, dt).expect("finite force");
    let gripper = Trajectory::from_flat(vec![0.04; len], 1, dt).expect("finite gripper");

    let demo = Demonstration::new(
        format!("demo{seed}"),
        [
            ("task".to_string(), task),
            ("joint".to_string(), joint),
            ("force".to_string(), force),
            ("gripper".to_string(), gripper),
        ],
    )
    .expect("streams share a length");
    (demo, events)
}

/// Random demonstration with 1 to 4 streams of mixed width, piecewise-linear
/// content with noise, and 20 to 400 samples.
pub fn random_demo(seed: u64) -> Demonstration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.random_range(20..=400);
    let dt = rng.random_range(0.001..0.1);
    let n_streams = rng.random_range(1..=4);
    let noise = Normal::new(0.0, 1e-3).expect("valid std");
    let streams = (0..n_streams).map(|s| {
        let dim = rng.random_range(1..=3);
        let n_knots = rng.random_range(2..=6).min(len);
        let mut knots: Vec<usize> = (1..len - 1).collect();
        knots.shuffle(&mut rng);
        knots.truncate(n_knots - 2);
        knots.push(0);
        knots.push(len - 1);
        knots.sort_unstable();
        knots.dedup();
        let pts: Vec<Vec<f64>> = knots
            .iter()
            .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let base = polyline(&pts, &knots, dt).expect("valid polyline");
        let noisy = base.map_rows(|row, out| {
            for (o, v) in out.iter_mut().zip(row) {
                *o = v + noise.sample(&mut rng);
            }
        });
        (format!("s{s}"), noisy)
    });
    let streams: Vec<_> = streams.collect();
    Demonstration::new(format!("rand{seed}"), streams).expect("streams share a length")
}

/// Isotropic Gaussian blobs. Ids are `0, 1, ...`; returns generative labels.
pub fn gaussian_blobs(centers: &[Vec<f64>], sigma: f64, counts: &[usize], seed: u64) -> (FeatureSet, Vec<usize>) {
    assert_eq!(centers.len(), counts.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, (c, &n)) in centers.iter().zip(counts).enumerate() {
        for _ in 0..n {
            rows.push(c.iter().map(|&m| m + normal.sample(&mut rng)).collect::<Vec<f64>>());
            labels.push(k);
        }
    }
    (FeatureSet::from_rows(&rows).expect("finite blobs"), labels)
}

/// The three blobs used for automatic cluster-count checks.
pub fn three_blobs(seed: u64) -> (FeatureSet, Vec<usize>) {
    gaussian_blobs(
        &[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, -1.0]],
        0.5,
        &[10, 20, 30],
        seed,
    )
}

pub const FAMILY_LABELS: [&str; 3] = ["reach", "push", "write"];

/// Unit-parameter shape of a family at `u` in [0, 1].
fn family_shape(family: usize, u: f64, p: &[f64; 3]) -> [f64; 2] {
    use std::f64::consts::PI;
    match family {
        // straight reach with a slight sideways bow
        0 => [u, 0.3 * u + p[0] * (PI * u).sin()],
        // press down, then slide forward
        1 => {
            if u < 0.5 {
                [0.1 * u, -2.0 * u]
            } else {
                [0.05 + 1.9 * (u - 0.5), -1.0 + p[0] * (u - 0.5)]
            }
        }
        // cursive wiggle along x
        _ => [u, (0.15 + p[1]) * (2.0 * PI * (2.0 + p[2]) * u).sin()],
    }
}

/// A labelled 2-D primitive.
#[derive(Debug, Clone)]
pub struct FamilySample {
    pub id: String,
    pub label: String,
    pub traj: Trajectory,
}

/// `per_family` primitives from each of three families. Each sample blends
/// its own shape with another family's by a weight drawn from
/// `[0, overlap]`, then gets a random length, scale, offset, small rotation
/// and noise.
pub fn trajectory_families(per_family: usize, overlap: f64, seed: u64) -> Vec<FamilySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.005).expect("valid std");
    let mut out = Vec::with_capacity(3 * per_family);
    for (f, name) in FAMILY_LABELS.iter().enumerate() {
        for k in 0..per_family {
            let other = (f + rng.random_range(1..=2)) % 3;
            let alpha = rng.random_range(0.0..=overlap.max(0.0));
            let p = [
                rng.random_range(-0.15..0.15),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.3..0.3),
            ];
            let len = rng.random_range(60..=120);
            let scale = rng.random_range(0.5..2.0);
            let angle: f64 = rng.random_range(-0.2..0.2);
            let offset = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let (sin, cos) = angle.sin_cos();
            let rows: Vec<[f64; 2]> = (0..len)
                .map(|i| {
                    let u = i as f64 / (len - 1) as f64;
                    let a = family_shape(f, u, &p);
                    let b = family_shape(other, u, &p);
                    let x = (1.0 - alpha) * a[0] + alpha * b[0];
                    let y = (1.0 - alpha) * a[1] + alpha * b[1];
                    [
                        offset[0] + scale * (cos * x - sin * y) + noise.sample(&mut rng),
                        offset[1] + scale * (sin * x + cos * y) + noise.sample(&mut rng),
                    ]
                })
                .collect();
            out.push(FamilySample {
                id: format!("{name}{k:03}"),
                label: name.to_string(),
                traj: Trajectory::from_rows(&rows, 0.01).expect("finite samples"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_hits_waypoints() {
        let t = polyline(&[vec![0.0], vec![2.0], vec![0.0]], &[0, 4, 6], 1.0).unwrap();
        assert_eq!(t.column(0), [0.0, 0.5, 1.0, 1.5, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn r_shape_corners() {
        let (t, c) = r_shape();
        assert_eq!(t.len(), 300);
        assert_eq!(t.row(c[0]), [0.0, 1.0]);
        assert_eq!(t.row(c[1]), [0.6, 0.7]);
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(multimodal_demo(3).0, multimodal_demo(3).0);
        assert_ne!(multimodal_demo(3).0, multimodal_demo(4).0);
        assert_eq!(random_demo(9), random_demo(9));
        assert_eq!(three_blobs(1).0, three_blobs(1).0);
        let f = trajectory_families(5, 0.2, 1);
        assert_eq!(f.len(), 15);
        assert_eq!(f[0].traj, trajectory_families(5, 0.2, 1)[0].traj);
    }

    #[test]
    fn multimodal_layout() {
        let (d, ev) = multimodal_demo(0);
        assert_eq!(d.len(), 400);
        assert_eq!(d.streams().len(), 4);
        assert!(ev.iter().zip([100, 200, 300]).all(|(e, c)| e.abs_diff(c) <= 8));
    }

    #[test]
    fn blob_counts() {
        let (fs, labels) = three_blobs(0);
        assert_eq!(fs.len(), 60);
        assert_eq!(labels.iter().filter(|&&l| l == 2).count(), 30);
    }
}
