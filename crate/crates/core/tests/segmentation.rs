use primlib::segmenter::{detect_changepoints, extract_keypoints, fuse, to_probabilistic};
use primlib::{segment_demonstration, synthetic, Demonstration, ExtractionMode, SegmentationParams};
use proptest::prelude::*;

fn params() -> SegmentationParams {
    SegmentationParams::new(8, 24, 0.16).unwrap()
}

fn scale_dim(demo: &Demonstration, stream: usize, dim: usize, c: f64) -> Demonstration {
    let streams: Vec<_> = demo
        .streams()
        .iter()
        .enumerate()
        .map(|(k, (name, t))| {
            let t = if k == stream {
                t.map_rows(|src, dst| {
                    dst.copy_from_slice(src);
                    dst[dim] *= c;
                })
            } else {
                t.clone()
            };
            (name.clone(), t)
        })
        .collect();
    Demonstration::new(demo.id(), streams).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn keypoints_respect_spacing(seed in 0u64..10_000, sampled in any::<bool>()) {
        let demo = synthetic::random_demo(seed);
        let mut p = params();
        if sampled {
            p.mode = ExtractionMode::Sampled;
        }
        let seg = segment_demonstration(&demo, &p, seed).unwrap();
        let mut prev = 0;
        for &k in &seg.keypoints.indices {
            prop_assert!(k - prev >= p.min_segment);
            prev = k;
        }
        prop_assert!(demo.len() - 1 - prev >= p.min_segment || seg.keypoints.indices.is_empty());
    }

    #[test]
    fn extraction_is_reproducible(seed in 0u64..10_000, sampled in any::<bool>()) {
        let demo = synthetic::random_demo(seed);
        let mut p = params();
        if sampled {
            p.mode = ExtractionMode::Sampled;
        }
        let probs: Vec<_> = demo
            .streams()
            .iter()
            .map(|(name, t)| to_probabilistic::<f64>(&detect_changepoints(name, t, &p).unwrap(), &p))
            .collect();
        let density = fuse(&probs, demo.len(), &p).unwrap();
        let a = extract_keypoints(&density, &p, seed).unwrap();
        let b = extract_keypoints(&density, &p, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn changepoints_ignore_dimension_scale(seed in 0u64..10_000, c in 0.01f64..100.0, pick in 0usize..12) {
        let demo = synthetic::random_demo(seed);
        let stream = pick % demo.streams().len();
        let dim = pick % demo.streams()[stream].dim();
        let scaled = scale_dim(&demo, stream, dim, c);
        let p = params();
        for ((name, a), (_, b)) in demo.streams().iter().zip(scaled.streams()) {
            prop_assert_eq!(
                detect_changepoints(name, a, &p).unwrap().indices,
                detect_changepoints(name, b, &p).unwrap().indices
            );
        }
    }
}
