use primlib::{segment_demonstration, synthetic, Library, PrimitiveRecord, SegmentationParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn segments_survive_a_trip_through_disk(seed in 0u64..10_000) {
        let dir = tempfile::tempdir().unwrap();
        let demo = synthetic::random_demo(seed);
        let p = SegmentationParams::new(8, 24, 0.16).unwrap();
        let seg = segment_demonstration(&demo, &p, seed).unwrap();
        let records: Vec<PrimitiveRecord> = seg
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| PrimitiveRecord::new(s.clone(), demo.id(), i))
            .collect();
        let mut lib = Library::create(dir.path()).unwrap();
        lib.add_primitives(&records).unwrap();
        let reopened = Library::open(dir.path()).unwrap();
        prop_assert!(reopened.manifest().validate().is_ok());
        for r in &records {
            prop_assert_eq!(&reopened.load::<f64>(&r.meta.id).unwrap(), r);
        }
    }
}
