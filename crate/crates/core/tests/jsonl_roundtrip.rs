//! Serialization round trips over generated datasets and masks.

use changekit::builder::{build_dataset, BuildConfig};
use changekit::io::{jsonl_bytes, load_mask, read_jsonl, save_mask, write_jsonl};
use changekit::templates::TemplateBank;
use changekit_testkit::corpus::synth_corpus;
use changekit_testkit::masks::{random_mask, seeded_rng};
use proptest::prelude::*;

#[test]
fn dataset_jsonl_round_trip_is_byte_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.jsonl");
    let (records, _) = build_dataset(
        &synth_corpus(21, 12, 7),
        &TemplateBank::builtin(),
        &BuildConfig::default(),
    )
    .unwrap();

    write_jsonl(&records, &path).unwrap();
    let first_bytes = std::fs::read(&path).unwrap();
    let reread = read_jsonl(&path).unwrap();
    assert_eq!(reread, records);
    assert_eq!(jsonl_bytes(&reread), first_bytes);

    // Writing the reread records again changes nothing.
    let path2 = dir.path().join("dataset2.jsonl");
    write_jsonl(&reread, &path2).unwrap();
    assert_eq!(std::fs::read(&path2).unwrap(), first_bytes);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn mask_png_round_trip_preserves_labels(seed in 0u64..10_000, w in 1u32..40, h in 1u32..40) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mut rng = seeded_rng(seed);
        let mask = random_mask(&mut rng, w, h, 0.4);
        save_mask(&mask, &path).unwrap();
        prop_assert_eq!(load_mask(&path).unwrap(), mask);
    }
}
