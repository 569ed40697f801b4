//! End-to-end builder properties: record multiplicities, byte-level
//! determinism, and the round trip from generated answers back to
//! mask-derived ground truth.

use changekit::answer::{parse_count, parse_regions, parse_yes_no};
use changekit::builder::{build_dataset, BuildConfig, Task};
use changekit::io::jsonl_bytes;
use changekit::mask::{count_changes_with, localize_changes_with, ChangeCategory};
use changekit::templates::TemplateBank;
use changekit_testkit::corpus::synth_corpus;
use proptest::prelude::*;

#[test]
fn record_totals_follow_the_per_pair_multiplicities() {
    let bank = TemplateBank::builtin();
    let config = BuildConfig::default();
    for (total, changed) in [(10usize, 4usize), (25, 25), (13, 0)] {
        let corpus = synth_corpus(3, total, changed);
        let (records, stats) = build_dataset(&corpus, &bank, &config).unwrap();
        let unchanged = total - changed;
        assert_eq!(stats.caption, 5 * changed + unchanged);
        assert_eq!(stats.binary, total);
        assert_eq!(stats.count, 2 * total);
        assert_eq!(stats.localization, 2 * total);
        assert_eq!(stats.dialogue, 3 * total);
        assert_eq!(stats.total, records.len());
        assert_eq!(
            stats.total,
            5 * changed + unchanged + total + 2 * total + 2 * total + 3 * total
        );
    }
}

#[test]
fn builds_are_byte_identical_for_the_same_inputs() {
    let bank = TemplateBank::builtin();
    let config = BuildConfig {
        seed: 99,
        ..BuildConfig::default()
    };
    let corpus = synth_corpus(12, 20, 11);
    let (a, _) = build_dataset(&corpus, &bank, &config).unwrap();
    let (b, _) = build_dataset(&corpus, &bank, &config).unwrap();
    assert_eq!(jsonl_bytes(&a), jsonl_bytes(&b));

    let other_seed = BuildConfig {
        seed: 100,
        ..BuildConfig::default()
    };
    let (c, _) = build_dataset(&corpus, &bank, &other_seed).unwrap();
    assert_ne!(jsonl_bytes(&a), jsonl_bytes(&c));
}

#[test]
fn answers_parse_back_to_mask_derived_ground_truth() {
    let bank = TemplateBank::builtin();
    let config = BuildConfig::default();
    let corpus = synth_corpus(7, 60, 31);
    let (records, _) = build_dataset(&corpus, &bank, &config).unwrap();

    for record in &records {
        let pair = corpus
            .iter()
            .find(|p| p.pair_id == record.pair_id)
            .expect("record references a corpus pair");
        match record.task {
            Task::Binary => {
                assert_eq!(parse_yes_no(record.last_answer()).yes_no(), Some(pair.changed));
            }
            Task::Count => {
                let category = record.category.unwrap();
                let expected =
                    count_changes_with(&pair.mask, category, config.connectivity, config.min_area);
                let parsed = parse_count(record.last_answer());
                assert!(!parsed.is_unparseable());
                assert_eq!(parsed.count() as usize, expected);
            }
            Task::Localization => {
                let category = record.category.unwrap();
                let expected = localize_changes_with(
                    &pair.mask,
                    category,
                    config.connectivity,
                    config.min_area,
                );
                assert_eq!(parse_regions(record.last_answer()).regions(), expected.as_slice());
            }
            Task::Dialogue => {
                // Turn answers: binary, caption, count, localization.
                assert_eq!(parse_yes_no(&record.turns[1].content).yes_no(), Some(pair.changed));
                let count_cat = match record.meta["count_category"].as_str() {
                    "road" => ChangeCategory::Road,
                    _ => ChangeCategory::Building,
                };
                let loc_cat = match record.meta["localization_category"].as_str() {
                    "road" => ChangeCategory::Road,
                    _ => ChangeCategory::Building,
                };
                let expected_count =
                    count_changes_with(&pair.mask, count_cat, config.connectivity, config.min_area);
                assert_eq!(
                    parse_count(&record.turns[5].content).count() as usize,
                    expected_count
                );
                let expected_regions = localize_changes_with(
                    &pair.mask,
                    loc_cat,
                    config.connectivity,
                    config.min_area,
                );
                assert_eq!(
                    parse_regions(&record.turns[7].content).regions(),
                    expected_regions.as_slice()
                );
            }
            Task::Caption => {}
        }
    }
}

#[test]
fn every_record_keeps_placeholders_in_the_first_turn_only() {
    let bank = TemplateBank::builtin();
    let (records, _) = build_dataset(&synth_corpus(5, 16, 9), &bank, &BuildConfig::default())
        .unwrap();
    for record in &records {
        record.validate().unwrap();
        assert_eq!(record.turns[0].content.matches("<image>").count(), 2);
        for turn in &record.turns[1..] {
            assert_eq!(turn.content.matches("<image>").count(), 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn count_formula_holds_for_arbitrary_corpora(
        total in 1usize..30,
        changed_frac in 0.0f64..=1.0,
        seed in 0u64..1000,
    ) {
        let changed = ((total as f64) * changed_frac) as usize;
        let corpus = synth_corpus(seed, total, changed.min(total));
        let bank = TemplateBank::builtin();
        let (records, stats) = build_dataset(&corpus, &bank, &BuildConfig::default()).unwrap();
        let n = total;
        let n_c = changed.min(total);
        prop_assert_eq!(records.len(), 5 * n_c + (n - n_c) + n + 2 * n + 2 * n + 3 * n);
        prop_assert_eq!(stats.total, records.len());
        // Record ids are unique.
        let ids: std::collections::BTreeSet<&str> =
            records.iter().map(|r| r.record_id.as_str()).collect();
        prop_assert_eq!(ids.len(), records.len());
    }
}
