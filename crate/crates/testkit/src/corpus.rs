//! Synthetic pair corpora and on-disk fixtures.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use changekit::builder::PairRecord;
use changekit::io::{save_manifest, save_mask, ManifestEntry};
use changekit::mask::LabelMask;

use crate::masks::blob_mask;
use crate::text::random_sentence;

/// One synthetic pair; changed pairs get a blob mask and five captions,
/// unchanged pairs an all-zero mask and an optional negation sentence.
pub fn synth_pair(rng: &mut ChaCha8Rng, pair_id: &str, changed: bool) -> PairRecord {
    let mask = if changed {
        blob_mask(rng, 32, 32)
    } else {
        LabelMask::new(32, 32).expect("positive dims")
    };
    let captions = if changed {
        (0..5)
            .map(|_| {
                let len = rng.gen_range(5..=9);
                random_sentence(rng, len)
            })
            .collect()
    } else if rng.gen_bool(0.5) {
        vec!["the scene is the same as before.".to_string()]
    } else {
        Vec::new()
    };
    PairRecord {
        pair_id: pair_id.to_string(),
        image_before: format!("images/{pair_id}_t0.png"),
        image_after: format!("images/{pair_id}_t1.png"),
        captions,
        changed,
        mask,
        split: None,
    }
}

/// Deterministic corpus of `total` pairs, the first `changed` of them
/// changed (ids keep everything sorted).
pub fn synth_corpus(seed: u64, total: usize, changed: usize) -> Vec<PairRecord> {
    let mut rng = crate::masks::seeded_rng(seed);
    (0..total)
        .map(|i| synth_pair(&mut rng, &format!("pair_{i:06}"), i < changed))
        .collect()
}

/// Write a loadable manifest fixture: a pool of shared mask PNGs, dummy
/// image files, and the manifest JSON itself. Returns the manifest path.
pub fn write_manifest_fixture(
    dir: &Path,
    seed: u64,
    total: usize,
    changed: usize,
) -> std::path::PathBuf {
    let mut rng = crate::masks::seeded_rng(seed);

    // Small pools keep the fixture cheap at large pair counts.
    let pool = 8usize;
    let mut mask_names = Vec::new();
    for i in 0..pool {
        let name = format!("mask_changed_{i}.png");
        save_mask(&blob_mask(&mut rng, 32, 32), &dir.join(&name)).expect("write mask");
        mask_names.push(name);
    }
    save_mask(&LabelMask::new(32, 32).expect("positive dims"), &dir.join("mask_zero.png"))
        .expect("write mask");
    std::fs::write(dir.join("before.png"), b"placeholder").expect("write image");
    std::fs::write(dir.join("after.png"), b"placeholder").expect("write image");

    let entries: Vec<ManifestEntry> = (0..total)
        .map(|i| {
            let is_changed = i < changed;
            ManifestEntry {
                pair_id: format!("pair_{i:06}"),
                image_before: "before.png".into(),
                image_after: "after.png".into(),
                mask: if is_changed {
                    mask_names[i % pool].clone()
                } else {
                    "mask_zero.png".into()
                },
                changed: is_changed,
                captions: if is_changed {
                    (0..5)
                        .map(|_| {
                            let len = rng.gen_range(5..=9);
                            random_sentence(&mut rng, len)
                        })
                        .collect()
                } else {
                    Vec::new()
                },
                split: None,
            }
        })
        .collect();

    let manifest_path = dir.join("manifest.json");
    save_manifest(&entries, &manifest_path).expect("write manifest");
    manifest_path
}
