//! Component extraction checked against an independent recursive
//! flood-fill oracle, plus grid-localization partition properties.

use std::collections::BTreeSet;

use changekit::mask::{
    component_pixel_sets, connected_components, count_changes, count_changes_with,
    localize_changes, region_of, ChangeCategory, Connectivity, GridRegion, LabelMask,
};
use changekit_testkit::masks::{centroid_oracle, flood_fill_components, random_mask, seeded_rng};
use proptest::prelude::*;

fn as_partition(components: &[Vec<(u32, u32)>]) -> BTreeSet<Vec<(u32, u32)>> {
    components.iter().cloned().collect()
}

#[test]
fn component_partition_matches_flood_fill_on_random_masks() {
    let mut rng = seeded_rng(0x5eed);
    for case in 0..200 {
        let mask = random_mask(&mut rng, 32, 32, 0.35);
        for category in ChangeCategory::ALL {
            for connectivity in [Connectivity::Four, Connectivity::Eight] {
                let ours = component_pixel_sets(&mask, category, connectivity);
                let oracle = flood_fill_components(&mask, category, connectivity);
                assert_eq!(
                    as_partition(&ours),
                    as_partition(&oracle),
                    "partition mismatch in case {case} ({category:?}, {connectivity:?})"
                );
                assert_eq!(ours.len(), oracle.len());
                assert_eq!(
                    count_changes_with(&mask, category, connectivity, 1),
                    oracle.len()
                );
            }
        }
    }
}

#[test]
fn instances_agree_with_oracle_pixel_sets() {
    let mut rng = seeded_rng(0xfeed);
    for _ in 0..50 {
        let mask = random_mask(&mut rng, 24, 24, 0.3);
        for category in ChangeCategory::ALL {
            let instances = connected_components(&mask, category, Connectivity::Eight);
            let sets = component_pixel_sets(&mask, category, Connectivity::Eight);
            assert_eq!(instances.len(), sets.len());
            for (instance, pixels) in instances.iter().zip(&sets) {
                assert_eq!(instance.pixel_count, pixels.len());
                let (cx, cy) = centroid_oracle(pixels);
                assert!((instance.centroid.0 - cx).abs() < 1e-12);
                assert!((instance.centroid.1 - cy).abs() < 1e-12);
                assert!(instance.bbox.contains(instance.centroid.0, instance.centroid.1));
                for &(x, y) in pixels {
                    assert!(x >= instance.bbox.x_min && x <= instance.bbox.x_max);
                    assert!(y >= instance.bbox.y_min && y <= instance.bbox.y_max);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn four_connectivity_never_has_fewer_components(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed);
        let mask = random_mask(&mut rng, 16, 16, 0.4);
        for category in ChangeCategory::ALL {
            let four = count_changes_with(&mask, category, Connectivity::Four, 1);
            let eight = count_changes_with(&mask, category, Connectivity::Eight, 1);
            prop_assert!(four >= eight);
        }
    }

    #[test]
    fn count_equals_component_list_length(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed);
        let mask = random_mask(&mut rng, 16, 16, 0.3);
        for category in ChangeCategory::ALL {
            prop_assert_eq!(
                count_changes(&mask, category),
                connected_components(&mask, category, Connectivity::Eight).len()
            );
        }
    }

    #[test]
    fn every_in_bounds_point_maps_to_exactly_one_region(
        x in 0.0f64..64.0,
        y in 0.0f64..64.0,
    ) {
        let region = region_of(x, y, 64, 64).unwrap();
        prop_assert!(GridRegion::ALL.contains(&region));
    }

    #[test]
    fn localization_is_sorted_and_duplicate_free(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed);
        let mask = random_mask(&mut rng, 16, 16, 0.3);
        for category in ChangeCategory::ALL {
            let regions = localize_changes(&mask, category);
            let mut sorted = regions.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(regions, sorted);
        }
    }
}

#[test]
fn region_preimages_have_equal_area_when_divisible() {
    // 12x9: each cell must cover (12/3) * (9/3) = 12 pixels.
    let mut hits = [0usize; 9];
    for y in 0..9 {
        for x in 0..12 {
            let region = region_of(x as f64, y as f64, 12, 9).unwrap();
            hits[region.canonical_index()] += 1;
        }
    }
    assert_eq!(hits, [12; 9]);
}

#[test]
fn partition_union_covers_category_pixels_exactly() {
    let mut rng = seeded_rng(77);
    let mask = random_mask(&mut rng, 20, 20, 0.4);
    for category in ChangeCategory::ALL {
        let sets = component_pixel_sets(&mask, category, Connectivity::Eight);
        let mut union = BTreeSet::new();
        for set in &sets {
            for &pixel in set {
                assert!(union.insert(pixel), "pixel sets overlap at {pixel:?}");
            }
        }
        let expected: BTreeSet<(u32, u32)> = (0..20u32)
            .flat_map(|y| (0..20u32).map(move |x| (x, y)))
            .filter(|&(x, y)| mask.label(x, y) == category.code())
            .collect();
        assert_eq!(union, expected);
    }
}

#[test]
fn nested_background_does_not_split_a_component() {
    // A ring of buildings around background is still one component.
    let mut mask = LabelMask::new(16, 16).unwrap();
    mask.fill_rect(4, 4, 10, 10, 2).unwrap();
    mask.set(7, 7, 0).unwrap();
    assert_eq!(count_changes(&mask, ChangeCategory::Building), 1);
}
