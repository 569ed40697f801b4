//! Dual-granularity prompt assembly: coarse scene caption plus
//! fine-grained change cues, merged with the user query and any prior
//! conversation turns.
//!
//! The layout is a fixed contract:
//!
//! ```text
//! User: ...            (history turns, oldest first, if any)
//! Assistant: ...
//! <image> <image>      (only when there is no history)
//! Scene summary: ...
//! Change details: ...
//! Question: ...
//! ```
//!
//! The two image placeholders belong to a conversation's first turn, so a
//! prompt carrying history adds none of its own.

use crate::builder::{Role, Turn};
use crate::error::{Error, Result};
use crate::mask::{
    count_changes_with, localize_changes_with, ChangeCategory, Connectivity, GridRegion, LabelMask,
};
use crate::templates::IMAGE_PLACEHOLDER;

/// Counts and grid locations of changed roads and buildings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FineCues {
    pub road_count: usize,
    pub building_count: usize,
    pub road_regions: Vec<GridRegion>,
    pub building_regions: Vec<GridRegion>,
}

impl FineCues {
    /// Derive cues from a mask with the given analysis settings.
    pub fn from_mask(mask: &LabelMask, connectivity: Connectivity, min_area: usize) -> FineCues {
        FineCues {
            road_count: count_changes_with(mask, ChangeCategory::Road, connectivity, min_area),
            building_count: count_changes_with(
                mask,
                ChangeCategory::Building,
                connectivity,
                min_area,
            ),
            road_regions: localize_changes_with(mask, ChangeCategory::Road, connectivity, min_area),
            building_regions: localize_changes_with(
                mask,
                ChangeCategory::Building,
                connectivity,
                min_area,
            ),
        }
    }

    /// A zero count must come with an empty region list and vice versa.
    pub fn validate(&self) -> Result<()> {
        for (count, regions, what) in [
            (self.road_count, &self.road_regions, "road"),
            (self.building_count, &self.building_regions, "building"),
        ] {
            if (count == 0) != regions.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "{what} cues are inconsistent: count {count} with {} regions",
                    regions.len()
                )));
            }
        }
        Ok(())
    }
}

/// A composed prompt and the number of image placeholders it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedPrompt {
    pub text: String,
    pub placeholder_count: usize,
}

fn category_sentence(category: ChangeCategory, count: usize, regions: &[GridRegion]) -> String {
    if count == 0 {
        format!("No changed {} detected.", category.noun_plural())
    } else {
        format!(
            "Changed {}: {count}, located at: {}.",
            category.noun_plural(),
            GridRegion::join(regions)
        )
    }
}

/// Render the cues as two deterministic sentences, roads first. The
/// sentences survive a round trip through the answer parsers: the count is
/// the first numeral and the regions are the listed names ("No changed ..."
/// reads back as zero and the empty set).
pub fn render_fine_cues(cues: &FineCues) -> String {
    let road = category_sentence(ChangeCategory::Road, cues.road_count, &cues.road_regions);
    let building = category_sentence(
        ChangeCategory::Building,
        cues.building_count,
        &cues.building_regions,
    );
    format!("{road} {building}")
}

/// Per-category cue sentence, for callers scoring one category at a time.
pub fn render_category_cue(cues: &FineCues, category: ChangeCategory) -> String {
    match category {
        ChangeCategory::Road => category_sentence(category, cues.road_count, &cues.road_regions),
        ChangeCategory::Building => {
            category_sentence(category, cues.building_count, &cues.building_regions)
        }
    }
}

/// Assemble the final prompt: history (verbatim, oldest first), image
/// placeholders when this is the first turn, the auxiliary block (scene
/// summary then change details), then the user query.
pub fn compose(
    coarse_caption: &str,
    cues: &FineCues,
    user_query: &str,
    history: &[Turn],
) -> Result<ComposedPrompt> {
    if user_query.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut text = String::new();
    for turn in history {
        let label = match turn.role {
            Role::User => "User",
            Role::Assistant => "Assistant",
        };
        text.push_str(label);
        text.push_str(": ");
        text.push_str(&turn.content);
        text.push('\n');
    }
    if history.is_empty() {
        text.push_str(IMAGE_PLACEHOLDER);
        text.push(' ');
        text.push_str(IMAGE_PLACEHOLDER);
        text.push('\n');
    }
    text.push_str("Scene summary: ");
    text.push_str(coarse_caption);
    text.push('\n');
    text.push_str("Change details: ");
    text.push_str(&render_fine_cues(cues));
    text.push('\n');
    text.push_str("Question: ");
    text.push_str(user_query);

    let placeholder_count = text.matches(IMAGE_PLACEHOLDER).count();
    Ok(ComposedPrompt {
        text,
        placeholder_count,
    })
}
