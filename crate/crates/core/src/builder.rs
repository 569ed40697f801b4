//! Generation of the five instruction-record families from pair records.
//!
//! Per pair the builders emit: five caption records when the pair changed
//! (one per reference caption) or a single negation record otherwise, one
//! yes/no record, one counting record per category, one localization record
//! per category, and `dialogues_per_pair` four-turn dialogues. Responses are
//! derived from the pair's mask via the mask analytics, so every generated
//! answer parses back to its ground truth.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{
    count_changes_with, localize_changes_with, ChangeCategory, Connectivity, GridRegion, LabelMask,
};
use crate::templates::{TemplateBank, TemplateFamily};

/// Default response for unchanged pairs without their own negation caption.
pub const DEFAULT_NEGATION_CAPTION: &str = "the scene is the same as before.";

/// One bi-temporal pair with its annotations.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub pair_id: String,
    pub image_before: String,
    pub image_after: String,
    /// Exactly five reference sentences when `changed`; unchanged pairs may
    /// carry negation sentences or none.
    pub captions: Vec<String>,
    pub changed: bool,
    pub mask: LabelMask,
    pub split: Option<String>,
}

impl PairRecord {
    pub fn validate(&self) -> Result<()> {
        if self.changed && self.captions.len() != 5 {
            return Err(Error::CaptionCountMismatch {
                pair_id: self.pair_id.clone(),
                found: self.captions.len(),
            });
        }
        if !self.changed && !self.mask.is_unchanged() {
            return Err(Error::UnchangedPairWithChanges {
                pair_id: self.pair_id.clone(),
            });
        }
        Ok(())
    }

    /// Negation sentence used for this pair's "no change" answers.
    fn negation_caption<'a>(&'a self, config: &'a BuildConfig) -> &'a str {
        self.captions
            .first()
            .map(String::as_str)
            .filter(|c| !c.is_empty())
            .unwrap_or(&config.negation_caption)
    }
}

/// The five task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Caption,
    Binary,
    Count,
    Localization,
    Dialogue,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Caption,
        Task::Binary,
        Task::Count,
        Task::Localization,
        Task::Dialogue,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Task::Caption => "caption",
            Task::Binary => "binary",
            Task::Count => "count",
            Task::Localization => "localization",
            Task::Dialogue => "dialogue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

/// One conversation turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub content: String,
}

impl Turn {
    pub fn user(content: impl Into<String>) -> Turn {
        Turn {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Turn {
        Turn {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// One instruction-response conversation over an image pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    #[serde(rename = "id")]
    pub record_id: String,
    pub pair_id: String,
    pub task: Task,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<ChangeCategory>,
    /// Before/after image paths, verbatim from the manifest.
    pub images: [String; 2],
    #[serde(rename = "conversations")]
    pub turns: Vec<Turn>,
    /// String-valued provenance: template indices, ground-truth values,
    /// reference captions, split tag.
    pub meta: BTreeMap<String, String>,
}

impl InstructionRecord {
    /// Structural invariants: alternating roles starting with the user, and
    /// exactly two image placeholders confined to the first turn.
    pub fn validate(&self) -> Result<()> {
        if self.turns.is_empty() || !self.turns.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "record '{}' must hold complete user/assistant turn pairs",
                self.record_id
            )));
        }
        for (i, turn) in self.turns.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if turn.role != expected {
                return Err(Error::InvalidConfig(format!(
                    "record '{}' turn {i} has the wrong role",
                    self.record_id
                )));
            }
            let placeholders = turn.content.matches(crate::templates::IMAGE_PLACEHOLDER).count();
            let expected_placeholders = if i == 0 { 2 } else { 0 };
            if placeholders != expected_placeholders {
                return Err(Error::InvalidConfig(format!(
                    "record '{}' turn {i} has {placeholders} image placeholders, expected {expected_placeholders}",
                    self.record_id
                )));
            }
        }
        Ok(())
    }

    /// Content of the final assistant turn.
    pub fn last_answer(&self) -> &str {
        self.turns
            .last()
            .map(|t| t.content.as_str())
            .unwrap_or_default()
    }
}

/// Knobs of the dataset build.
#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub seed: u64,
    pub dialogues_per_pair: usize,
    pub connectivity: Connectivity,
    pub min_area: usize,
    pub negation_caption: String,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            seed: 0,
            dialogues_per_pair: 3,
            connectivity: Connectivity::Eight,
            min_area: 1,
            negation_caption: DEFAULT_NEGATION_CAPTION.to_string(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dialogues_per_pair < 1 {
            return Err(Error::InvalidConfig(
                "dialogues_per_pair must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-task record counts of a built dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub caption: usize,
    pub binary: usize,
    pub count: usize,
    pub localization: usize,
    pub dialogue: usize,
    pub total: usize,
}

impl DatasetStats {
    pub fn add(&mut self, task: Task) {
        match task {
            Task::Caption => self.caption += 1,
            Task::Binary => self.binary += 1,
            Task::Count => self.count += 1,
            Task::Localization => self.localization += 1,
            Task::Dialogue => self.dialogue += 1,
        }
        self.total += 1;
    }

    /// Tally an existing record list.
    pub fn of(records: &[InstructionRecord]) -> DatasetStats {
        let mut stats = DatasetStats::default();
        for record in records {
            stats.add(record.task);
        }
        stats
    }
}

fn base_meta(pair: &PairRecord, template_index: usize) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("template_index".to_string(), template_index.to_string());
    if let Some(split) = &pair.split {
        meta.insert("split".to_string(), split.clone());
    }
    meta
}

fn record(
    pair: &PairRecord,
    task: Task,
    ordinal: usize,
    category: Option<ChangeCategory>,
    turns: Vec<Turn>,
    meta: BTreeMap<String, String>,
) -> InstructionRecord {
    InstructionRecord {
        record_id: format!("{}-{}-{}", pair.pair_id, task.key(), ordinal),
        pair_id: pair.pair_id.clone(),
        task,
        category,
        images: [pair.image_before.clone(), pair.image_after.clone()],
        turns,
        meta,
    }
}

fn ground_truth_binary(pair: &PairRecord) -> &'static str {
    if pair.changed {
        "Yes"
    } else {
        "No"
    }
}

fn ground_truth_count(pair: &PairRecord, category: ChangeCategory, config: &BuildConfig) -> usize {
    count_changes_with(&pair.mask, category, config.connectivity, config.min_area)
}

fn ground_truth_regions(
    pair: &PairRecord,
    category: ChangeCategory,
    config: &BuildConfig,
) -> Vec<GridRegion> {
    localize_changes_with(&pair.mask, category, config.connectivity, config.min_area)
}

/// Caption records: one per reference caption for changed pairs, a single
/// negation record for unchanged pairs.
pub fn build_caption_records(
    pair: &PairRecord,
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<Vec<InstructionRecord>> {
    pair.validate()?;
    let responses: Vec<String> = if pair.changed {
        pair.captions.clone()
    } else {
        vec![pair.negation_caption(config).to_string()]
    };

    let references = responses.clone();
    let mut records = Vec::with_capacity(responses.len());
    for (slot, response) in responses.iter().enumerate() {
        let (index, instruction) =
            bank.render(config.seed, &pair.pair_id, TemplateFamily::Caption, slot, None);
        let mut meta = base_meta(pair, index);
        meta.insert("caption_index".to_string(), slot.to_string());
        for (i, reference) in references.iter().enumerate() {
            meta.insert(format!("ref_{i}"), reference.clone());
        }
        records.push(record(
            pair,
            Task::Caption,
            slot,
            None,
            vec![Turn::user(instruction), Turn::assistant(response.clone())],
            meta,
        ));
    }
    Ok(records)
}

/// Single yes/no record per pair.
pub fn build_binary_record(
    pair: &PairRecord,
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<InstructionRecord> {
    pair.validate()?;
    let (index, instruction) =
        bank.render(config.seed, &pair.pair_id, TemplateFamily::Binary, 0, None);
    let answer = ground_truth_binary(pair);
    let mut meta = base_meta(pair, index);
    meta.insert("gt".to_string(), answer.to_string());
    Ok(record(
        pair,
        Task::Binary,
        0,
        None,
        vec![Turn::user(instruction), Turn::assistant(answer)],
        meta,
    ))
}

/// Two counting records per pair, road then building; answers are bare
/// numerals.
pub fn build_count_records(
    pair: &PairRecord,
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<Vec<InstructionRecord>> {
    pair.validate()?;
    ChangeCategory::ALL
        .iter()
        .enumerate()
        .map(|(slot, &category)| {
            let (index, instruction) = bank.render(
                config.seed,
                &pair.pair_id,
                TemplateFamily::Count,
                slot,
                Some(category),
            );
            let count = ground_truth_count(pair, category, config);
            let mut meta = base_meta(pair, index);
            meta.insert("gt".to_string(), count.to_string());
            Ok(record(
                pair,
                Task::Count,
                slot,
                Some(category),
                vec![Turn::user(instruction), Turn::assistant(count.to_string())],
                meta,
            ))
        })
        .collect()
}

/// Two localization records per pair, road then building; answers are the
/// canonical comma-joined region names or the literal `No change`.
pub fn build_localization_records(
    pair: &PairRecord,
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<Vec<InstructionRecord>> {
    pair.validate()?;
    ChangeCategory::ALL
        .iter()
        .enumerate()
        .map(|(slot, &category)| {
            let (index, instruction) = bank.render(
                config.seed,
                &pair.pair_id,
                TemplateFamily::Localization,
                slot,
                Some(category),
            );
            let regions = ground_truth_regions(pair, category, config);
            let answer = GridRegion::join(&regions);
            let mut meta = base_meta(pair, index);
            meta.insert("gt".to_string(), answer.clone());
            Ok(record(
                pair,
                Task::Localization,
                slot,
                Some(category),
                vec![Turn::user(instruction), Turn::assistant(answer)],
                meta,
            ))
        })
        .collect()
}

/// Category emphasis of the k-th dialogue: which category the counting and
/// localization turns ask about.
fn dialogue_categories(variant: usize) -> (ChangeCategory, ChangeCategory) {
    match variant % 3 {
        0 => (ChangeCategory::Road, ChangeCategory::Road),
        1 => (ChangeCategory::Building, ChangeCategory::Building),
        _ => (ChangeCategory::Road, ChangeCategory::Building),
    }
}

/// Four-turn dialogues: general inquiry, caption, count, localization.
/// The k-th dialogue uses paraphrase slot k and the k-th category emphasis
/// (roads-first, buildings-first, mixed), so dialogues for one pair differ
/// deterministically.
pub fn build_dialogue_records(
    pair: &PairRecord,
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<Vec<InstructionRecord>> {
    pair.validate()?;
    config.validate()?;
    let mut records = Vec::with_capacity(config.dialogues_per_pair);
    for k in 0..config.dialogues_per_pair {
        let (count_cat, loc_cat) = dialogue_categories(k);

        let (open_index, open) =
            bank.render(config.seed, &pair.pair_id, TemplateFamily::DialogueOpen, k, None);
        let (_, caption_q) = bank.render(
            config.seed,
            &pair.pair_id,
            TemplateFamily::DialogueCaption,
            k,
            None,
        );
        let (_, count_q) = bank.render(
            config.seed,
            &pair.pair_id,
            TemplateFamily::DialogueCount,
            k,
            Some(count_cat),
        );
        let (_, loc_q) = bank.render(
            config.seed,
            &pair.pair_id,
            TemplateFamily::DialogueLocalization,
            k,
            Some(loc_cat),
        );

        let caption_answer = if pair.changed {
            pair.captions[k % pair.captions.len()].clone()
        } else {
            pair.negation_caption(config).to_string()
        };
        let count = ground_truth_count(pair, count_cat, config);
        let regions = ground_truth_regions(pair, loc_cat, config);

        let turns = vec![
            Turn::user(open),
            Turn::assistant(ground_truth_binary(pair)),
            Turn::user(caption_q),
            Turn::assistant(caption_answer),
            Turn::user(count_q),
            Turn::assistant(count.to_string()),
            Turn::user(loc_q),
            Turn::assistant(GridRegion::join(&regions)),
        ];

        let mut meta = base_meta(pair, open_index);
        meta.insert("variant".to_string(), k.to_string());
        meta.insert("count_category".to_string(), count_cat.key().to_string());
        meta.insert("localization_category".to_string(), loc_cat.key().to_string());
        records.push(record(pair, Task::Dialogue, k, None, turns, meta));
    }
    Ok(records)
}

/// Build every record family over a corpus. Pairs are processed in
/// ascending `pair_id` order and records emitted per pair in task order,
/// so the output ordering is (pair_id, task, category/slot).
pub fn build_dataset(
    corpus: &[PairRecord],
    bank: &TemplateBank,
    config: &BuildConfig,
) -> Result<(Vec<InstructionRecord>, DatasetStats)> {
    config.validate()?;
    let mut seen = BTreeSet::new();
    for pair in corpus {
        if !seen.insert(pair.pair_id.as_str()) {
            return Err(Error::DuplicatePairId(pair.pair_id.clone()));
        }
        pair.validate()?;
    }

    let mut order: Vec<&PairRecord> = corpus.iter().collect();
    order.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));

    let mut records = Vec::new();
    let mut stats = DatasetStats::default();
    for pair in order {
        let mut pair_records = build_caption_records(pair, bank, config)?;
        pair_records.push(build_binary_record(pair, bank, config)?);
        pair_records.extend(build_count_records(pair, bank, config)?);
        pair_records.extend(build_localization_records(pair, bank, config)?);
        pair_records.extend(build_dialogue_records(pair, bank, config)?);
        for record in pair_records {
            debug_assert!(record.validate().is_ok());
            stats.add(record.task);
            records.push(record);
        }
    }
    Ok((records, stats))
}
