//! Joining a dataset with a prediction file and scoring each task.
//!
//! Predictions are parsed per task; a missing or unparseable prediction is
//! scored as maximally wrong (binary: incorrect, count: 0, localization:
//! empty set, caption: empty candidate). Dialogue records have no
//! single-prediction semantics and are skipped with a coverage note.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::answer::{parse_count, parse_regions, parse_yes_no};
use crate::builder::{InstructionRecord, Task};
use crate::error::{Error, Result};
use crate::io::{PredictionFile, SCHEMA_VERSION};
use crate::mask::{ChangeCategory, GridRegion};
use crate::metrics::{
    binary_metrics, bleu4, cider_d, count_mae, meteor_lite, multilabel_metrics, rouge_l, tokenize,
    CaptionScores, ClassificationScores, CountScores, LocalizationScores, Tokens,
};

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Coverage {
    /// Records considered after task filtering.
    pub records: usize,
    /// Records actually scored.
    pub evaluated: usize,
    /// Scored records with no prediction line.
    pub missing_predictions: usize,
    /// Dialogue records, which the single-prediction join cannot score.
    pub skipped_dialogue: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaptionSection {
    pub examples: usize,
    pub scores: CaptionScores,
}

#[derive(Debug, Clone, Serialize)]
pub struct BinarySection {
    pub examples: usize,
    pub unparseable: usize,
    pub scores: ClassificationScores,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountSection {
    pub examples_road: usize,
    pub examples_building: usize,
    pub unparseable: usize,
    pub scores: CountScores,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationSection {
    pub examples: usize,
    pub unparseable: usize,
    pub scores: LocalizationScores,
}

/// Per-task metric aggregates for one evaluation run.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub coverage: Coverage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caption: Option<CaptionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binary: Option<BinarySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<CountSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationSection>,
}

/// Reference captions of a record: the `ref_<i>` meta entries, falling back
/// to the assistant answer itself.
fn caption_references(record: &InstructionRecord) -> Vec<String> {
    let mut refs = Vec::new();
    for i in 0.. {
        match record.meta.get(&format!("ref_{i}")) {
            Some(reference) => refs.push(reference.clone()),
            None => break,
        }
    }
    if refs.is_empty() {
        refs.push(record.last_answer().to_string());
    }
    refs
}

/// Score a dataset against a prediction file, optionally restricted to one
/// task.
pub fn evaluate(
    records: &[InstructionRecord],
    predictions: &PredictionFile,
    task_filter: Option<Task>,
) -> Result<EvalReport> {
    let mut coverage = Coverage::default();

    let mut caption_cands: Vec<Tokens> = Vec::new();
    let mut caption_refs: Vec<Vec<Tokens>> = Vec::new();
    let mut binary_preds: Vec<Option<bool>> = Vec::new();
    let mut binary_gts: Vec<bool> = Vec::new();
    let mut binary_unparseable = 0usize;
    let mut count_preds: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let mut count_gts: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    let mut count_unparseable = 0usize;
    let mut loc_preds: Vec<BTreeSet<GridRegion>> = Vec::new();
    let mut loc_gts: Vec<BTreeSet<GridRegion>> = Vec::new();
    let mut loc_unparseable = 0usize;

    for record in records {
        if task_filter.is_some_and(|t| t != record.task) {
            continue;
        }
        coverage.records += 1;
        if record.task == Task::Dialogue {
            coverage.skipped_dialogue += 1;
            continue;
        }

        let prediction = predictions.get(&record.record_id);
        if prediction.is_none() {
            coverage.missing_predictions += 1;
        }
        coverage.evaluated += 1;

        match record.task {
            Task::Caption => {
                caption_cands.push(tokenize(prediction.unwrap_or_default()));
                caption_refs.push(caption_references(record).iter().map(|r| tokenize(r)).collect());
            }
            Task::Binary => {
                let gt = parse_yes_no(record.last_answer());
                let gt = gt.yes_no().ok_or_else(|| Error::BadGroundTruth {
                    record_id: record.record_id.clone(),
                    reason: format!("expected a yes/no answer, found '{}'", record.last_answer()),
                })?;
                let pred = prediction.map(parse_yes_no).and_then(|p| p.yes_no());
                if pred.is_none() {
                    binary_unparseable += 1;
                }
                binary_preds.push(pred);
                binary_gts.push(gt);
            }
            Task::Count => {
                let category = record.category.ok_or_else(|| Error::BadGroundTruth {
                    record_id: record.record_id.clone(),
                    reason: "counting record without a category".into(),
                })?;
                let gt = parse_count(record.last_answer());
                if gt.is_unparseable() {
                    return Err(Error::BadGroundTruth {
                        record_id: record.record_id.clone(),
                        reason: format!("expected a count, found '{}'", record.last_answer()),
                    });
                }
                let parsed = prediction.map(parse_count);
                if parsed.as_ref().is_none_or(|p| p.is_unparseable()) {
                    count_unparseable += 1;
                }
                let slot = (category == ChangeCategory::Building) as usize;
                count_preds[slot].push(parsed.map(|p| p.count()).unwrap_or(0));
                count_gts[slot].push(gt.count());
            }
            Task::Localization => {
                let gt = parse_regions(record.last_answer());
                let parsed = prediction.map(parse_regions);
                if parsed.as_ref().is_none_or(|p| p.is_unparseable()) {
                    loc_unparseable += 1;
                }
                loc_preds.push(
                    parsed
                        .map(|p| p.regions().iter().copied().collect())
                        .unwrap_or_default(),
                );
                loc_gts.push(gt.regions().iter().copied().collect());
            }
            Task::Dialogue => unreachable!("dialogue records are skipped above"),
        }
    }

    let caption = if caption_cands.is_empty() {
        None
    } else {
        Some(CaptionSection {
            examples: caption_cands.len(),
            scores: CaptionScores::new(
                bleu4(&caption_cands, &caption_refs)?,
                meteor_lite(&caption_cands, &caption_refs)?,
                rouge_l(&caption_cands, &caption_refs)?,
                cider_d(&caption_cands, &caption_refs)?,
            ),
        })
    };
    let binary = if binary_preds.is_empty() {
        None
    } else {
        Some(BinarySection {
            examples: binary_preds.len(),
            unparseable: binary_unparseable,
            scores: binary_metrics(&binary_preds, &binary_gts)?,
        })
    };
    let count = if count_preds[0].is_empty() && count_preds[1].is_empty() {
        None
    } else {
        let mae = |slot: usize| -> Result<f64> {
            if count_preds[slot].is_empty() {
                Ok(0.0)
            } else {
                count_mae(&count_preds[slot], &count_gts[slot])
            }
        };
        Some(CountSection {
            examples_road: count_preds[0].len(),
            examples_building: count_preds[1].len(),
            unparseable: count_unparseable,
            scores: CountScores {
                mae_road: mae(0)?,
                mae_building: mae(1)?,
            },
        })
    };
    let localization = if loc_preds.is_empty() {
        None
    } else {
        Some(LocalizationSection {
            examples: loc_preds.len(),
            unparseable: loc_unparseable,
            scores: multilabel_metrics(&loc_preds, &loc_gts)?,
        })
    };

    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        coverage,
        caption,
        binary,
        count,
        localization,
    })
}

/// Build a prediction file echoing every record's ground-truth answer;
/// the fixed point of the evaluation.
pub fn ground_truth_predictions(records: &[InstructionRecord]) -> PredictionFile {
    PredictionFile::from_entries(
        records
            .iter()
            .filter(|r| r.task != Task::Dialogue)
            .map(|r| (r.record_id.clone(), r.last_answer().to_string())),
    )
}
