//! Toolkit for building and scoring instruction datasets over bi-temporal
//! remote sensing change imagery.
//!
//! The pipeline runs end to end on plain files:
//!
//! 1. [`mask`] extracts change instances, counts and 3x3 grid locations
//!    from multi-class change masks.
//! 2. [`builder`] turns annotated pairs into five instruction-record
//!    families (captioning, yes/no classification, counting, localization
//!    and four-turn dialogues) with deterministic template paraphrasing.
//! 3. [`vision`] provides the forward-only math of the vision-guided
//!    branch over a seeded stub encoder, producing change masks the
//!    analytics can consume.
//! 4. [`prompt`] assembles dual-granularity prompts (scene summary +
//!    change cues + query + history).
//! 5. [`answer`] parses free-text model responses back into yes/no flags,
//!    counts and region sets, and [`metrics`] scores all four tasks.
//! 6. [`io`] pins the byte-exact manifest, mask, JSONL and report formats,
//!    and [`eval`] joins predictions with a dataset into a report.

pub mod answer;
pub mod builder;
pub mod error;
pub mod eval;
pub(crate) mod hash;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod prompt;
pub mod templates;
pub mod vision;

pub use error::{Error, Result};
