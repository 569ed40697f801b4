//! Instruction template bank.
//!
//! Templates live in a versioned TSV asset (`family<TAB>template`, one per
//! line, `#` comments allowed). Each task family must provide at least five
//! paraphrases. First-turn families embed exactly two image placeholders;
//! dialogue follow-up families embed none. Selection is by a stable hash of
//! (seed, pair id, family) plus a slot offset, which keeps picks
//! deterministic across runs and distinct across a record group's slots.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hash::fnv1a64_fields;
use crate::mask::ChangeCategory;

/// The literal token standing in for one image input.
pub const IMAGE_PLACEHOLDER: &str = "<image>";

/// Substituted with the category noun ("roads"/"buildings").
pub const CATEGORY_SLOT: &str = "{category}";

const BUILTIN_BANK: &str = include_str!("../assets/templates_v1.tsv");

/// Template families, one per instruction slot kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateFamily {
    Caption,
    Binary,
    Count,
    Localization,
    DialogueOpen,
    DialogueCaption,
    DialogueCount,
    DialogueLocalization,
}

impl TemplateFamily {
    pub const ALL: [TemplateFamily; 8] = [
        TemplateFamily::Caption,
        TemplateFamily::Binary,
        TemplateFamily::Count,
        TemplateFamily::Localization,
        TemplateFamily::DialogueOpen,
        TemplateFamily::DialogueCaption,
        TemplateFamily::DialogueCount,
        TemplateFamily::DialogueLocalization,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TemplateFamily::Caption => "caption",
            TemplateFamily::Binary => "binary",
            TemplateFamily::Count => "count",
            TemplateFamily::Localization => "localization",
            TemplateFamily::DialogueOpen => "dialogue_open",
            TemplateFamily::DialogueCaption => "dialogue_caption",
            TemplateFamily::DialogueCount => "dialogue_count",
            TemplateFamily::DialogueLocalization => "dialogue_localization",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        TemplateFamily::ALL.into_iter().find(|f| f.key() == key)
    }

    /// Number of image placeholders every template of this family must
    /// carry: two for first-turn families, zero for follow-ups.
    fn required_placeholders(self) -> usize {
        match self {
            TemplateFamily::DialogueCaption
            | TemplateFamily::DialogueCount
            | TemplateFamily::DialogueLocalization => 0,
            _ => 2,
        }
    }

    fn needs_category_slot(self) -> bool {
        matches!(
            self,
            TemplateFamily::Count
                | TemplateFamily::Localization
                | TemplateFamily::DialogueCount
                | TemplateFamily::DialogueLocalization
        )
    }
}

/// A validated bank of instruction paraphrases.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    families: BTreeMap<TemplateFamily, Vec<String>>,
}

impl TemplateBank {
    /// The bank shipped with the crate.
    pub fn builtin() -> TemplateBank {
        TemplateBank::parse(BUILTIN_BANK).expect("builtin bank is valid")
    }

    pub fn from_path(path: &Path) -> Result<TemplateBank> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(path.to_path_buf())
            } else {
                Error::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        TemplateBank::parse(&text)
    }

    /// Parse and validate the TSV format.
    pub fn parse(text: &str) -> Result<TemplateBank> {
        let mut families: BTreeMap<TemplateFamily, Vec<String>> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, template) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidTemplateBank(format!(
                    "line {}: expected 'family<TAB>template'",
                    lineno + 1
                ))
            })?;
            let family = TemplateFamily::from_key(key).ok_or_else(|| {
                Error::InvalidTemplateBank(format!("line {}: unknown family '{key}'", lineno + 1))
            })?;
            let placeholders = template.matches(IMAGE_PLACEHOLDER).count();
            if placeholders != family.required_placeholders() {
                return Err(Error::InvalidTemplateBank(format!(
                    "line {}: family '{key}' requires {} image placeholders, found {placeholders}",
                    lineno + 1,
                    family.required_placeholders()
                )));
            }
            if family.needs_category_slot() && !template.contains(CATEGORY_SLOT) {
                return Err(Error::InvalidTemplateBank(format!(
                    "line {}: family '{key}' requires a {CATEGORY_SLOT} slot",
                    lineno + 1
                )));
            }
            families.entry(family).or_default().push(template.to_string());
        }
        for family in TemplateFamily::ALL {
            let n = families.get(&family).map_or(0, Vec::len);
            if n < 5 {
                return Err(Error::InvalidTemplateBank(format!(
                    "family '{}' has {n} templates, need at least 5",
                    family.key()
                )));
            }
        }
        Ok(TemplateBank { families })
    }

    pub fn len(&self, family: TemplateFamily) -> usize {
        self.families[&family].len()
    }

    /// Deterministic template index for (seed, pair, family) shifted by
    /// `slot`. Adding the slot after hashing keeps the picks for slots
    /// 0..k distinct whenever the family has at least k templates.
    pub fn index_for(&self, seed: u64, pair_id: &str, family: TemplateFamily, slot: usize) -> usize {
        let base = fnv1a64_fields(&[&seed.to_le_bytes(), pair_id.as_bytes(), family.key().as_bytes()]);
        ((base as usize).wrapping_add(slot)) % self.len(family)
    }

    /// Pick and instantiate a template; `category` fills the category slot
    /// when the family has one.
    pub fn render(
        &self,
        seed: u64,
        pair_id: &str,
        family: TemplateFamily,
        slot: usize,
        category: Option<ChangeCategory>,
    ) -> (usize, String) {
        let index = self.index_for(seed, pair_id, family, slot);
        let template = &self.families[&family][index];
        let text = match category {
            Some(cat) => template.replace(CATEGORY_SLOT, cat.noun_plural()),
            None => template.clone(),
        };
        (index, text)
    }
}
