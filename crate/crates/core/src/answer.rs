//! Parsing of free-text model responses into task-level predictions.
//!
//! Parsers never fail: a response that cannot be interpreted comes back as
//! `Unparseable` and the scoring layer treats it as maximally wrong (binary:
//! incorrect, count: 0 with a flag, regions: empty set).

use crate::mask::GridRegion;

/// How confident the parse is. `Exact` means the text is a canonical
/// answer, `Heuristic` that the value was extracted from surrounding prose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceNote {
    Exact,
    Heuristic,
    Unparseable,
}

/// The extracted prediction value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerKind {
    YesNo(bool),
    Count(u32),
    Regions(Vec<GridRegion>),
    Caption(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAnswer {
    pub kind: AnswerKind,
    pub note: ConfidenceNote,
}

impl ParsedAnswer {
    fn new(kind: AnswerKind, note: ConfidenceNote) -> Self {
        ParsedAnswer { kind, note }
    }

    pub fn is_unparseable(&self) -> bool {
        self.note == ConfidenceNote::Unparseable
    }

    /// Binary value for scoring; `None` when unparseable.
    pub fn yes_no(&self) -> Option<bool> {
        match (&self.kind, self.note) {
            (_, ConfidenceNote::Unparseable) => None,
            (AnswerKind::YesNo(v), _) => Some(*v),
            _ => None,
        }
    }

    /// Count for scoring; unparseable answers contribute 0 (flagged by the
    /// caller via [`is_unparseable`](Self::is_unparseable)).
    pub fn count(&self) -> u32 {
        match &self.kind {
            AnswerKind::Count(v) => *v,
            _ => 0,
        }
    }

    /// Region set for scoring; unparseable answers contribute the empty set.
    pub fn regions(&self) -> &[GridRegion] {
        match &self.kind {
            AnswerKind::Regions(r) => r,
            _ => &[],
        }
    }
}

/// Lowercased alphanumeric words of the text, in order.
fn words(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

const NUMBER_WORDS: [(&str, u32); 11] = [
    ("zero", 0),
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
];

fn word_value(word: &str) -> Option<u32> {
    if word.chars().all(|c| c.is_ascii_digit()) {
        return word.parse().ok();
    }
    NUMBER_WORDS
        .iter()
        .find(|(w, _)| *w == word)
        .map(|&(_, v)| v)
}

/// Yes/no extraction: an exact leading token is `Exact`, a yes/no word
/// anywhere else is `Heuristic`, otherwise `Unparseable`.
pub fn parse_yes_no(text: &str) -> ParsedAnswer {
    if let Some(first) = text.split_whitespace().next() {
        if first.eq_ignore_ascii_case("yes") {
            return ParsedAnswer::new(AnswerKind::YesNo(true), ConfidenceNote::Exact);
        }
        if first.eq_ignore_ascii_case("no") {
            return ParsedAnswer::new(AnswerKind::YesNo(false), ConfidenceNote::Exact);
        }
    }
    for word in words(text) {
        if word == "yes" {
            return ParsedAnswer::new(AnswerKind::YesNo(true), ConfidenceNote::Heuristic);
        }
        if word == "no" {
            return ParsedAnswer::new(AnswerKind::YesNo(false), ConfidenceNote::Heuristic);
        }
    }
    ParsedAnswer::new(AnswerKind::YesNo(false), ConfidenceNote::Unparseable)
}

/// Count extraction: the first integer literal or number word (zero..ten)
/// wins; "no ... change(d)" phrasing with no numeral reads as 0.
pub fn parse_count(text: &str) -> ParsedAnswer {
    let trimmed = text.trim();
    if !trimmed.is_empty() && trimmed.chars().all(|c| c.is_ascii_digit()) {
        if let Ok(v) = trimmed.parse() {
            return ParsedAnswer::new(AnswerKind::Count(v), ConfidenceNote::Exact);
        }
    }
    let words = words(text);
    for word in &words {
        if let Some(v) = word_value(word) {
            return ParsedAnswer::new(AnswerKind::Count(v), ConfidenceNote::Heuristic);
        }
    }
    if let Some(no_at) = words.iter().position(|w| w == "no") {
        if words[no_at + 1..].iter().any(|w| w.starts_with("change")) {
            return ParsedAnswer::new(AnswerKind::Count(0), ConfidenceNote::Heuristic);
        }
    }
    ParsedAnswer::new(AnswerKind::Count(0), ConfidenceNote::Unparseable)
}

/// Region names ordered longest-first so compound names win over their
/// substrings ("top left corner" before "top"/"left").
fn names_longest_first() -> Vec<(GridRegion, &'static str)> {
    let mut names: Vec<(GridRegion, &'static str)> =
        GridRegion::ALL.iter().map(|&r| (r, r.name())).collect();
    names.sort_by_key(|(_, name)| std::cmp::Reverse(name.len()));
    names
}

fn is_boundary(bytes: &[u8], index: Option<usize>) -> bool {
    match index {
        None => true,
        Some(i) => !bytes[i].is_ascii_alphanumeric(),
    }
}

/// Region-set extraction. The literal phrase "no change" (case-insensitive)
/// reads as the empty set; otherwise the text is scanned for the nine
/// region names, longest match first, with word boundaries enforced.
/// The result is deduplicated in canonical order.
pub fn parse_regions(text: &str) -> ParsedAnswer {
    let lowered = text.to_lowercase();
    if lowered.contains("no change") {
        return ParsedAnswer::new(AnswerKind::Regions(Vec::new()), ConfidenceNote::Exact);
    }

    let names = names_longest_first();
    let bytes = lowered.as_bytes();
    let mut found = std::collections::BTreeSet::new();
    let mut i = 0;
    'scan: while i < bytes.len() {
        for &(region, name) in &names {
            let end = i + name.len();
            if end <= bytes.len()
                && &bytes[i..end] == name.as_bytes()
                && is_boundary(bytes, i.checked_sub(1))
                && is_boundary(bytes, (end < bytes.len()).then_some(end))
            {
                found.insert(region);
                i = end;
                continue 'scan;
            }
        }
        i += 1;
    }

    let regions: Vec<GridRegion> = found.into_iter().collect();
    if regions.is_empty() {
        return ParsedAnswer::new(AnswerKind::Regions(regions), ConfidenceNote::Unparseable);
    }
    let note = if lowered.trim() == GridRegion::join(&regions).to_lowercase() {
        ConfidenceNote::Exact
    } else {
        ConfidenceNote::Heuristic
    };
    ParsedAnswer::new(AnswerKind::Regions(regions), note)
}

/// Captions pass through untouched.
pub fn parse_caption(text: &str) -> ParsedAnswer {
    ParsedAnswer::new(
        AnswerKind::Caption(text.to_string()),
        ConfidenceNote::Exact,
    )
}
