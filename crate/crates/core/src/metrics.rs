//! Evaluation metrics: the captioning quadruple (BLEU-4, exact-match
//! METEOR, ROUGE-L, CIDEr-D) with their arithmetic mean, binary
//! classification scores, per-category count MAE, and multi-label
//! localization scores.
//!
//! All text metrics share one tokenizer. The METEOR here is an exact-match
//! variant (no stemmer, no synonym table) with the published default
//! parameters (alpha 0.9, beta 3, gamma 0.5), so its absolute values are
//! not comparable with WordNet-backed implementations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::GridRegion;

pub type Tokens = Vec<String>;

/// Lowercase, strip punctuation to whitespace, split on whitespace.
pub fn tokenize(text: &str) -> Tokens {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Captioning quadruple plus its arithmetic mean, all on the x100 scale
/// (CIDEr-D follows its own x10 convention and is averaged as-is).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptionScores {
    pub bleu4: f64,
    pub meteor: f64,
    pub rouge_l: f64,
    pub cider_d: f64,
    pub s_m_star: f64,
}

impl CaptionScores {
    pub fn new(bleu4: f64, meteor: f64, rouge_l: f64, cider_d: f64) -> CaptionScores {
        CaptionScores {
            bleu4,
            meteor,
            rouge_l,
            cider_d,
            s_m_star: s_m_star(bleu4, meteor, rouge_l, cider_d),
        }
    }
}

/// Arithmetic mean of the four captioning scores.
pub fn s_m_star(bleu4: f64, meteor: f64, rouge_l: f64, cider_d: f64) -> f64 {
    (bleu4 + meteor + rouge_l + cider_d) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountScores {
    pub mae_road: f64,
    pub mae_building: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationScores {
    pub example_based_accuracy: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub subset_accuracy: f64,
}

fn check_corpus<T, U>(candidates: &[T], references: &[Vec<U>]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if references.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU-4 without smoothing: clipped modified n-gram
/// precisions for n = 1..4, geometric mean, brevity penalty against the
/// closest reference length (ties resolved to the shorter reference).
/// Any zero precision zeroes the score. Scale x100.
pub fn bleu4(candidates: &[Tokens], references: &[Vec<Tokens>]) -> Result<f64> {
    check_corpus(candidates, references)?;

    let mut clipped = [0usize; 4];
    let mut total = [0usize; 4];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for (cand, refs) in candidates.iter().zip(references) {
        cand_len += cand.len();
        ref_len += refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&l| (l.abs_diff(cand.len()), l))
            .expect("at least one reference");

        for n in 1..=4 {
            let cand_counts = ngram_counts(cand, n);
            total[n - 1] += cand.len().saturating_sub(n - 1);
            let ref_counts: Vec<HashMap<&[String], usize>> =
                refs.iter().map(|r| ngram_counts(r, n)).collect();
            for (gram, &count) in &cand_counts {
                let max_ref = ref_counts
                    .iter()
                    .map(|rc| rc.get(gram).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                clipped[n - 1] += count.min(max_ref);
            }
        }
    }

    if cand_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 0..4 {
        if clipped[n] == 0 || total[n] == 0 {
            return Ok(0.0);
        }
        log_sum += (clipped[n] as f64 / total[n] as f64).ln();
    }
    let brevity = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(100.0 * brevity * (log_sum / 4.0).exp())
}

const METEOR_ALPHA: f64 = 0.9;
const METEOR_BETA: f64 = 3.0;
const METEOR_GAMMA: f64 = 0.5;

/// Alignments larger than this fall back to a greedy chunk count; the
/// match count is unaffected.
const METEOR_EXACT_LIMIT: usize = 20;

/// Exact-match unigram alignment maximizing matches then minimizing
/// chunks. Returns (matches, chunks).
fn align(cand: &[String], reference: &[String]) -> (usize, usize) {
    if cand.is_empty() || reference.is_empty() {
        return (0, 0);
    }
    if cand == reference {
        return (cand.len(), 1);
    }
    let cand_set: BTreeSet<&String> = cand.iter().collect();
    let matchable: Vec<usize> = reference
        .iter()
        .enumerate()
        .filter(|(_, w)| cand_set.contains(w))
        .map(|(i, _)| i)
        .collect();
    if matchable.is_empty() {
        return (0, 0);
    }
    // The exact search recurses over candidate positions; bail out to the
    // greedy pass for oversized states or degenerate-length candidates.
    if matchable.len() > METEOR_EXACT_LIMIT || cand.len() > 200 {
        return greedy_align(cand, reference);
    }

    // State: candidate position, bitmask of used matchable reference slots,
    // and the matchable slot matched by the previous candidate token
    // (slot + 1; 0 when the previous token was unmatched). Value is the
    // best (matches, chunks) from that state on.
    fn better(a: (usize, usize), b: (usize, usize)) -> (usize, usize) {
        if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
            a
        } else {
            b
        }
    }

    fn rec(
        i: usize,
        mask: u32,
        last: usize,
        cand: &[String],
        reference: &[String],
        matchable: &[usize],
        memo: &mut HashMap<(usize, u32, usize), (usize, usize)>,
    ) -> (usize, usize) {
        if i == cand.len() {
            return (0, 0);
        }
        let key = (i, mask, last);
        if let Some(&cached) = memo.get(&key) {
            return cached;
        }
        // Leave cand[i] unmatched.
        let mut best = rec(i + 1, mask, 0, cand, reference, matchable, memo);
        for (slot, &rpos) in matchable.iter().enumerate() {
            if mask & (1 << slot) != 0 || reference[rpos] != cand[i] {
                continue;
            }
            let continues = last > 0 && rpos == matchable[last - 1] + 1;
            let (m, ch) = rec(i + 1, mask | (1 << slot), slot + 1, cand, reference, matchable, memo);
            best = better((m + 1, ch + usize::from(!continues)), best);
        }
        memo.insert(key, best);
        best
    }

    let mut memo = HashMap::new();
    rec(0, 0, 0, cand, reference, &matchable, &mut memo)
}

/// Deterministic fallback for long sentences: each candidate token takes
/// the reference occurrence continuing the current chunk when possible,
/// otherwise the leftmost unused one. Matches are still maximal.
fn greedy_align(cand: &[String], reference: &[String]) -> (usize, usize) {
    let mut used = vec![false; reference.len()];
    let mut matches = 0;
    let mut chunks = 0;
    let mut prev: Option<usize> = None;
    for word in cand {
        let next = prev.map(|p| p + 1).filter(|&p| {
            p < reference.len() && !used[p] && &reference[p] == word
        });
        let chosen = next.or_else(|| {
            reference
                .iter()
                .enumerate()
                .position(|(i, w)| !used[i] && w == word)
        });
        match chosen {
            Some(rpos) => {
                used[rpos] = true;
                matches += 1;
                if prev != Some(rpos.wrapping_sub(1)) {
                    chunks += 1;
                }
                prev = Some(rpos);
            }
            None => prev = None,
        }
    }
    (matches, chunks)
}

fn sentence_meteor(cand: &[String], reference: &[String]) -> f64 {
    let (matches, chunks) = align(cand, reference);
    if matches == 0 {
        return 0.0;
    }
    let precision = matches as f64 / cand.len() as f64;
    let recall = matches as f64 / reference.len() as f64;
    let f_mean = precision * recall / (METEOR_ALPHA * precision + (1.0 - METEOR_ALPHA) * recall);
    let penalty = METEOR_GAMMA * (chunks as f64 / matches as f64).powf(METEOR_BETA);
    f_mean * (1.0 - penalty)
}

/// Exact-match METEOR: best reference per candidate, corpus mean, x100.
pub fn meteor_lite(candidates: &[Tokens], references: &[Vec<Tokens>]) -> Result<f64> {
    check_corpus(candidates, references)?;
    let sum: f64 = candidates
        .iter()
        .zip(references)
        .map(|(cand, refs)| {
            refs.iter()
                .map(|r| sentence_meteor(cand, r))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(100.0 * sum / candidates.len() as f64)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut table = vec![0usize; (a.len() + 1) * (b.len() + 1)];
    let stride = b.len() + 1;
    for (i, wa) in a.iter().enumerate() {
        for (j, wb) in b.iter().enumerate() {
            table[(i + 1) * stride + j + 1] = if wa == wb {
                table[i * stride + j] + 1
            } else {
                table[i * stride + j + 1].max(table[(i + 1) * stride + j])
            };
        }
    }
    table[a.len() * stride + b.len()]
}

const ROUGE_BETA: f64 = 1.2;

/// ROUGE-L with the captioning-toolkit F-beta (beta = 1.2): per pair the
/// LCS-based precision/recall, maximum over references, corpus mean, x100.
pub fn rouge_l(candidates: &[Tokens], references: &[Vec<Tokens>]) -> Result<f64> {
    check_corpus(candidates, references)?;
    let beta_sq = ROUGE_BETA * ROUGE_BETA;
    let sum: f64 = candidates
        .iter()
        .zip(references)
        .map(|(cand, refs)| {
            refs.iter()
                .map(|r| {
                    let lcs = lcs_len(cand, r);
                    if lcs == 0 || cand.is_empty() || r.is_empty() {
                        return 0.0;
                    }
                    let p = lcs as f64 / cand.len() as f64;
                    let rr = lcs as f64 / r.len() as f64;
                    (1.0 + beta_sq) * p * rr / (rr + beta_sq * p)
                })
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(100.0 * sum / candidates.len() as f64)
}

const CIDER_SIGMA: f64 = 6.0;

// BTreeMaps keep every floating-point accumulation in a fixed order, so
// corpus scores are bit-reproducible across runs.
type NgramVec = BTreeMap<Vec<String>, f64>;

fn cider_tfidf(tokens: &[String], df: &[NgramVec; 4], log_docs: f64) -> ([NgramVec; 4], [f64; 4]) {
    let mut vecs: [NgramVec; 4] = Default::default();
    let mut norms = [0.0f64; 4];
    for n in 1..=4 {
        if tokens.len() < n {
            continue;
        }
        let mut counts: NgramVec = BTreeMap::new();
        for gram in tokens.windows(n) {
            *counts.entry(gram.to_vec()).or_insert(0.0) += 1.0;
        }
        for (gram, count) in counts {
            let freq = df[n - 1].get(&gram).copied().unwrap_or(0.0).max(1.0);
            let value = count * (log_docs - freq.ln());
            norms[n - 1] += value * value;
            vecs[n - 1].insert(gram, value);
        }
        norms[n - 1] = norms[n - 1].sqrt();
    }
    (vecs, norms)
}

/// CIDEr-D: TF-IDF n-gram cosine consensus (n = 1..4) with candidate-count
/// clipping and a Gaussian length penalty (sigma 6), averaged over n and
/// references, x10. IDF uses `ln(max(corpus, 2) / df)` so single-document
/// corpora do not degenerate to zero vectors.
pub fn cider_d(candidates: &[Tokens], references: &[Vec<Tokens>]) -> Result<f64> {
    check_corpus(candidates, references)?;
    let docs = candidates.len();
    let log_docs = (docs.max(2) as f64).ln();

    let mut df: [NgramVec; 4] = Default::default();
    for refs in references {
        let mut seen: [BTreeSet<Vec<String>>; 4] = Default::default();
        for reference in refs {
            for n in 1..=4 {
                if reference.len() >= n {
                    for gram in reference.windows(n) {
                        seen[n - 1].insert(gram.to_vec());
                    }
                }
            }
        }
        for n in 0..4 {
            for gram in std::mem::take(&mut seen[n]) {
                *df[n].entry(gram).or_insert(0.0) += 1.0;
            }
        }
    }

    let mut corpus_sum = 0.0;
    for (cand, refs) in candidates.iter().zip(references) {
        let (cand_vec, cand_norm) = cider_tfidf(cand, &df, log_docs);
        let mut per_n = [0.0f64; 4];
        for reference in refs {
            let (ref_vec, ref_norm) = cider_tfidf(reference, &df, log_docs);
            let delta = cand.len() as f64 - reference.len() as f64;
            let length_penalty = (-(delta * delta) / (2.0 * CIDER_SIGMA * CIDER_SIGMA)).exp();
            for n in 0..4 {
                let mut dot = 0.0;
                for (gram, &cv) in &cand_vec[n] {
                    if let Some(&rv) = ref_vec[n].get(gram) {
                        dot += cv.min(rv) * rv;
                    }
                }
                if cand_norm[n] != 0.0 && ref_norm[n] != 0.0 {
                    per_n[n] += length_penalty * dot / (cand_norm[n] * ref_norm[n]);
                }
            }
        }
        let mean_n: f64 = per_n.iter().sum::<f64>() / 4.0;
        corpus_sum += 10.0 * mean_n / refs.len() as f64;
    }
    Ok(corpus_sum / docs as f64)
}

/// Binary classification scores. `None` predictions (unparseable answers)
/// are counted against the model: a false positive when the ground truth
/// is negative, a false negative when it is positive.
pub fn binary_metrics(preds: &[Option<bool>], gts: &[bool]) -> Result<ClassificationScores> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&pred, &gt) in preds.iter().zip(gts) {
        match (pred, gt) {
            (Some(true), true) => tp += 1,
            (Some(true), false) => fp += 1,
            (Some(false), true) => fn_ += 1,
            (Some(false), false) => tn += 1,
            (None, true) => fn_ += 1,
            (None, false) => fp += 1,
        }
    }
    let n = preds.len() as f64;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationScores {
        accuracy: (tp + tn) as f64 / n,
        precision,
        recall,
        f1,
    })
}

fn ratio(num: usize, denom: usize) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Mean absolute error between predicted and ground-truth counts.
pub fn count_mae(preds: &[u32], gts: &[u32]) -> Result<f64> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sum: u64 = preds
        .iter()
        .zip(gts)
        .map(|(&p, &g)| p.abs_diff(g) as u64)
        .sum();
    Ok(sum as f64 / preds.len() as f64)
}

/// Multi-label localization scores over region sets.
///
/// Example-based accuracy is the mean Jaccard similarity (two empty sets
/// count as 1, so a correct "No change" scores as correct). Micro scores
/// pool per-label decisions across all examples; a corpus with no positive
/// labels anywhere and none predicted is vacuously perfect.
pub fn multilabel_metrics(
    preds: &[BTreeSet<GridRegion>],
    gts: &[BTreeSet<GridRegion>],
) -> Result<LocalizationScores> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut jaccard_sum = 0.0;
    let mut subset_hits = 0usize;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (pred, gt) in preds.iter().zip(gts) {
        let inter = pred.intersection(gt).count();
        let union = pred.union(gt).count();
        jaccard_sum += if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        };
        if pred == gt {
            subset_hits += 1;
        }
        tp += inter;
        fp += pred.len() - inter;
        fn_ += gt.len() - inter;
    }
    let (micro_precision, micro_recall, micro_f1) = if tp + fp + fn_ == 0 {
        (1.0, 1.0, 1.0)
    } else {
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        (p, r, f1)
    };
    Ok(LocalizationScores {
        example_based_accuracy: jaccard_sum / preds.len() as f64,
        micro_precision,
        micro_recall,
        micro_f1,
        subset_accuracy: subset_hits as f64 / preds.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Tokens {
        tokenize(text)
    }

    #[test]
    fn tokenizer_lowercases_and_strips_punctuation() {
        assert_eq!(toks("A road, appears."), vec!["a", "road", "appears"]);
        assert_eq!(toks(""), Vec::<String>::new());
        assert_eq!(toks("Top-Left corner"), vec!["top", "left", "corner"]);
    }

    #[test]
    fn bleu_perfect_match_is_100() {
        let cand = vec![toks("a new road cuts across the field")];
        let refs = vec![vec![toks("a new road cuts across the field")]];
        assert!((bleu4(&cand, &refs).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_zero_fourgram_precision_zeroes_the_score() {
        let cand = vec![toks("a b c e")];
        let refs = vec![vec![toks("a b c d")]];
        assert_eq!(bleu4(&cand, &refs).unwrap(), 0.0);
    }

    #[test]
    fn bleu_rejects_empty_corpus() {
        assert!(matches!(bleu4(&[], &[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn meteor_identical_sentence_pays_only_fragmentation() {
        // Five matched unigrams in a single chunk:
        // F_mean = 1, penalty = 0.5 * (1/5)^3 = 0.004, score 99.6.
        let cand = vec![toks("a b c d e")];
        let refs = vec![vec![toks("a b c d e")]];
        assert!((meteor_lite(&cand, &refs).unwrap() - 99.6).abs() < 1e-9);
    }

    #[test]
    fn meteor_disjoint_vocabulary_scores_zero() {
        let cand = vec![toks("x y z")];
        let refs = vec![vec![toks("a b c")]];
        assert_eq!(meteor_lite(&cand, &refs).unwrap(), 0.0);
    }

    #[test]
    fn meteor_swapped_words_pay_full_penalty() {
        // "b a" vs "a b": 2 matches in 2 chunks, F_mean 1,
        // penalty 0.5 * (2/2)^3 = 0.5, score 50.
        let cand = vec![toks("b a")];
        let refs = vec![vec![toks("a b")]];
        assert!((meteor_lite(&cand, &refs).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn meteor_alignment_minimizes_chunks() {
        // Candidate "a b a" aligns onto "a b a b" as one contiguous run.
        assert_eq!(align(&toks("a b a"), &toks("a b a b")), (3, 1));
        // Candidate "b a b" vs "a b b": maximal matching is 3; routing the
        // first "b" to the last reference slot lets "a b" stay contiguous,
        // giving 2 chunks where a leftmost-greedy pairing would produce 3.
        assert_eq!(align(&toks("b a b"), &toks("a b b")), (3, 2));
    }

    #[test]
    fn rouge_identical_is_100_and_disjoint_is_0() {
        let cand = vec![toks("a b c")];
        assert!((rouge_l(&cand, &[vec![toks("a b c")]]).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(rouge_l(&cand, &[vec![toks("x y z")]]).unwrap(), 0.0);
    }

    #[test]
    fn rouge_partial_order_swap() {
        // LCS("a b c", "a c b") = 2, P = R = 2/3, F = 2/3.
        let cand = vec![toks("a b c")];
        let refs = vec![vec![toks("a c b")]];
        assert!((rouge_l(&cand, &refs).unwrap() - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn cider_single_document_self_match_is_ten() {
        let cand = vec![toks("two buildings appear near the road")];
        let refs = vec![vec![toks("two buildings appear near the road")]];
        assert!((cider_d(&cand, &refs).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn cider_disjoint_ngrams_score_zero() {
        let cand = vec![toks("p q r s"), toks("p q r s")];
        let refs = vec![vec![toks("a b c d")], vec![toks("a b c e")]];
        assert_eq!(cider_d(&cand, &refs).unwrap(), 0.0);
    }

    #[test]
    fn s_m_star_is_the_plain_mean() {
        assert_eq!(s_m_star(60.0, 40.0, 70.0, 130.0), 75.0);
        assert_eq!(s_m_star(0.0, 0.0, 0.0, 0.0), 0.0);
        assert!((s_m_star(65.08, 42.06, 76.95, 142.83) - 81.73).abs() < 0.005);
    }

    #[test]
    fn binary_all_correct_is_all_ones() {
        let preds = vec![Some(true), Some(false), Some(true)];
        let gts = vec![true, false, true];
        let scores = binary_metrics(&preds, &gts).unwrap();
        assert_eq!(
            (scores.accuracy, scores.precision, scores.recall, scores.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn binary_half_right_confusion() {
        let preds = vec![Some(true), Some(true), Some(false), Some(false)];
        let gts = vec![true, false, true, false];
        let scores = binary_metrics(&preds, &gts).unwrap();
        assert_eq!(
            (scores.accuracy, scores.precision, scores.recall, scores.f1),
            (0.5, 0.5, 0.5, 0.5)
        );
    }

    #[test]
    fn binary_zero_predicted_positives_has_zero_precision() {
        let preds = vec![Some(false), Some(false)];
        let gts = vec![true, false];
        let scores = binary_metrics(&preds, &gts).unwrap();
        assert_eq!(scores.precision, 0.0);
        assert_eq!(scores.f1, 0.0);
    }

    #[test]
    fn binary_unparseable_counts_against_both_classes() {
        let preds = vec![None, None];
        let gts = vec![true, false];
        let scores = binary_metrics(&preds, &gts).unwrap();
        assert_eq!(scores.accuracy, 0.0);
        // The unparseable-on-negative example counts as a false positive.
        assert_eq!(scores.precision, 0.0);
        assert_eq!(scores.recall, 0.0);
    }

    #[test]
    fn mae_examples() {
        assert_eq!(count_mae(&[1, 3], &[1, 3]).unwrap(), 0.0);
        assert_eq!(count_mae(&[2, 3], &[1, 3]).unwrap(), 0.5);
        assert!(matches!(count_mae(&[1], &[1, 2]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn multilabel_perfect_prediction() {
        let a: BTreeSet<_> = [GridRegion::Top, GridRegion::Center].into_iter().collect();
        let b = a.clone();
        let scores = multilabel_metrics(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        assert_eq!(scores.example_based_accuracy, 1.0);
        assert_eq!(scores.micro_f1, 1.0);
        assert_eq!(scores.subset_accuracy, 1.0);
    }

    #[test]
    fn multilabel_partial_prediction() {
        let pred: BTreeSet<_> = [GridRegion::Top].into_iter().collect();
        let gt: BTreeSet<_> = [GridRegion::Top, GridRegion::Left].into_iter().collect();
        let scores = multilabel_metrics(&[pred], &[gt]).unwrap();
        assert_eq!(scores.example_based_accuracy, 0.5);
        assert_eq!(scores.micro_precision, 1.0);
        assert_eq!(scores.micro_recall, 0.5);
        assert!((scores.micro_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(scores.subset_accuracy, 0.0);
    }

    #[test]
    fn multilabel_both_empty_counts_as_correct() {
        let empty: Vec<BTreeSet<GridRegion>> = vec![BTreeSet::new()];
        let scores = multilabel_metrics(&empty, &empty).unwrap();
        assert_eq!(scores.example_based_accuracy, 1.0);
        assert_eq!(scores.subset_accuracy, 1.0);
    }

    #[test]
    fn subset_accuracy_never_exceeds_example_based() {
        let preds: Vec<BTreeSet<_>> = vec![
            [GridRegion::Top].into_iter().collect(),
            [GridRegion::Left, GridRegion::Right].into_iter().collect(),
            BTreeSet::new(),
        ];
        let gts: Vec<BTreeSet<_>> = vec![
            [GridRegion::Top, GridRegion::Center].into_iter().collect(),
            [GridRegion::Left, GridRegion::Right].into_iter().collect(),
            [GridRegion::Lower].into_iter().collect(),
        ];
        let scores = multilabel_metrics(&preds, &gts).unwrap();
        assert!(scores.subset_accuracy <= scores.example_based_accuracy);
    }
}
