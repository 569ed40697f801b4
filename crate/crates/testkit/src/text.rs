//! Brute-force oracles for the n-gram text metrics.
//!
//! These recount everything with flat scans over token slices (no shared
//! n-gram tables with the implementation) and follow the written metric
//! definitions step by step.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Tokens = Vec<String>;

fn count_occurrences(haystack: &[String], needle: &[String]) -> usize {
    if haystack.len() < needle.len() || needle.is_empty() {
        return 0;
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| &haystack[i..i + needle.len()] == needle)
        .count()
}

fn distinct_ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    let mut grams: Vec<Vec<String>> = Vec::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            let gram = tokens[i..i + n].to_vec();
            if !grams.contains(&gram) {
                grams.push(gram);
            }
        }
    }
    grams
}

/// Corpus BLEU-4 recomputed by direct scanning: clipped counts per distinct
/// candidate n-gram, geometric mean of the four precisions, brevity
/// penalty with closest (tie: shorter) reference length.
pub fn bleu4_oracle(candidates: &[Tokens], references: &[Vec<Tokens>]) -> f64 {
    let mut clipped = [0usize; 4];
    let mut total = [0usize; 4];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for (cand, refs) in candidates.iter().zip(references) {
        cand_len += cand.len();
        let mut best_ref = refs[0].len();
        for r in refs {
            let better = r.len().abs_diff(cand.len()) < best_ref.abs_diff(cand.len())
                || (r.len().abs_diff(cand.len()) == best_ref.abs_diff(cand.len())
                    && r.len() < best_ref);
            if better {
                best_ref = r.len();
            }
        }
        ref_len += best_ref;

        for n in 1..=4 {
            if cand.len() >= n {
                total[n - 1] += cand.len() - n + 1;
            }
            for gram in distinct_ngrams(cand, n) {
                let in_cand = count_occurrences(cand, &gram);
                let max_in_refs = refs
                    .iter()
                    .map(|r| count_occurrences(r, &gram))
                    .max()
                    .unwrap_or(0);
                clipped[n - 1] += in_cand.min(max_in_refs);
            }
        }
    }

    if cand_len == 0 {
        return 0.0;
    }
    let mut product = 1.0;
    for n in 0..4 {
        if total[n] == 0 || clipped[n] == 0 {
            return 0.0;
        }
        product *= clipped[n] as f64 / total[n] as f64;
    }
    let brevity = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    100.0 * brevity * product.powf(0.25)
}

/// Recursive-memo LCS, structurally different from an iterative table.
fn lcs_recursive(a: &[String], b: &[String], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let key = (a.len(), b.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let value = if a[a.len() - 1] == b[b.len() - 1] {
        lcs_recursive(&a[..a.len() - 1], &b[..b.len() - 1], memo) + 1
    } else {
        lcs_recursive(&a[..a.len() - 1], b, memo).max(lcs_recursive(a, &b[..b.len() - 1], memo))
    };
    memo.insert(key, value);
    value
}

/// ROUGE-L oracle: per-pair F-beta (beta 1.2) over the recursive LCS, best
/// reference, corpus mean, x100.
pub fn rouge_l_oracle(candidates: &[Tokens], references: &[Vec<Tokens>]) -> f64 {
    let beta_sq = 1.2f64 * 1.2;
    let mut sum = 0.0;
    for (cand, refs) in candidates.iter().zip(references) {
        let mut best = 0.0f64;
        for r in refs {
            let mut memo = HashMap::new();
            let lcs = lcs_recursive(cand, r, &mut memo);
            if lcs == 0 {
                continue;
            }
            let p = lcs as f64 / cand.len() as f64;
            let rec = lcs as f64 / r.len() as f64;
            best = best.max((1.0 + beta_sq) * p * rec / (rec + beta_sq * p));
        }
        sum += best;
    }
    100.0 * sum / candidates.len() as f64
}

/// CIDEr-D oracle: dense per-n vocabularies with explicitly constructed
/// TF-IDF vectors, clipped-dot cosine, Gaussian length penalty (sigma 6),
/// mean over n and references, x10, corpus mean.
pub fn cider_d_oracle(candidates: &[Tokens], references: &[Vec<Tokens>]) -> f64 {
    let docs = candidates.len();
    let log_docs = (docs.max(2) as f64).ln();
    let sigma = 6.0f64;

    let mut corpus_sum = 0.0;
    for (cand, refs) in candidates.iter().zip(references) {
        let mut per_cand = 0.0;
        for n in 1..=4 {
            // Vocabulary of this n over the candidate and its references.
            let mut vocab = distinct_ngrams(cand, n);
            for r in refs {
                for gram in distinct_ngrams(r, n) {
                    if !vocab.contains(&gram) {
                        vocab.push(gram);
                    }
                }
            }
            // Document frequency of each vocab entry over ALL reference sets.
            let idf: Vec<f64> = vocab
                .iter()
                .map(|gram| {
                    let df = references
                        .iter()
                        .filter(|doc_refs| {
                            doc_refs.iter().any(|r| count_occurrences(r, gram) > 0)
                        })
                        .count();
                    log_docs - (df.max(1) as f64).ln()
                })
                .collect();

            let vector = |tokens: &[String]| -> Vec<f64> {
                vocab
                    .iter()
                    .zip(&idf)
                    .map(|(gram, idf)| count_occurrences(tokens, gram) as f64 * idf)
                    .collect()
            };
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

            let cand_vec = vector(cand);
            let cand_norm = norm(&cand_vec);
            let mut sim_sum = 0.0;
            for r in refs {
                let ref_vec = vector(r);
                let ref_norm = norm(&ref_vec);
                if cand_norm == 0.0 || ref_norm == 0.0 {
                    continue;
                }
                let dot: f64 = cand_vec
                    .iter()
                    .zip(&ref_vec)
                    .map(|(&c, &rv)| c.min(rv) * rv)
                    .sum();
                let delta = cand.len() as f64 - r.len() as f64;
                sim_sum += (dot / (cand_norm * ref_norm))
                    * (-(delta * delta) / (2.0 * sigma * sigma)).exp();
            }
            per_cand += sim_sum / refs.len() as f64;
        }
        corpus_sum += 10.0 * per_cand / 4.0;
    }
    corpus_sum / docs as f64
}

/// Closed-form METEOR sentence score from hand-derived alignment counts.
pub fn meteor_from_alignment(matches: usize, chunks: usize, cand_len: usize, ref_len: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let p = matches as f64 / cand_len as f64;
    let r = matches as f64 / ref_len as f64;
    let f_mean = p * r / (0.9 * p + 0.1 * r);
    f_mean * (1.0 - 0.5 * (chunks as f64 / matches as f64).powi(3))
}

const WORD_POOL: [&str; 24] = [
    "a", "the", "road", "building", "new", "small", "large", "appears", "built", "removed",
    "across", "near", "field", "trees", "houses", "along", "row", "edge", "corner", "two",
    "some", "many", "now", "area",
];

/// Random sentence of `len` pool words.
pub fn random_sentence(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len)
        .map(|_| WORD_POOL[rng.gen_range(0..WORD_POOL.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random scoring corpus: `docs` candidates, each with `refs` references of
/// 4..=9 tokens drawn from a small pool so n-gram overlaps actually occur.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    docs: usize,
    refs: usize,
) -> (Vec<Tokens>, Vec<Vec<Tokens>>) {
    let sentence_tokens = |rng: &mut ChaCha8Rng| -> Tokens {
        let len = rng.gen_range(4..=9);
        (0..len)
            .map(|_| WORD_POOL[rng.gen_range(0..WORD_POOL.len())].to_string())
            .collect()
    };
    let candidates: Vec<Tokens> = (0..docs).map(|_| sentence_tokens(rng)).collect();
    let references: Vec<Vec<Tokens>> = (0..docs)
        .map(|i| {
            let mut doc_refs: Vec<Tokens> = (0..refs - 1).map(|_| sentence_tokens(rng)).collect();
            // Bias one reference toward the candidate so scores are nonzero.
            if rng.gen_bool(0.7) {
                doc_refs.push(candidates[i].clone());
            } else {
                doc_refs.push(sentence_tokens(rng));
            }
            doc_refs
        })
        .collect();
    (candidates, references)
}
