//! The end-to-end localization pipeline: extract the basic query from the
//! diff log, augment it with the most relevant build-log commands, scan the
//! rule filter, and rank every source file by the weighted fusion
//!
//! ```text
//! score = (1 - alpha) * sim(query, file) + alpha * w_file
//! ```
//!
//! where `w_file` is 1 when the rule filter matched the file and 0 otherwise.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{term_counts, tokenize, Corpus};
use crate::logparse::{extract_basic_query, segment_build_log, BasicQuery, CommandSegment, LogPatterns};
use crate::rules::{builtin_rules, filter_corpus, Rule, RuleMatch};
use crate::vsm::{cosine, rank_by_similarity, vectorize, VsmError, WeightScheme, WeightedVector};

/// Default fusion weight.
pub const DEFAULT_ALPHA: f64 = 0.3;
/// Default number of command segments appended to the query.
pub const DEFAULT_AUGMENT_TOP_K: usize = 1;

#[derive(Debug, Error)]
pub enum RankerError {
    #[error("corpus contains no text documents")]
    EmptyCorpus,
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Vsm(#[from] VsmError),
}

/// Everything the pipeline needs besides the inputs themselves.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub scheme: WeightScheme,
    /// How many top-ranked command segments to append to the query.
    pub augment_top_k: usize,
    pub patterns: LogPatterns,
    pub rules: Vec<Rule>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            scheme: WeightScheme::default(),
            augment_top_k: DEFAULT_AUGMENT_TOP_K,
            patterns: LogPatterns::default(),
            rules: builtin_rules(),
        }
    }
}

/// The basic query plus the retrieved command-segment texts.
#[derive(Debug, Clone, Default)]
pub struct AugmentedQuery {
    pub basic: BasicQuery,
    /// Texts of the appended segments, in retrieval order.
    pub augmentation: Vec<String>,
    /// `tokenize` output of the basic file names followed by each appended
    /// segment text; multiplicity is preserved.
    pub terms: Vec<String>,
}

impl AugmentedQuery {
    pub fn term_freqs(&self) -> BTreeMap<String, u32> {
        term_counts(&self.terms)
    }
}

/// Rank the command segments against the basic query and append the top `k`
/// segment texts. Appends nothing when `k` is zero, the basic query is
/// empty, or no segment has positive similarity.
pub fn augment_query(
    basic: &BasicQuery,
    segments: &[CommandSegment],
    k: usize,
    scheme: WeightScheme,
) -> Result<AugmentedQuery, VsmError> {
    let mut query = AugmentedQuery {
        basic: basic.clone(),
        augmentation: Vec::new(),
        terms: basic.terms.clone(),
    };
    if k == 0 || basic.terms.is_empty() || segments.is_empty() {
        return Ok(query);
    }

    let mut df: HashMap<String, u32> = HashMap::new();
    for segment in segments {
        for term in segment.term_freqs.keys() {
            *df.entry(term.clone()).or_insert(0) += 1;
        }
    }
    let n = segments.len() as u32;
    let segment_vectors: Vec<WeightedVector> = segments
        .iter()
        .map(|s| vectorize(&s.term_freqs, &df, n, scheme))
        .collect::<Result<_, _>>()?;
    let query_vector = vectorize(&term_counts(&basic.terms), &df, n, scheme)?;

    for (segment_idx, sim) in rank_by_similarity(&query_vector, &segment_vectors)
        .into_iter()
        .take(k)
    {
        if sim <= 0.0 {
            break;
        }
        let text = &segments[segment_idx].text;
        query.terms.extend(tokenize(text));
        query.augmentation.push(text.clone());
    }
    Ok(query)
}

/// Fuse similarity and rule-filter membership into one score.
pub fn score_file(sim: f64, hf_matched: bool, alpha: f64) -> Result<f64, RankerError> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(RankerError::InvalidAlpha(alpha));
    }
    let w = if hf_matched { 1.0 } else { 0.0 };
    Ok((1.0 - alpha) * sim + alpha * w)
}

/// One row of a ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub path: String,
    pub score: f64,
    pub hf_matched: bool,
}

/// The full scored ranking of a package's files.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    /// Scores non-increasing; ties broken by ascending path.
    pub entries: Vec<RankedEntry>,
    pub alpha: f64,
}

impl RankedList {
    pub fn paths(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.path.clone()).collect()
    }
}

/// Per-package state that does not depend on `alpha`: similarities, rule
/// hits, and the augmented query. Lets a weight sweep reuse the expensive
/// indexing work.
#[derive(Debug, Clone)]
pub struct Localization {
    paths: Vec<String>,
    sims: Vec<f64>,
    hf: Vec<bool>,
    rule_matches: Vec<RuleMatch>,
    query: AugmentedQuery,
}

impl Localization {
    /// Rank all files at the given fusion weight.
    pub fn rank(&self, alpha: f64) -> Result<RankedList, RankerError> {
        let mut entries = Vec::with_capacity(self.paths.len());
        for i in 0..self.paths.len() {
            entries.push(RankedEntry {
                path: self.paths[i].clone(),
                score: score_file(self.sims[i], self.hf[i], alpha)?,
                hf_matched: self.hf[i],
            });
        }
        // Input is path-ordered, so a stable sort on descending score keeps
        // the tie-break on ascending path.
        entries.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
        Ok(RankedList { entries, alpha })
    }

    /// Rule evidence for every matched file, sorted by path.
    pub fn rule_matches(&self) -> &[RuleMatch] {
        &self.rule_matches
    }

    pub fn query(&self) -> &AugmentedQuery {
        &self.query
    }

    /// Cosine similarity per document, in corpus (path) order.
    pub fn similarities(&self) -> &[f64] {
        &self.sims
    }
}

/// Run query extraction, augmentation, rule filtering, and per-file scoring.
pub fn prepare(
    corpus: &Corpus,
    diff_log: &str,
    build_log: &str,
    options: &PipelineOptions,
) -> Result<Localization, RankerError> {
    if corpus.n_docs() == 0 {
        return Err(RankerError::EmptyCorpus);
    }

    let basic = extract_basic_query(diff_log, &options.patterns);
    if basic.file_names.is_empty() {
        log::warn!("no file names found in the diff log; ranking degrades to rule hits only");
    }
    let segments = segment_build_log(build_log, &options.patterns);
    let query = augment_query(&basic, &segments, options.augment_top_k, options.scheme)?;

    let rule_matches = filter_corpus(corpus, &options.rules);
    let matched: HashSet<&str> = rule_matches.iter().map(|m| m.path.as_str()).collect();

    let n_docs = corpus.n_docs() as u32;
    let query_vector = vectorize(&query.term_freqs(), corpus.df(), n_docs, options.scheme)?;
    let sims: Vec<f64> = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let doc_vector = vectorize(&doc.term_freqs, corpus.df(), n_docs, options.scheme)?;
            Ok(cosine(&query_vector, &doc_vector))
        })
        .collect::<Result<_, VsmError>>()?;

    let paths: Vec<String> = corpus.documents().iter().map(|d| d.path.clone()).collect();
    let hf: Vec<bool> = paths.iter().map(|p| matched.contains(p.as_str())).collect();

    Ok(Localization {
        paths,
        sims,
        hf,
        rule_matches,
        query,
    })
}

/// One-shot pipeline: [`prepare`] followed by [`Localization::rank`].
pub fn localize(
    corpus: &Corpus,
    diff_log: &str,
    build_log: &str,
    alpha: f64,
    options: &PipelineOptions,
) -> Result<RankedList, RankerError> {
    prepare(corpus, diff_log, build_log, options)?.rank(alpha)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matched_dominates_at_equal_similarity(sim in 0.0f64..=1.0, alpha in 0.0f64..=1.0) {
            let matched = score_file(sim, true, alpha).unwrap();
            let unmatched = score_file(sim, false, alpha).unwrap();
            prop_assert!(matched >= unmatched);
            if alpha > 0.0 {
                prop_assert!(matched > unmatched);
            }
        }

        #[test]
        fn alpha_monotonicity(sim in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // Raising alpha never lowers a matched file's score and never
            // raises an unmatched file's score.
            prop_assert!(score_file(sim, true, hi).unwrap() >= score_file(sim, true, lo).unwrap() - 1e-12);
            prop_assert!(score_file(sim, false, hi).unwrap() <= score_file(sim, false, lo).unwrap() + 1e-12);
        }

        #[test]
        fn scores_stay_in_unit_interval(sim in 0.0f64..=1.0, hf: bool, alpha in 0.0f64..=1.0) {
            let s = score_file(sim, hf, alpha).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
