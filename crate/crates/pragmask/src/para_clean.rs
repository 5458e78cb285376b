//! Paraphrase cleaning with word-trigram similarity.
//!
//! A paraphrase generator produces up to ten candidates per original post.
//! Three rules drop the useless ones:
//!
//! 1. near-copies of the original (similarity above the copy threshold,
//!    0.95 by default);
//! 2. mutual near-duplicates — scanning candidates in order, any candidate
//!    more similar than the mutual threshold (0.50) to an earlier *kept*
//!    candidate is dropped, so the first of a redundant group survives;
//! 3. unrelated outputs sharing nothing with the original (similarity of
//!    exactly 0 by default).
//!
//! Similarity is the Jaccard coefficient over sets of word-level n-grams,
//! where words are unit surfaces (case-sensitive) and `n` shrinks to the
//! shorter text when it has fewer than three units, so short posts still
//! compare meaningfully. A Dice variant is available behind a flag since
//! the score definition is configurable.

use serde::{Deserialize, Serialize};

use std::collections::HashSet;

use crate::text_norm::NormalizedTweet;

/// An original post with its generated paraphrase candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParaphraseSet {
    pub original_id: String,
    pub original: NormalizedTweet,
    pub candidates: Vec<NormalizedTweet>,
}

/// Outcome for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Kept,
    DroppedCopy,
    DroppedMutual,
    DroppedUnrelated,
}

/// Set-overlap measure over n-gram sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    Jaccard,
    Dice,
}

/// Thresholds and measure for [`clean`].
#[derive(Debug, Clone, PartialEq)]
pub struct CleanConfig {
    /// Candidates with similarity to the original above this are copies.
    pub copy_thresh: f64,
    /// Candidates with similarity to an earlier kept candidate above this
    /// are mutual duplicates.
    pub mutual_thresh: f64,
    /// Candidates with similarity to the original at or below this are
    /// unrelated. The default of 0 drops only zero-overlap candidates.
    pub unrelated_thresh: f64,
    pub measure: Similarity,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            copy_thresh: 0.95,
            mutual_thresh: 0.50,
            unrelated_thresh: 0.0,
            measure: Similarity::Jaccard,
        }
    }
}

/// Per-set cleaning outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanReport {
    /// One verdict per candidate, in candidate order.
    pub verdicts: Vec<Verdict>,
    /// Similarity of each candidate to the original.
    pub sim_to_original: Vec<f64>,
    /// `(kept index, dropped index, similarity)` for every mutual drop.
    pub mutual_pairs_dropped: Vec<(usize, usize, f64)>,
}

impl CleanReport {
    pub fn kept_indices(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Verdict::Kept)
            .map(|(i, _)| i)
            .collect()
    }
}

fn ngram_set(units: &[String], n: usize) -> HashSet<String> {
    if units.len() < n {
        return HashSet::new();
    }
    units.windows(n).map(|w| w.join(" ")).collect()
}

fn surfaces(t: &NormalizedTweet) -> Vec<String> {
    t.units.iter().map(|u| u.surface.clone()).collect()
}

/// N-gram set similarity with the shared-`n` shortening rule:
/// `n = min(3, max(1, min(|a|, |b|)))` over unit surfaces. Two empty texts
/// score 1, one empty text scores 0.
pub fn ngram_sim(a: &NormalizedTweet, b: &NormalizedTweet, measure: Similarity) -> f64 {
    let ua = surfaces(a);
    let ub = surfaces(b);
    if ua.is_empty() && ub.is_empty() {
        return 1.0;
    }
    if ua.is_empty() || ub.is_empty() {
        return 0.0;
    }
    let n = ua.len().min(ub.len()).clamp(1, 3);
    let sa = ngram_set(&ua, n);
    let sb = ngram_set(&ub, n);
    let intersection = sa.intersection(&sb).count() as f64;
    match measure {
        Similarity::Jaccard => {
            let union = sa.union(&sb).count() as f64;
            if union == 0.0 { 0.0 } else { intersection / union }
        }
        Similarity::Dice => {
            let total = (sa.len() + sb.len()) as f64;
            if total == 0.0 { 0.0 } else { 2.0 * intersection / total }
        }
    }
}

/// Word-trigram Jaccard similarity.
pub fn trigram_sim(a: &NormalizedTweet, b: &NormalizedTweet) -> f64 {
    ngram_sim(a, b, Similarity::Jaccard)
}

/// Apply the three drop rules to one paraphrase set.
pub fn clean(set: &ParaphraseSet, cfg: &CleanConfig) -> CleanReport {
    let n = set.candidates.len();
    let sim_to_original: Vec<f64> = set
        .candidates
        .iter()
        .map(|c| ngram_sim(&set.original, c, cfg.measure))
        .collect();

    let mut verdicts = vec![Verdict::Kept; n];

    // Rule 1: near-copies of the original.
    for (verdict, sim) in verdicts.iter_mut().zip(&sim_to_original) {
        if *sim > cfg.copy_thresh {
            *verdict = Verdict::DroppedCopy;
        }
    }

    // Rule 2: mutual near-duplicates, keep-first in candidate order.
    let mut mutual_pairs_dropped = Vec::new();
    let mut kept_so_far: Vec<usize> = Vec::new();
    for (i, verdict) in verdicts.iter_mut().enumerate() {
        if *verdict != Verdict::Kept {
            continue;
        }
        let mut dropped = false;
        for &j in &kept_so_far {
            let sim = ngram_sim(&set.candidates[j], &set.candidates[i], cfg.measure);
            if sim > cfg.mutual_thresh {
                *verdict = Verdict::DroppedMutual;
                mutual_pairs_dropped.push((j, i, sim));
                dropped = true;
                break;
            }
        }
        if !dropped {
            kept_so_far.push(i);
        }
    }

    // Rule 3: unrelated to the original.
    for (verdict, sim) in verdicts.iter_mut().zip(&sim_to_original) {
        if *verdict == Verdict::Kept && *sim <= cfg.unrelated_thresh {
            *verdict = Verdict::DroppedUnrelated;
        }
    }

    CleanReport { verdicts, sim_to_original, mutual_pairs_dropped }
}
