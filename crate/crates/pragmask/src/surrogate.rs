//! Surrogate fine-tuning dataset construction.
//!
//! Hashtags and emojis that users place at the end of a post act as free
//! class labels. This module extracts the end-position cue as the label
//! (the last one, when several trail the post), removes that single unit
//! from the text, prunes labels rarer than a minimum count, and buckets
//! records into train/dev/test splits by hashing `(seed, id)` so that the
//! assignment is independent of stream order and sharding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::seed;
use crate::text_norm::{NormalizedTweet, UnitKind};

/// Substream domain for split bucketing.
const DOMAIN_SPLIT: u64 = 3;

/// Which cue class serves as the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Hashtag,
    Emoji,
}

impl LabelKind {
    pub fn unit_kind(self) -> UnitKind {
        match self {
            LabelKind::Hashtag => UnitKind::Hashtag,
            LabelKind::Emoji => UnitKind::Emoji,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hashtag" => Some(LabelKind::Hashtag),
            "emoji" => Some(LabelKind::Emoji),
            _ => None,
        }
    }
}

/// Dataset split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn code(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// One surrogate classification example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurrogateRecord {
    /// The tweet with the label unit removed.
    pub tweet: NormalizedTweet,
    pub label: String,
    pub split: Split,
}

/// Take the end-position cue as the label and remove that single unit.
///
/// The "end position" skips trailing punctuation. When several cue units
/// trail the tweet, the last one is the label and the earlier ones stay in
/// the text. Returns `None` when the last term is not a cue of `kind`.
pub fn extract_label(
    t: &NormalizedTweet,
    kind: LabelKind,
) -> Option<(String, NormalizedTweet)> {
    let idx = t.units.iter().rposition(|u| u.kind != UnitKind::Punct)?;
    if t.units[idx].kind != kind.unit_kind() {
        return None;
    }
    let label = t.units[idx].surface.clone();
    let parts = t
        .units
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, u)| (u.surface.clone(), u.kind))
        .collect();
    Some((label, NormalizedTweet::from_parts(t.id.clone(), parts)))
}

/// Exact label counts with a frequency floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocabulary {
    /// `(surface, count)` sorted by descending count, ties by surface.
    pub labels: Vec<(String, u64)>,
    pub min_count: u64,
    pub kind: LabelKind,
}

impl LabelVocabulary {
    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|(s, _)| s == label)
    }

    /// Write as `<surface>\t<count>` lines.
    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        for (surface, count) in &self.labels {
            writeln!(w, "{surface}\t{count}")?;
        }
        Ok(())
    }

    pub fn read(r: impl BufRead, min_count: u64, kind: LabelKind) -> Result<Self, VocabReadError> {
        let mut labels = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (surface, count) = line
                .split_once('\t')
                .ok_or(VocabReadError::Malformed(lineno))?;
            let count: u64 = count.parse().map_err(|_| VocabReadError::Malformed(lineno))?;
            labels.push((surface.to_string(), count));
        }
        labels.retain(|&(_, c)| c >= min_count);
        sort_labels(&mut labels);
        Ok(Self { labels, min_count, kind })
    }
}

#[derive(Debug, Error)]
pub enum VocabReadError {
    #[error("label vocab io: {0}")]
    Io(#[from] std::io::Error),
    #[error("label vocab line {0}: expected `<surface>\\t<count>`")]
    Malformed(usize),
}

fn sort_labels(labels: &mut [(String, u64)]) {
    labels.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Shardable exact counter over label surfaces.
#[derive(Debug, Clone, Default)]
pub struct LabelCounter {
    counts: HashMap<String, u64>,
}

impl LabelCounter {
    pub fn push(&mut self, label: &str) {
        *self.counts.entry(label.to_string()).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: LabelCounter) {
        for (label, count) in other.counts {
            *self.counts.entry(label).or_insert(0) += count;
        }
    }

    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    /// Drop labels below `min_count` and freeze the ordering.
    pub fn build(self, min_count: u64, kind: LabelKind) -> LabelVocabulary {
        let mut labels: Vec<(String, u64)> =
            self.counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        sort_labels(&mut labels);
        LabelVocabulary { labels, min_count, kind }
    }
}

/// Count a label stream and keep those occurring at least `min_count` times.
pub fn build_vocab<I, S>(labels: I, min_count: u64, kind: LabelKind) -> LabelVocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counter = LabelCounter::default();
    for label in labels {
        counter.push(label.as_ref());
    }
    counter.build(min_count, kind)
}

#[derive(Debug, Error)]
#[error("split ratios must be non-negative and sum to 1, got {0:?}")]
pub struct RatioError(pub (f64, f64, f64));

/// Validate `(train, dev, test)` ratios.
pub fn validate_ratios(ratios: (f64, f64, f64)) -> Result<(), RatioError> {
    let (a, b, c) = ratios;
    if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(RatioError(ratios));
    }
    Ok(())
}

/// Deterministic split assignment: hash `(seed, id)` into `[0, 1)` and
/// bucket by cumulative ratios. A pure function of its arguments, so
/// re-sharding the stream never moves a record between splits.
pub fn assign_split(global_seed: u64, id: &str, ratios: (f64, f64, f64)) -> Split {
    let h = seed::substream(seed::record_seed(global_seed, id), DOMAIN_SPLIT);
    // Top 53 bits give a uniform double in [0, 1).
    let fraction = (h >> 11) as f64 / (1u64 << 53) as f64;
    let (train, dev, _) = ratios;
    if fraction < train {
        Split::Train
    } else if fraction < train + dev {
        Split::Dev
    } else {
        Split::Test
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text_norm::NormalizedTweet;

    fn tweet(parts: &[(&str, UnitKind)]) -> NormalizedTweet {
        NormalizedTweet::from_parts(
            "t",
            parts.iter().map(|(s, k)| (s.to_string(), *k)).collect(),
        )
    }

    fn five_words() -> Vec<(&'static str, UnitKind)> {
        vec![
            ("a", UnitKind::Word),
            ("b", UnitKind::Word),
            ("c", UnitKind::Word),
            ("d", UnitKind::Word),
            ("e", UnitKind::Word),
        ]
    }

    #[test]
    fn last_of_several_trailing_hashtags_is_the_label() {
        let mut parts = five_words();
        parts.push(("#x", UnitKind::Hashtag));
        parts.push(("#y", UnitKind::Hashtag));
        let t = tweet(&parts);
        let (label, stripped) = extract_label(&t, LabelKind::Hashtag).unwrap();
        assert_eq!(label, "#y");
        let surfaces: Vec<&str> = stripped.units.iter().map(|u| u.surface.as_str()).collect();
        assert_eq!(surfaces, ["a", "b", "c", "d", "e", "#x"]);
    }

    #[test]
    fn single_end_emoji() {
        let mut parts = five_words();
        parts.push(("😀", UnitKind::Emoji));
        let t = tweet(&parts);
        let (label, stripped) = extract_label(&t, LabelKind::Emoji).unwrap();
        assert_eq!(label, "😀");
        assert_eq!(stripped.units.len(), 5);
    }

    #[test]
    fn no_end_cue_returns_none() {
        let t = tweet(&five_words());
        assert!(extract_label(&t, LabelKind::Hashtag).is_none());
        assert!(extract_label(&t, LabelKind::Emoji).is_none());
    }

    #[test]
    fn trailing_punct_skipped() {
        let mut parts = five_words();
        parts.push(("#x", UnitKind::Hashtag));
        parts.push(("!!", UnitKind::Punct));
        let t = tweet(&parts);
        let (label, stripped) = extract_label(&t, LabelKind::Hashtag).unwrap();
        assert_eq!(label, "#x");
        let surfaces: Vec<&str> = stripped.units.iter().map(|u| u.surface.as_str()).collect();
        assert_eq!(surfaces, ["a", "b", "c", "d", "e", "!!"]);
    }

    #[test]
    fn wrong_kind_at_end_returns_none() {
        let mut parts = five_words();
        parts.push(("#x", UnitKind::Hashtag));
        let t = tweet(&parts);
        assert!(extract_label(&t, LabelKind::Emoji).is_none());
    }

    #[test]
    fn reappending_the_label_roundtrips() {
        let mut parts = five_words();
        parts.push(("#keep", UnitKind::Hashtag));
        parts.push(("#label", UnitKind::Hashtag));
        let t = tweet(&parts);
        let (label, stripped) = extract_label(&t, LabelKind::Hashtag).unwrap();
        let mut rebuilt: Vec<(String, UnitKind)> =
            stripped.units.iter().map(|u| (u.surface.clone(), u.kind)).collect();
        rebuilt.push((label.clone(), UnitKind::Hashtag));
        let rebuilt = NormalizedTweet::from_parts(t.id.clone(), rebuilt);
        assert_eq!(rebuilt, t);
        let (label2, stripped2) = extract_label(&rebuilt, LabelKind::Hashtag).unwrap();
        assert_eq!(label2, label);
        assert_eq!(stripped2, stripped);
    }

    #[test]
    fn build_vocab_hand_count() {
        let labels = ["#a", "#a", "#a", "#b"];
        let v = build_vocab(labels, 2, LabelKind::Hashtag);
        assert_eq!(v.labels, vec![("#a".to_string(), 3)]);
        assert!(v.contains("#a"));
        assert!(!v.contains("#b"));
    }

    #[test]
    fn build_vocab_min_count_one_keeps_all() {
        let labels = ["#a", "#b", "#b"];
        let v = build_vocab(labels, 1, LabelKind::Hashtag);
        assert_eq!(v.labels.len(), 2);
        // Descending count, ties broken by surface.
        assert_eq!(v.labels[0].0, "#b");
    }

    #[test]
    fn build_vocab_all_below_threshold_is_empty() {
        let labels = ["#a", "#b"];
        let v = build_vocab(labels, 10, LabelKind::Hashtag);
        assert!(v.labels.is_empty());
    }

    #[test]
    fn vocab_file_roundtrip() {
        let v = build_vocab(["#a", "#a", "#b", "#b", "#c"], 2, LabelKind::Hashtag);
        let mut buf = Vec::new();
        v.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "#a\t2\n#b\t2\n");
        let back = LabelVocabulary::read(buf.as_slice(), 2, LabelKind::Hashtag).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn counter_shards_merge_to_same_vocab() {
        let labels: Vec<String> = (0..100).map(|i| format!("#l{}", i % 7)).collect();
        let whole = build_vocab(labels.iter(), 3, LabelKind::Hashtag);
        let mut merged = LabelCounter::default();
        for chunk in labels.chunks(9) {
            let mut shard = LabelCounter::default();
            for l in chunk {
                shard.push(l);
            }
            merged.merge(shard);
        }
        assert_eq!(merged.build(3, LabelKind::Hashtag), whole);
    }

    #[test]
    fn split_all_train_under_degenerate_ratios() {
        for i in 0..100 {
            assert_eq!(assign_split(1, &format!("id{i}"), (1.0, 0.0, 0.0)), Split::Train);
        }
    }

    #[test]
    fn split_is_pure_and_order_independent() {
        let a = assign_split(7, "record-42", (0.8, 0.1, 0.1));
        let b = assign_split(7, "record-42", (0.8, 0.1, 0.1));
        assert_eq!(a, b);
    }

    #[test]
    fn ratio_validation() {
        assert!(validate_ratios((0.8, 0.1, 0.1)).is_ok());
        assert!(validate_ratios((1.0, 0.0, 0.0)).is_ok());
        assert!(validate_ratios((0.5, 0.2, 0.2)).is_err());
        assert!(validate_ratios((-0.1, 1.0, 0.1)).is_err());
    }
}
