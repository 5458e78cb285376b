//! Pre-training subset definitions, reservoir sampling, and corpus
//! composition statistics.
//!
//! Five subsets are derived from a normalized stream:
//!
//! * `Naive` — every tweet is eligible; the sample is random.
//! * `HashtagAny` — at least one hashtag anywhere and no emojis.
//! * `EmojiAny` — at least one emoji anywhere and no hashtags.
//! * `HashtagEnd` / `EmojiEnd` — the cue subset whose cue is also the last
//!   term of the tweet.
//!
//! "Last term" skips trailing punctuation units but not trailing specials:
//! a tweet ending in a URL does not end with its cue. The two cue-anywhere
//! subsets are mutually exclusive by construction, so a tweet carrying both
//! cue classes belongs only to `Naive`.

use serde::{Deserialize, Serialize};

use std::collections::BTreeSet;

use crate::seed;
use crate::text_norm::{NormalizedTweet, UnitKind};

/// Composition of the corpus the subset definitions were originally reported
/// on (2.4B tweets). Documented for reference; they are properties of that
/// corpus, not targets this toolkit can reproduce.
pub mod reference {
    /// Tweets with at least one hashtag and no emoji.
    pub const PCT_HASHTAG_ONLY: f64 = 18.5;
    /// Tweets with at least one emoji and no hashtag.
    pub const PCT_EMOJI_ONLY: f64 = 11.5;
    /// Tweets with both cue classes.
    pub const PCT_BOTH: f64 = 2.2;
    /// Tweets whose last term is a hashtag.
    pub const PCT_HASHTAG_LAST: f64 = 7.1;
    /// Tweets whose last term is an emoji.
    pub const PCT_EMOJI_LAST: f64 = 6.7;
    /// Mean hashtags per tweet within the hashtag-any subset.
    pub const AVG_HASHTAGS_IN_HASHTAG_ANY: f64 = 1.83;
    /// Mean emojis per tweet within the emoji-any subset.
    pub const AVG_EMOJIS_IN_EMOJI_ANY: f64 = 1.88;
}

/// The five pre-training subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetTag {
    Naive,
    HashtagAny,
    EmojiAny,
    HashtagEnd,
    EmojiEnd,
}

impl SubsetTag {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "naive" => SubsetTag::Naive,
            "hashtag_any" => SubsetTag::HashtagAny,
            "emoji_any" => SubsetTag::EmojiAny,
            "hashtag_end" => SubsetTag::HashtagEnd,
            "emoji_end" => SubsetTag::EmojiEnd,
            _ => return None,
        })
    }
}

/// Kind of the last non-punctuation unit, if any.
fn last_term_kind(t: &NormalizedTweet) -> Option<UnitKind> {
    t.units.iter().rev().find(|u| u.kind != UnitKind::Punct).map(|u| u.kind)
}

/// All subsets the tweet belongs to.
pub fn classify(t: &NormalizedTweet) -> BTreeSet<SubsetTag> {
    let mut hashtags = 0usize;
    let mut emojis = 0usize;
    for u in &t.units {
        match u.kind {
            UnitKind::Hashtag => hashtags += 1,
            UnitKind::Emoji => emojis += 1,
            _ => {}
        }
    }
    let mut tags = BTreeSet::from([SubsetTag::Naive]);
    let last = last_term_kind(t);
    if hashtags > 0 && emojis == 0 {
        tags.insert(SubsetTag::HashtagAny);
        if last == Some(UnitKind::Hashtag) {
            tags.insert(SubsetTag::HashtagEnd);
        }
    }
    if emojis > 0 && hashtags == 0 {
        tags.insert(SubsetTag::EmojiAny);
        if last == Some(UnitKind::Emoji) {
            tags.insert(SubsetTag::EmojiEnd);
        }
    }
    tags
}

/// Membership test without building the full set.
pub fn matches_tag(t: &NormalizedTweet, tag: SubsetTag) -> bool {
    classify(t).contains(&tag)
}

/// Fixed-size uniform sample over a stream (Algorithm R).
///
/// The replacement index for the item at eligible position `i` is drawn from
/// an RNG seeded with `substream(seed, i)`, so the sample is a pure function
/// of the eligible stream order and the seed, and any run can be replayed.
#[derive(Debug, Clone)]
pub struct Reservoir<T> {
    capacity: usize,
    seed: u64,
    seen: u64,
    items: Vec<T>,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self { capacity, seed, seen: 0, items: Vec::with_capacity(capacity.min(1024)) }
    }

    /// Count of eligible items offered so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn push(&mut self, item: T) {
        use rand::RngExt;
        let i = self.seen;
        self.seen += 1;
        if self.capacity == 0 {
            return;
        }
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let mut rng = seed::rng(seed::substream(self.seed, i));
        let j = rng.random_range(0..=i);
        if (j as usize) < self.capacity {
            self.items[j as usize] = item;
        }
    }

    /// Weighted union of two reservoirs drawn from disjoint populations.
    ///
    /// The number of survivors taken from `self` follows the hypergeometric
    /// law for a uniform sample of the combined population; survivors are
    /// then picked from each side without replacement. Deterministic given
    /// both reservoirs and their seeds, though not byte-equal to a single
    /// sequential pass over the concatenated stream.
    pub fn merge(self, other: Reservoir<T>) -> Reservoir<T> {
        use rand::seq::SliceRandom;
        use rand::RngExt;
        let capacity = self.capacity;
        let merge_seed = seed::splitmix64(
            seed::substream(self.seed, self.seen) ^ seed::substream(other.seed, other.seen),
        );
        let mut rng = seed::rng(merge_seed);

        let total = self.seen + other.seen;
        let take = (capacity as u64).min(total);
        let (mut rem_a, mut rem_b) = (self.seen, other.seen);
        let mut from_a = 0u64;
        for _ in 0..take {
            let u = rng.random_range(0..rem_a + rem_b);
            if u < rem_a {
                from_a += 1;
                rem_a -= 1;
            } else {
                rem_b -= 1;
            }
        }
        let mut a_items = self.items;
        let mut b_items = other.items;
        a_items.shuffle(&mut rng);
        b_items.shuffle(&mut rng);
        a_items.truncate(from_a as usize);
        b_items.truncate((take - from_a) as usize);
        a_items.extend(b_items);

        Reservoir { capacity, seed: merge_seed, seen: total, items: a_items }
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

/// Reservoir-sample `target_count` tweets matching `tag`. Emits fewer when
/// the stream has fewer matches; output order is the reservoir's, not the
/// stream's.
pub fn derive<I>(stream: I, tag: SubsetTag, target_count: usize, seed: u64) -> Vec<NormalizedTweet>
where
    I: IntoIterator<Item = NormalizedTweet>,
{
    let mut res = Reservoir::new(target_count, seed);
    for t in stream {
        if matches_tag(&t, tag) {
            res.push(t);
        }
    }
    res.into_items()
}

/// Corpus composition, percentages in `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n: u64,
    pub pct_hashtag_only: f64,
    pub pct_emoji_only: f64,
    pub pct_both: f64,
    pub pct_hashtag_last: f64,
    pub pct_emoji_last: f64,
    pub avg_hashtags_in_hashtag_any: f64,
    pub avg_emojis_in_emoji_any: f64,
}

/// Single-pass exact counters behind [`CorpusStats`]. Shardable: counters
/// from parallel shards merge by summation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsAccumulator {
    pub n: u64,
    pub hashtag_only: u64,
    pub emoji_only: u64,
    pub both: u64,
    pub hashtag_last: u64,
    pub emoji_last: u64,
    pub hashtags_in_hashtag_any: u64,
    pub emojis_in_emoji_any: u64,
}

impl StatsAccumulator {
    pub fn push(&mut self, t: &NormalizedTweet) {
        let mut hashtags = 0u64;
        let mut emojis = 0u64;
        for u in &t.units {
            match u.kind {
                UnitKind::Hashtag => hashtags += 1,
                UnitKind::Emoji => emojis += 1,
                _ => {}
            }
        }
        self.n += 1;
        if hashtags > 0 && emojis == 0 {
            self.hashtag_only += 1;
            self.hashtags_in_hashtag_any += hashtags;
        }
        if emojis > 0 && hashtags == 0 {
            self.emoji_only += 1;
            self.emojis_in_emoji_any += emojis;
        }
        if hashtags > 0 && emojis > 0 {
            self.both += 1;
        }
        match last_term_kind(t) {
            Some(UnitKind::Hashtag) => self.hashtag_last += 1,
            Some(UnitKind::Emoji) => self.emoji_last += 1,
            _ => {}
        }
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        self.n += other.n;
        self.hashtag_only += other.hashtag_only;
        self.emoji_only += other.emoji_only;
        self.both += other.both;
        self.hashtag_last += other.hashtag_last;
        self.emoji_last += other.emoji_last;
        self.hashtags_in_hashtag_any += other.hashtags_in_hashtag_any;
        self.emojis_in_emoji_any += other.emojis_in_emoji_any;
    }

    pub fn finalize(&self) -> CorpusStats {
        let pct = |x: u64| if self.n == 0 { 0.0 } else { 100.0 * x as f64 / self.n as f64 };
        let avg = |sum: u64, members: u64| if members == 0 { 0.0 } else { sum as f64 / members as f64 };
        CorpusStats {
            n: self.n,
            pct_hashtag_only: pct(self.hashtag_only),
            pct_emoji_only: pct(self.emoji_only),
            pct_both: pct(self.both),
            pct_hashtag_last: pct(self.hashtag_last),
            pct_emoji_last: pct(self.emoji_last),
            avg_hashtags_in_hashtag_any: avg(self.hashtags_in_hashtag_any, self.hashtag_only),
            avg_emojis_in_emoji_any: avg(self.emojis_in_emoji_any, self.emoji_only),
        }
    }
}

/// One-shot statistics over a stream.
pub fn stats<'a, I>(stream: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a NormalizedTweet>,
{
    let mut acc = StatsAccumulator::default();
    for t in stream {
        acc.push(t);
    }
    acc.finalize()
}
