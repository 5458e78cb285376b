//! Tweet normalization: raw text to a classified unit sequence.
//!
//! Normalization applies, in order:
//!
//! 1. a leading `RT @handle:` retweet prefix is removed entirely;
//! 2. URLs (`http://`, `https://`, bare `t.co/` links) are replaced by the
//!    special token `URL`;
//! 3. `@mentions` (Twitter handle grammar: 1–15 word characters) are replaced
//!    by the special token `USER`;
//! 4. a space is inserted between adjacent emoji grapheme clusters so each
//!    emoji becomes its own unit;
//! 5. the text is split on whitespace and every token is classified as a
//!    [`Unit`] (word, hashtag, emoji, special, or punctuation).
//!
//! The RT prefix is stripped before mention substitution so the retweeted
//! handle never leaks into the output as a `USER` unit. Normalization is
//! total: any UTF-8 input yields a (possibly empty) unit sequence, and
//! re-normalizing a tweet's canonical text reproduces the same units.

mod ext_pict;

pub use ext_pict::is_extended_pictographic;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};
use unicode_segmentation::UnicodeSegmentation;

use std::collections::HashSet;

/// Special token standing in for a mention.
pub const USER_TOKEN: &str = "USER";
/// Special token standing in for a hyperlink.
pub const URL_TOKEN: &str = "URL";

/// A tweet as it arrives from upstream crawling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
    /// Language tag as assigned by the platform, e.g. `"en"`.
    pub lang_tag: Option<String>,
}

impl RawTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into(), lang_tag: None }
    }
}

/// Lexical class of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnitKind {
    Word,
    Hashtag,
    Emoji,
    Special,
    Punct,
}

impl UnitKind {
    /// Short wire code used by the JSONL schema.
    pub fn code(self) -> &'static str {
        match self {
            UnitKind::Word => "w",
            UnitKind::Hashtag => "h",
            UnitKind::Emoji => "e",
            UnitKind::Special => "sp",
            UnitKind::Punct => "p",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "w" => UnitKind::Word,
            "h" => UnitKind::Hashtag,
            "e" => UnitKind::Emoji,
            "sp" => UnitKind::Special,
            "p" => UnitKind::Punct,
            _ => return None,
        })
    }
}

/// One whole lexical unit of a tweet: the atom of masking decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub surface: String,
    pub kind: UnitKind,
    /// Byte offsets of the surface within the canonical text.
    pub byte_span: (usize, usize),
}

/// A normalized tweet: ordered units plus the provenance id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedTweet {
    pub id: String,
    pub units: Vec<Unit>,
}

impl NormalizedTweet {
    /// Build from classified surfaces, laying out byte spans over the
    /// canonical text (surfaces joined by single spaces).
    pub fn from_parts(id: impl Into<String>, parts: Vec<(String, UnitKind)>) -> Self {
        let mut units = Vec::with_capacity(parts.len());
        let mut offset = 0usize;
        for (surface, kind) in parts {
            let len = surface.len();
            units.push(Unit { surface, kind, byte_span: (offset, offset + len) });
            offset += len + 1;
        }
        Self { id: id.into(), units }
    }

    /// Number of Word-kind units. Hashtags, emojis, specials, and
    /// punctuation do not count.
    pub fn word_count(&self) -> usize {
        self.units.iter().filter(|u| u.kind == UnitKind::Word).count()
    }

    /// Unit surfaces joined by single spaces. Byte spans index into this.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (i, u) in self.units.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&u.surface);
        }
        out
    }
}

/// Knobs the normalizer exposes.
#[derive(Debug, Clone, Default)]
pub struct NormalizeOptions {
    /// Accept Unicode alphanumerics (not just ASCII) after `#` in hashtags.
    pub unicode_hashtags: bool,
}

/// Normalize a raw tweet. Total: empty text yields an empty unit list.
pub fn normalize(raw: &RawTweet) -> NormalizedTweet {
    normalize_with(raw, &NormalizeOptions::default())
}

/// [`normalize`] with explicit options.
pub fn normalize_with(raw: &RawTweet, opts: &NormalizeOptions) -> NormalizedTweet {
    let text = strip_rt_prefix(&raw.text);
    let text = replace_urls_and_mentions(text);
    let text = space_adjacent_emoji(&text);
    let parts = text
        .split_whitespace()
        .map(|tok| (tok.to_string(), classify_token(tok, opts)))
        .collect();
    NormalizedTweet::from_parts(raw.id.clone(), parts)
}

/// True iff the tweet has at least `min_words` Word-kind units.
pub fn length_filter(t: &NormalizedTweet, min_words: usize) -> bool {
    t.word_count() >= min_words
}

/// Remove every hashtag unit whose lowercased surface is in `seeds`.
///
/// Seeds are compared case-insensitively and include the leading `#`.
/// Other units and their order are preserved; byte spans are recomputed.
pub fn strip_seed_hashtags(t: &NormalizedTweet, seeds: &HashSet<String>) -> NormalizedTweet {
    let parts = t
        .units
        .iter()
        .filter(|u| !(u.kind == UnitKind::Hashtag && seeds.contains(&u.surface.to_lowercase())))
        .map(|u| (u.surface.clone(), u.kind))
        .collect();
    NormalizedTweet::from_parts(t.id.clone(), parts)
}

/// Lowercase a seed list for use with [`strip_seed_hashtags`].
pub fn seed_set<I, S>(seeds: I) -> HashSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    seeds.into_iter().map(|s| s.as_ref().to_lowercase()).collect()
}

const MAX_HANDLE_LEN: usize = 15;

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Strip one leading `RT @<handle>:` prefix (case-insensitive "RT",
/// optional whitespace). Returns the remainder, or the input unchanged.
fn strip_rt_prefix(text: &str) -> &str {
    let s = text.trim_start();
    let mut chars = s.char_indices();
    match (chars.next(), chars.next()) {
        (Some((_, r)), Some((_, t)))
            if r.eq_ignore_ascii_case(&'r') && t.eq_ignore_ascii_case(&'t') => {}
        _ => return text,
    }
    let rest = &s[2..];
    let after_ws = rest.trim_start();
    let Some(handle) = after_ws.strip_prefix('@') else { return text };
    let run_len = handle.chars().take_while(|&c| is_handle_char(c)).count();
    if run_len == 0 || run_len > MAX_HANDLE_LEN {
        return text;
    }
    let after_handle = &handle[run_len..];
    let after_handle_ws = after_handle.trim_start();
    match after_handle_ws.strip_prefix(':') {
        Some(tail) => tail,
        None => text,
    }
}

fn ascii_ci_starts_with(haystack: &str, needle: &str) -> bool {
    haystack.len() >= needle.len()
        && haystack.as_bytes()[..needle.len()].eq_ignore_ascii_case(needle.as_bytes())
}

/// Replace URLs and mentions in one left-to-right scan.
///
/// A URL starts at a non-word boundary with `http://`, `https://`, or
/// `t.co/` and runs to the next whitespace. A mention is `@` at a non-word
/// boundary followed by 1–15 handle characters; longer runs are not valid
/// handles and are left untouched.
fn replace_urls_and_mentions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap();
        let at_boundary = prev.is_none_or(|p| !is_handle_char(p));

        if at_boundary
            && (ascii_ci_starts_with(rest, "http://") || ascii_ci_starts_with(rest, "https://"))
        {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            out.push_str(URL_TOKEN);
            prev = Some('L');
            i += end;
            continue;
        }
        if at_boundary && rest.starts_with("t.co/") {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            if end > "t.co/".len() {
                out.push_str(URL_TOKEN);
                prev = Some('L');
                i += end;
                continue;
            }
        }
        if c == '@' && at_boundary {
            let handle = &rest[1..];
            let run_len = handle.chars().take_while(|&h| is_handle_char(h)).count();
            if (1..=MAX_HANDLE_LEN).contains(&run_len) {
                let run_bytes: usize =
                    handle.chars().take(run_len).map(|h| h.len_utf8()).sum();
                out.push_str(USER_TOKEN);
                prev = Some('R');
                i += 1 + run_bytes;
                continue;
            }
        }
        out.push(c);
        prev = Some(c);
        i += c.len_utf8();
    }
    out
}

fn first_scalar_is_pictographic(grapheme: &str) -> bool {
    grapheme.chars().next().is_some_and(is_extended_pictographic)
}

/// Insert a space between adjacent emoji grapheme clusters. ZWJ families
/// and skin-tone sequences are single clusters and stay intact.
fn space_adjacent_emoji(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev_pictographic = false;
    for g in text.graphemes(true) {
        let pict = first_scalar_is_pictographic(g);
        if pict && prev_pictographic {
            out.push(' ');
        }
        out.push_str(g);
        prev_pictographic = pict;
    }
    out
}

fn is_punct_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || (!c.is_ascii() && c.general_category_group() == GeneralCategoryGroup::Punctuation)
}

fn classify_token(tok: &str, opts: &NormalizeOptions) -> UnitKind {
    if tok == USER_TOKEN || tok == URL_TOKEN {
        return UnitKind::Special;
    }
    if let Some(rest) = tok.strip_prefix('#') {
        let tag_char = |c: char| {
            if opts.unicode_hashtags {
                c.is_alphanumeric() || c == '_'
            } else {
                is_handle_char(c)
            }
        };
        if rest.chars().next().is_some_and(tag_char) {
            return UnitKind::Hashtag;
        }
    }
    let mut graphemes = tok.graphemes(true);
    if let (Some(g), None) = (graphemes.next(), graphemes.next()) {
        if first_scalar_is_pictographic(g) {
            return UnitKind::Emoji;
        }
    }
    if tok.chars().all(is_punct_char) {
        return UnitKind::Punct;
    }
    UnitKind::Word
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(text: &str) -> NormalizedTweet {
        normalize(&RawTweet::new("t", text))
    }

    fn surfaces(t: &NormalizedTweet) -> Vec<&str> {
        t.units.iter().map(|u| u.surface.as_str()).collect()
    }

    fn kinds(t: &NormalizedTweet) -> Vec<UnitKind> {
        t.units.iter().map(|u| u.kind).collect()
    }

    #[test]
    fn rt_url_emoji_hashtag_sample() {
        let t = norm("RT @bob: check https://t.co/x 😀😀 #fun");
        assert_eq!(surfaces(&t), ["check", "URL", "😀", "😀", "#fun"]);
        assert_eq!(
            kinds(&t),
            [
                UnitKind::Word,
                UnitKind::Special,
                UnitKind::Emoji,
                UnitKind::Emoji,
                UnitKind::Hashtag
            ]
        );
        assert_eq!(t.word_count(), 1);
    }

    #[test]
    fn mention_substitution() {
        let t = norm("@alice I love it");
        assert_eq!(surfaces(&t), ["USER", "I", "love", "it"]);
        assert_eq!(t.word_count(), 3);
    }

    #[test]
    fn zwj_family_is_one_unit() {
        // Oracle: unicode-segmentation treats the ZWJ family sequence as a
        // single extended grapheme cluster.
        let family = "👩\u{200D}👩\u{200D}👧";
        assert_eq!(family.graphemes(true).count(), 1);
        let t = norm("👩‍👩‍👧 hi");
        assert_eq!(surfaces(&t), [family, "hi"]);
        assert_eq!(kinds(&t), [UnitKind::Emoji, UnitKind::Word]);
    }

    #[test]
    fn skin_tone_modifier_stays_attached() {
        let t = norm("👍🏽 nice");
        assert_eq!(surfaces(&t), ["👍🏽", "nice"]);
        assert_eq!(t.units[0].kind, UnitKind::Emoji);
    }

    #[test]
    fn length_filter_excludes_specials() {
        let t = norm("@a http://x a b c d");
        assert_eq!(surfaces(&t), ["USER", "URL", "a", "b", "c", "d"]);
        assert_eq!(t.word_count(), 4);
        assert!(!length_filter(&t, 5));
    }

    #[test]
    fn length_filter_boundary_inclusive() {
        let t = norm("a b c d e");
        assert_eq!(t.word_count(), 5);
        assert!(length_filter(&t, 5));
    }

    #[test]
    fn length_filter_degenerate_threshold() {
        let t = norm("");
        assert_eq!(t.word_count(), 0);
        assert!(length_filter(&t, 0));
        assert!(t.units.is_empty());
    }

    #[test]
    fn strip_seeds_basic() {
        let t = norm("so funny #sarcasm");
        let out = strip_seed_hashtags(&t, &seed_set(["#sarcasm"]));
        assert_eq!(surfaces(&out), ["so", "funny"]);
        assert_eq!(out.word_count(), t.word_count());
    }

    #[test]
    fn strip_seeds_empty_set_is_identity() {
        let t = norm("so funny #sarcasm");
        let out = strip_seed_hashtags(&t, &HashSet::new());
        assert_eq!(out, t);
    }

    #[test]
    fn strip_seeds_case_insensitive() {
        let t = norm("#Sarcasm x y z w v");
        let out = strip_seed_hashtags(&t, &seed_set(["#sarcasm"]));
        assert_eq!(surfaces(&out), ["x", "y", "z", "w", "v"]);
    }

    #[test]
    fn rt_prefix_variants() {
        assert_eq!(surfaces(&norm("rt @Bob_1: hi there")), ["hi", "there"]);
        assert_eq!(surfaces(&norm("RT@bob: hi")), ["hi"]);
        assert_eq!(surfaces(&norm("RT @bob:hi")), ["hi"]);
        // No colon: not a retweet prefix; the mention still becomes USER.
        assert_eq!(surfaces(&norm("RT @bob hi")), ["RT", "USER", "hi"]);
        // Overlong handle: not a valid prefix.
        let t = norm("RT @abcdefghijklmnop: hi");
        assert_eq!(surfaces(&t)[0], "RT");
        // Only the leading prefix is stripped.
        assert_eq!(
            surfaces(&norm("RT @bob: RT @alice: hi")),
            ["RT", "USER:", "hi"]
        );
    }

    #[test]
    fn url_forms() {
        assert_eq!(surfaces(&norm("see http://example.com/a?b=c now")), ["see", "URL", "now"]);
        assert_eq!(surfaces(&norm("see HTTPS://X.co now")), ["see", "URL", "now"]);
        assert_eq!(surfaces(&norm("t.co/abc123")), ["URL"]);
        // Bare "t.co/" with no path is left alone; mid-word schemes too.
        assert_eq!(surfaces(&norm("t.co/ stays")), ["t.co/", "stays"]);
        assert_eq!(surfaces(&norm("nothttp://x stays")), ["nothttp://x", "stays"]);
        assert_eq!(kinds(&norm("t.co/abc123")), [UnitKind::Special]);
    }

    #[test]
    fn mention_edge_cases() {
        // Email-like text is not a mention.
        assert_eq!(surfaces(&norm("mail me a@b.com ok")), ["mail", "me", "a@b.com", "ok"]);
        // 16-character run is not a valid handle.
        assert_eq!(surfaces(&norm("@abcdefghijklmnop hi")), ["@abcdefghijklmnop", "hi"]);
        // Trailing punctuation stays behind.
        assert_eq!(surfaces(&norm("thanks @alice!")), ["thanks", "USER!"]);
    }

    #[test]
    fn punctuation_classification() {
        let t = norm("wow !!! ... — :-)");
        assert_eq!(
            kinds(&t),
            [UnitKind::Word, UnitKind::Punct, UnitKind::Punct, UnitKind::Punct, UnitKind::Punct]
        );
        // Trailing punctuation attaches to the word unit.
        let t = norm("great!");
        assert_eq!(surfaces(&t), ["great!"]);
        assert_eq!(kinds(&t), [UnitKind::Word]);
    }

    #[test]
    fn hashtag_grammar() {
        assert_eq!(kinds(&norm("#fun")), [UnitKind::Hashtag]);
        assert_eq!(kinds(&norm("#fun!")), [UnitKind::Hashtag]);
        assert_eq!(kinds(&norm("#1direction")), [UnitKind::Hashtag]);
        assert_eq!(kinds(&norm("#_x")), [UnitKind::Hashtag]);
        // Bare '#' or '#'+punct is punctuation.
        assert_eq!(kinds(&norm("#")), [UnitKind::Punct]);
        assert_eq!(kinds(&norm("#!")), [UnitKind::Punct]);
        // Unicode hashtags only behind the flag; without it the token has
        // letters, so it classifies as a word.
        assert_eq!(kinds(&norm("#übung")), [UnitKind::Word]);
        let opts = NormalizeOptions { unicode_hashtags: true };
        let t = normalize_with(&RawTweet::new("t", "#übung"), &opts);
        assert_eq!(kinds(&t), [UnitKind::Hashtag]);
    }

    #[test]
    fn emoji_attached_to_text_is_a_word() {
        // "add white space between emojis" separates emoji from each other,
        // not from attached text.
        let t = norm("🤮ing");
        assert_eq!(surfaces(&t), ["🤮ing"]);
        assert_eq!(kinds(&t), [UnitKind::Word]);
    }

    #[test]
    fn adjacent_emoji_runs_split() {
        let t = norm("😀😀😀");
        assert_eq!(surfaces(&t), ["😀", "😀", "😀"]);
        assert!(t.units.iter().all(|u| u.kind == UnitKind::Emoji));
    }

    #[test]
    fn whitespace_collapsed_and_spans_canonical() {
        let t = norm("  a \t b\n\nc  ");
        assert_eq!(surfaces(&t), ["a", "b", "c"]);
        let canon = t.canonical_text();
        assert_eq!(canon, "a b c");
        for u in &t.units {
            assert_eq!(&canon[u.byte_span.0..u.byte_span.1], u.surface);
        }
    }

    #[test]
    fn empty_and_whitespace_only() {
        assert!(norm("").units.is_empty());
        assert!(norm("   \t\n").units.is_empty());
    }
}
