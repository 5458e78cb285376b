//! Subword segmentation with whole-unit alignment.
//!
//! Units are segmented independently by greedy longest-match over a fixed
//! piece vocabulary, with a single-byte fallback so any input is segmentable.
//! The unit-to-token alignment is what makes whole-word masking possible:
//! every token points back at exactly one unit, and truncation never cuts
//! through a unit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use crate::text_norm::{NormalizedTweet, UnitKind};

/// Default maximum sequence length for single records.
pub const DEFAULT_MAX_LEN: usize = 60;
/// Default maximum sequence length for topic-paired records.
pub const DEFAULT_PAIRED_MAX_LEN: usize = 70;

/// Unit index carried by padding tokens.
pub const PAD_UNIT: i32 = -1;

/// Vocabulary load failures.
#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocab io: {0}")]
    Io(#[from] std::io::Error),
    #[error("vocab header: expected 4 lines `#MASK=<id>` `#PAD=<id>` `#SEP=<id>` `#UNK=<id>`, got {0:?}")]
    Header(String),
    #[error("vocab header: special ids must be exactly 0..=3, got {0:?}")]
    SpecialIds(Vec<u32>),
    #[error("vocab line {0}: empty piece")]
    EmptyPiece(usize),
    #[error("vocab line {0}: duplicate piece {1:?}")]
    DuplicatePiece(usize, String),
}

/// Reserved special-token ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialIds {
    pub mask: u32,
    pub pad: u32,
    pub sep: u32,
    pub unk: u32,
}

/// A piece vocabulary with dense ids, reserved specials, and a guaranteed
/// byte-level fallback for every possible input byte.
///
/// File format: four header lines declaring the special ids (`#MASK=0`,
/// `#PAD=1`, `#SEP=2`, `#UNK=3` in any order), then one piece per line. A
/// piece's id is its zero-based line number in the file, so with the
/// canonical header the first piece gets id 4. Bytes with no piece of their
/// own are served by synthetic `<0xNN>` fallback pieces appended after the
/// file pieces; synthetic fallbacks are never matched against text.
#[derive(Debug, Clone)]
pub struct SubwordVocab {
    pieces: Vec<String>,
    specials: SpecialIds,
    match_table: HashMap<String, u32>,
    max_piece_len: usize,
    byte_fallback: [u32; 256],
}

impl SubwordVocab {
    pub fn from_path(path: &Path) -> Result<Self, VocabError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, VocabError> {
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line?);
        }
        Self::from_lines(lines)
    }

    fn from_lines(lines: Vec<String>) -> Result<Self, VocabError> {
        if lines.len() < 4 {
            return Err(VocabError::Header(lines.join("\\n")));
        }
        let mut declared: HashMap<&str, u32> = HashMap::new();
        for line in &lines[..4] {
            let Some(rest) = line.strip_prefix('#') else {
                return Err(VocabError::Header(line.clone()));
            };
            let Some((key, val)) = rest.split_once('=') else {
                return Err(VocabError::Header(line.clone()));
            };
            if !matches!(key, "MASK" | "PAD" | "SEP" | "UNK") || declared.contains_key(key) {
                return Err(VocabError::Header(line.clone()));
            }
            let id: u32 = val.trim().parse().map_err(|_| VocabError::Header(line.clone()))?;
            declared.insert(match key {
                "MASK" => "MASK",
                "PAD" => "PAD",
                "SEP" => "SEP",
                _ => "UNK",
            }, id);
        }
        let mut ids: Vec<u32> = declared.values().copied().collect();
        ids.sort_unstable();
        if ids != [0, 1, 2, 3] {
            return Err(VocabError::SpecialIds(ids));
        }
        let specials = SpecialIds {
            mask: declared["MASK"],
            pad: declared["PAD"],
            sep: declared["SEP"],
            unk: declared["UNK"],
        };

        // Ids 0..=3 belong to the specials; pieces take their line numbers.
        let mut pieces = vec![String::new(); 4];
        pieces[specials.mask as usize] = "[MASK]".to_string();
        pieces[specials.pad as usize] = "[PAD]".to_string();
        pieces[specials.sep as usize] = "[SEP]".to_string();
        pieces[specials.unk as usize] = "[UNK]".to_string();

        let mut match_table = HashMap::new();
        let mut max_piece_len = 0;
        for (lineno, piece) in lines.iter().enumerate().skip(4) {
            if piece.is_empty() {
                return Err(VocabError::EmptyPiece(lineno));
            }
            let id = lineno as u32;
            if match_table.insert(piece.clone(), id).is_some() {
                return Err(VocabError::DuplicatePiece(lineno, piece.clone()));
            }
            max_piece_len = max_piece_len.max(piece.len());
            pieces.push(piece.clone());
        }

        let mut byte_fallback = [0u32; 256];
        for b in 0..=255u8 {
            let spelled = byte_piece(b);
            byte_fallback[b as usize] = match match_table.get(&spelled) {
                Some(&id) => id,
                None => {
                    let id = pieces.len() as u32;
                    pieces.push(spelled);
                    id
                }
            };
        }

        Ok(Self { pieces, specials, match_table, max_piece_len, byte_fallback })
    }

    /// Build an in-memory vocabulary with the canonical special layout
    /// (MASK=0, PAD=1, SEP=2, UNK=3) followed by the given pieces.
    pub fn from_pieces<I, S>(pieces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lines = vec![
            "#MASK=0".to_string(),
            "#PAD=1".to_string(),
            "#SEP=2".to_string(),
            "#UNK=3".to_string(),
        ];
        lines.extend(pieces.into_iter().map(Into::into));
        Self::from_lines(lines).expect("canonical in-memory vocab is well-formed")
    }

    pub fn specials(&self) -> SpecialIds {
        self.specials
    }

    /// Total number of ids, synthetic byte fallbacks included.
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    /// Never true: specials and byte fallbacks are always present.
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece(&self, id: u32) -> &str {
        &self.pieces[id as usize]
    }

    pub fn is_special(&self, id: u32) -> bool {
        id == self.specials.mask
            || id == self.specials.pad
            || id == self.specials.sep
            || id == self.specials.unk
    }

    /// Ids eligible as random replacements: everything but the specials.
    pub fn non_special_ids(&self) -> Vec<u32> {
        (0..self.pieces.len() as u32).filter(|&id| !self.is_special(id)).collect()
    }

    fn lookup(&self, text: &str) -> Option<u32> {
        self.match_table.get(text).copied()
    }
}

fn byte_piece(b: u8) -> String {
    format!("<0x{b:02X}>")
}

/// One aligned token: a piece id plus the index of the unit it came from
/// ([`PAD_UNIT`] for padding).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegToken {
    pub piece: u32,
    pub unit: i32,
}

/// Token range and kind of one unit within a [`SegmentedTweet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitSpan {
    pub start: usize,
    pub end: usize,
    pub kind: UnitKind,
}

impl UnitSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// A tweet mapped to subword tokens with per-unit boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedTweet {
    pub id: String,
    pub tokens: Vec<SegToken>,
    pub units: Vec<UnitSpan>,
}

impl SegmentedTweet {
    /// Number of non-padding tokens.
    pub fn non_pad_len(&self) -> usize {
        self.tokens.iter().filter(|t| t.unit != PAD_UNIT).count()
    }
}

impl fmt::Display for SegmentedTweet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} tokens, {} units)", self.id, self.tokens.len(), self.units.len())
    }
}

/// Segment each unit independently by greedy longest-match with single-byte
/// fallback. Special units map to a single piece: the literal piece when the
/// vocabulary has one, otherwise UNK.
pub fn segment(t: &NormalizedTweet, v: &SubwordVocab) -> SegmentedTweet {
    let mut tokens = Vec::new();
    let mut units = Vec::with_capacity(t.units.len());
    for (ui, unit) in t.units.iter().enumerate() {
        let start = tokens.len();
        if unit.kind == UnitKind::Special {
            let id = v.lookup(&unit.surface).unwrap_or(v.specials.unk);
            tokens.push(SegToken { piece: id, unit: ui as i32 });
        } else {
            segment_surface(&unit.surface, v, ui as i32, &mut tokens);
        }
        units.push(UnitSpan { start, end: tokens.len(), kind: unit.kind });
    }
    SegmentedTweet { id: t.id.clone(), tokens, units }
}

fn segment_surface(surface: &str, v: &SubwordVocab, unit: i32, out: &mut Vec<SegToken>) {
    let bytes = surface.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut matched = None;
        let top = v.max_piece_len.min(bytes.len() - i);
        for l in (1..=top).rev() {
            if let Ok(sub) = std::str::from_utf8(&bytes[i..i + l]) {
                if let Some(id) = v.lookup(sub) {
                    matched = Some((id, l));
                    break;
                }
            }
        }
        match matched {
            Some((id, l)) => {
                out.push(SegToken { piece: id, unit });
                i += l;
            }
            None => {
                out.push(SegToken { piece: v.byte_fallback[bytes[i] as usize], unit });
                i += 1;
            }
        }
    }
}

/// Cap the sequence at `max_len` tokens, cutting only at unit boundaries,
/// then pad with PAD to exactly `max_len`.
pub fn truncate_pad(s: SegmentedTweet, max_len: usize, v: &SubwordVocab) -> SegmentedTweet {
    let SegmentedTweet { id, mut tokens, mut units } = s;
    tokens.retain(|t| t.unit != PAD_UNIT);

    let mut cut_tokens = 0;
    let mut cut_units = 0;
    for span in &units {
        if span.end <= max_len {
            cut_tokens = span.end;
            cut_units += 1;
        } else {
            break;
        }
    }
    tokens.truncate(cut_tokens);
    units.truncate(cut_units);
    while tokens.len() < max_len {
        tokens.push(SegToken { piece: v.specials().pad, unit: PAD_UNIT });
    }
    SegmentedTweet { id, tokens, units }
}

/// Append `[SEP]` and the segmented topic behind the post content, then cap
/// at `max_len` (default 70) and pad. When the pair is over budget, post
/// tokens are dropped before topic tokens, always at unit boundaries.
pub fn pair_with_topic(
    s: SegmentedTweet,
    topic: &NormalizedTweet,
    v: &SubwordVocab,
    max_len: usize,
) -> SegmentedTweet {
    let mut post = s;
    post.tokens.retain(|t| t.unit != PAD_UNIT);
    let topic_seg = segment(topic, v);

    // Reserve room for [SEP] plus the topic; trim the post first.
    let post_budget = max_len.saturating_sub(1 + topic_seg.tokens.len());
    if post.tokens.len() > post_budget {
        post = truncate_pad(post, post_budget, v);
        post.tokens.retain(|t| t.unit != PAD_UNIT);
    }

    let id = post.id;
    let mut tokens = post.tokens;
    let mut units = post.units;
    let sep_unit = units.len() as i32;
    tokens.push(SegToken { piece: v.specials().sep, unit: sep_unit });
    units.push(UnitSpan { start: tokens.len() - 1, end: tokens.len(), kind: UnitKind::Special });

    let base = tokens.len();
    let unit_base = units.len();
    for tok in &topic_seg.tokens {
        tokens.push(SegToken { piece: tok.piece, unit: tok.unit + unit_base as i32 });
    }
    for span in &topic_seg.units {
        units.push(UnitSpan { start: span.start + base, end: span.end + base, kind: span.kind });
    }

    // A topic that is itself over budget is cut at unit boundaries too.
    truncate_pad(SegmentedTweet { id, tokens, units }, max_len, v)
}
