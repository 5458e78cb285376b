//! Newline-delimited JSON record schemas.
//!
//! Field names and order are fixed; serialization is compact with no
//! trailing whitespace, so parse/reserialize round-trips are byte-stable.
//! Unknown keys are rejected: a record that does not match its schema is a
//! malformed record, not a lenient parse.

use serde::{Deserialize, Serialize};

use crate::prag_mask::{MaskedExample, MaskingPlan};
use crate::surrogate::Split;
use crate::text_norm::{NormalizedTweet, RawTweet, UnitKind};

/// Input: `{"id":str,"text":str,"lang":str?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTweetWire {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl From<RawTweetWire> for RawTweet {
    fn from(w: RawTweetWire) -> Self {
        RawTweet { id: w.id, text: w.text, lang_tag: w.lang }
    }
}

/// `{"s":str,"k":"w|h|e|sp|p"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitWire {
    pub s: String,
    pub k: String,
}

/// `{"id":str,"units":[UnitWire]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedWire {
    pub id: String,
    pub units: Vec<UnitWire>,
}

impl From<&NormalizedTweet> for NormalizedWire {
    fn from(t: &NormalizedTweet) -> Self {
        NormalizedWire {
            id: t.id.clone(),
            units: t
                .units
                .iter()
                .map(|u| UnitWire { s: u.surface.clone(), k: u.kind.code().to_string() })
                .collect(),
        }
    }
}

impl NormalizedWire {
    /// Validate and rebuild the domain type (byte spans recomputed).
    pub fn into_tweet(self) -> Result<NormalizedTweet, String> {
        let mut parts = Vec::with_capacity(self.units.len());
        for u in self.units {
            let kind = UnitKind::from_code(&u.k)
                .ok_or_else(|| format!("unknown unit kind code {:?}", u.k))?;
            if u.s.is_empty() {
                return Err("empty unit surface".to_string());
            }
            if u.s.chars().any(char::is_whitespace) {
                return Err(format!("unit surface contains whitespace: {:?}", u.s));
            }
            parts.push((u.s, kind));
        }
        Ok(NormalizedTweet::from_parts(self.id, parts))
    }
}

/// `{"u":int,"a":"m|r|k","pos":[int]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntryWire {
    pub u: usize,
    pub a: String,
    pub pos: Vec<usize>,
}

/// `{"id":str,"tokens":[int],"labels":[[int,int]],"plan":[PlanEntryWire]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskedWire {
    pub id: String,
    pub tokens: Vec<u32>,
    pub labels: Vec<(usize, u32)>,
    pub plan: Vec<PlanEntryWire>,
}

impl MaskedWire {
    pub fn new(example: &MaskedExample, plan: &MaskingPlan) -> Self {
        MaskedWire {
            id: example.id.clone(),
            tokens: example.tokens.clone(),
            labels: example.labels.clone(),
            plan: plan
                .selections
                .iter()
                .map(|sel| PlanEntryWire {
                    u: sel.unit_index,
                    a: sel.action.code().to_string(),
                    pos: sel.token_positions.clone(),
                })
                .collect(),
        }
    }
}

/// `{"id":str,"text":str,"label":str,"split":"train|dev|test"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateWire {
    pub id: String,
    pub text: String,
    pub label: String,
    pub split: Split,
}

/// Input: `{"original_id":str,"original":str,"candidates":[str]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaSetWire {
    pub original_id: String,
    pub original: String,
    pub candidates: Vec<String>,
}

/// Output: verdicts per candidate plus the kept texts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaReportWire {
    pub original_id: String,
    pub verdicts: Vec<crate::para_clean::Verdict>,
    pub sim_to_original: Vec<f64>,
    pub mutual_pairs_dropped: Vec<(usize, usize, f64)>,
    pub kept: Vec<String>,
}

/// Stderr summary: `{"read":n,"written":n,"skipped":n}`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Footer {
    pub read: u64,
    pub written: u64,
    pub skipped: u64,
}
