//! Masking plans with pragmatic-cue priority.
//!
//! A plan is built in three steps:
//!
//! 1. **Budget.** Up to 15% of the non-padding tokens may be selected:
//!    `min(len, max(1, round_half_up(rate * len)))`, and `0` for an empty
//!    sequence. The budget is never overshot.
//! 2. **Selection.** In pragmatic mode, hashtag and emoji units are shuffled
//!    under the per-record seed and greedily taken whole while they fit in
//!    the remaining budget; a unit that would not fit is skipped and the
//!    next is tried. Remaining budget is filled with uniformly chosen
//!    regular (word / punctuation) tokens. Random mode skips the pragmatic
//!    phase and only runs the fill. PAD and special tokens (`USER`, `URL`,
//!    `[SEP]`) are never selected, and no unit is ever selected partially
//!    within one selection.
//! 3. **Actions.** Each selection independently becomes Mask / Random / Keep
//!    with probability 0.8 / 0.1 / 0.1. The action applies to every token of
//!    the selection, so a multi-piece hashtag is corrupted atomically.
//!    Random replacements are drawn per token from the non-special pieces.
//!
//! Plans are pure functions of `(record, config)`: the record seed is
//! derived from the global seed and the record id, so any sharding of the
//! input produces identical plans.

use rand::seq::SliceRandom;
use rand::RngExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::BTreeMap;

use crate::seed;
use crate::segmenter::{SegmentedTweet, SubwordVocab, PAD_UNIT};
use crate::text_norm::UnitKind;

/// Substream domain for unit selection.
const DOMAIN_SELECT: u64 = 1;
/// Substream domain for action assignment.
const DOMAIN_ACTIONS: u64 = 2;

/// Masking strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Hashtags and emojis first, then random regular tokens.
    Pragmatic,
    /// Random regular tokens only.
    Random,
}

/// Configuration for plan generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingConfig {
    /// Fraction of non-padding tokens to select (default 0.15).
    pub mask_rate: f64,
    /// (mask, random, keep) probabilities; must sum to 1.
    pub action_probs: (f64, f64, f64),
    pub mode: MaskMode,
    /// Global seed; each record derives its own stream from it.
    pub seed: u64,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self { mask_rate: 0.15, action_probs: (0.8, 0.1, 0.1), mode: MaskMode::Pragmatic, seed: 0 }
    }
}

#[derive(Debug, Error)]
pub enum MaskConfigError {
    #[error("mask_rate must be in (0, 1], got {0}")]
    MaskRate(f64),
    #[error("action_probs must be non-negative and sum to 1, got {0:?}")]
    ActionProbs((f64, f64, f64)),
}

impl MaskingConfig {
    pub fn validate(&self) -> Result<(), MaskConfigError> {
        if !(self.mask_rate > 0.0 && self.mask_rate <= 1.0) {
            return Err(MaskConfigError::MaskRate(self.mask_rate));
        }
        let (m, r, k) = self.action_probs;
        let sum = m + r + k;
        if m < 0.0 || r < 0.0 || k < 0.0 || (sum - 1.0).abs() > 1e-9 {
            return Err(MaskConfigError::ActionProbs(self.action_probs));
        }
        Ok(())
    }
}

/// What happens to a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskAction {
    Mask,
    Random,
    Keep,
}

impl MaskAction {
    /// Single-letter wire code.
    pub fn code(self) -> &'static str {
        match self {
            MaskAction::Mask => "m",
            MaskAction::Random => "r",
            MaskAction::Keep => "k",
        }
    }
}

/// One masking decision: a set of token positions inside a single unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub unit_index: usize,
    /// Ascending positions, all inside `unit_index`.
    pub token_positions: Vec<usize>,
    pub action: MaskAction,
    pub original_pieces: Vec<u32>,
    pub replacement_pieces: Vec<u32>,
}

/// Per-record masking decisions plus the seed that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskingPlan {
    pub record_id: String,
    /// Selections in ascending unit order.
    pub selections: Vec<Selection>,
    pub budget_tokens: usize,
    pub record_seed: u64,
}

impl MaskingPlan {
    /// Total number of selected token positions.
    pub fn selected_tokens(&self) -> usize {
        self.selections.iter().map(|s| s.token_positions.len()).sum()
    }
}

/// Token budget: `min(len, max(1, round_half_up(rate * len)))`, `0` when
/// the sequence is empty. `seq_len_tokens` counts non-padding tokens only.
pub fn compute_budget(seq_len_tokens: usize, mask_rate: f64) -> usize {
    if seq_len_tokens == 0 {
        return 0;
    }
    let rounded = (mask_rate * seq_len_tokens as f64 + 0.5).floor() as usize;
    rounded.max(1).min(seq_len_tokens)
}

fn shuffled_pragmatic_units(s: &SegmentedTweet, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
    let mut pragmatic: Vec<usize> = s
        .units
        .iter()
        .enumerate()
        .filter(|(_, u)| matches!(u.kind, UnitKind::Hashtag | UnitKind::Emoji) && !u.is_empty())
        .map(|(i, _)| i)
        .collect();
    pragmatic.shuffle(rng);
    pragmatic
}

/// The seeded order in which pragmatic units are considered for a record.
///
/// Replaying this order with the greedy budget rule reproduces the
/// pragmatic phase of [`select_units`] exactly, which makes plans auditable:
/// a pragmatic unit is unselected only if the budget ran out or the unit
/// would not have fit at its position in this order.
pub fn pragmatic_order(s: &SegmentedTweet, cfg: &MaskingConfig) -> Vec<usize> {
    let record_seed = seed::record_seed(cfg.seed, &s.id);
    let mut rng = seed::rng(seed::substream(record_seed, DOMAIN_SELECT));
    shuffled_pragmatic_units(s, &mut rng)
}

/// Step 1 and 2: pick the selections for a record. Actions are placeholders
/// (`Keep` with replacements equal to originals) until [`assign_actions`].
pub fn select_units(s: &SegmentedTweet, cfg: &MaskingConfig) -> MaskingPlan {
    let record_seed = seed::record_seed(cfg.seed, &s.id);
    let non_pad = s.non_pad_len();
    let budget = compute_budget(non_pad, cfg.mask_rate);
    let mut rng = seed::rng(seed::substream(record_seed, DOMAIN_SELECT));

    // unit index -> selected token positions
    let mut chosen: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut used = 0usize;

    if cfg.mode == MaskMode::Pragmatic {
        for ui in shuffled_pragmatic_units(s, &mut rng) {
            let span = s.units[ui];
            if used + span.len() <= budget {
                chosen.insert(ui, (span.start..span.end).collect());
                used += span.len();
            }
        }
    }

    if used < budget {
        let mut pool: Vec<usize> = s
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.unit != PAD_UNIT)
            .filter(|(_, t)| {
                matches!(s.units[t.unit as usize].kind, UnitKind::Word | UnitKind::Punct)
            })
            .map(|(pos, _)| pos)
            .collect();
        let take = (budget - used).min(pool.len());
        let (picked, _) = pool.partial_shuffle(&mut rng, take);
        for &pos in picked.iter() {
            let ui = s.tokens[pos].unit as usize;
            chosen.entry(ui).or_default().push(pos);
        }
    }

    let selections = chosen
        .into_iter()
        .map(|(unit_index, mut positions)| {
            positions.sort_unstable();
            let original_pieces: Vec<u32> =
                positions.iter().map(|&p| s.tokens[p].piece).collect();
            Selection {
                unit_index,
                token_positions: positions,
                action: MaskAction::Keep,
                replacement_pieces: original_pieces.clone(),
                original_pieces,
            }
        })
        .collect();

    MaskingPlan { record_id: s.id.clone(), selections, budget_tokens: budget, record_seed }
}

/// Step 3: draw an action per selection (0.8 / 0.1 / 0.1 by default) and
/// materialize replacement pieces.
pub fn assign_actions(
    mut plan: MaskingPlan,
    cfg: &MaskingConfig,
    v: &SubwordVocab,
) -> MaskingPlan {
    let mut rng = seed::rng(seed::substream(plan.record_seed, DOMAIN_ACTIONS));
    let pool = v.non_special_ids();
    let (p_mask, p_random, _) = cfg.action_probs;
    for sel in &mut plan.selections {
        let draw: f64 = rng.random();
        sel.action = if draw < p_mask {
            MaskAction::Mask
        } else if draw < p_mask + p_random {
            MaskAction::Random
        } else {
            MaskAction::Keep
        };
        sel.replacement_pieces = match sel.action {
            MaskAction::Mask => vec![v.specials().mask; sel.token_positions.len()],
            MaskAction::Random => sel
                .token_positions
                .iter()
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect(),
            MaskAction::Keep => sel.original_pieces.clone(),
        };
    }
    plan
}

/// Convenience: select and assign in one call.
pub fn plan_record(s: &SegmentedTweet, cfg: &MaskingConfig, v: &SubwordVocab) -> MaskingPlan {
    assign_actions(select_units(s, cfg), cfg, v)
}

/// A corrupted token sequence plus MLM label bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedExample {
    pub id: String,
    pub tokens: Vec<u32>,
    /// `(position, original piece id)` for every selected position, Keep
    /// included, ascending by position.
    pub labels: Vec<(usize, u32)>,
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("record {id}: plan position {position} out of range (len {len})")]
    PositionOutOfRange { id: String, position: usize, len: usize },
    #[error("record {id}: selection touches padding at position {position}")]
    PadSelected { id: String, position: usize },
}

/// Materialize a plan: replace tokens and record `(position, original)`
/// labels for all selected positions.
pub fn apply(s: &SegmentedTweet, plan: &MaskingPlan) -> Result<MaskedExample, ApplyError> {
    let mut tokens: Vec<u32> = s.tokens.iter().map(|t| t.piece).collect();
    let mut labels: Vec<(usize, u32)> = Vec::with_capacity(plan.selected_tokens());
    for sel in &plan.selections {
        for (i, &pos) in sel.token_positions.iter().enumerate() {
            if pos >= tokens.len() {
                return Err(ApplyError::PositionOutOfRange {
                    id: plan.record_id.clone(),
                    position: pos,
                    len: tokens.len(),
                });
            }
            if s.tokens[pos].unit == PAD_UNIT {
                return Err(ApplyError::PadSelected { id: plan.record_id.clone(), position: pos });
            }
            labels.push((pos, s.tokens[pos].piece));
            tokens[pos] = sel.replacement_pieces[i];
        }
    }
    labels.sort_unstable_by_key(|&(pos, _)| pos);
    Ok(MaskedExample { id: s.id.clone(), tokens, labels })
}
