//! Deterministic corpus engineering for pragmatically masked language-model
//! pre-training data.
//!
//! The pipeline turns raw social-media posts into bit-exact training records:
//!
//! * [`text_norm`] — normalization into classified lexical units (words,
//!   hashtags, emojis, `USER`/`URL` specials, punctuation);
//! * [`segmenter`] — greedy subword segmentation with whole-unit alignment,
//!   length capping, and topic pairing;
//! * [`corpus_derive`] — the five pre-training subset definitions
//!   (naive / hashtag-any / emoji-any / hashtag-end / emoji-end), reservoir
//!   subset sampling, and corpus composition statistics;
//! * [`prag_mask`] — masking plans that give priority to hashtags and emojis
//!   under a 15% whole-word budget with 80/10/10 mask/random/keep actions;
//! * [`surrogate`] — hashtag- and emoji-prediction dataset construction from
//!   end-position cues, with label-frequency pruning and hashed splits;
//! * [`para_clean`] — word-trigram similarity filtering of machine
//!   paraphrases (near-copies, mutual near-duplicates, unrelated outputs);
//! * [`cli_io`] — the `pragmask` command-line front end: newline-delimited
//!   JSON in and out, order-preserving parallel execution, deterministic
//!   under any worker count.
//!
//! Every randomized decision is keyed by a per-record seed derived in
//! [`seed`], so outputs are reproducible regardless of sharding or thread
//! scheduling.

pub mod cli_io;
pub mod corpus_derive;
pub mod para_clean;
pub mod prag_mask;
pub mod seed;
pub mod segmenter;
pub mod surrogate;
pub mod text_norm;

pub use text_norm::{NormalizedTweet, RawTweet, Unit, UnitKind};
