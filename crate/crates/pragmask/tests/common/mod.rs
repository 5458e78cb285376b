//! Shared synthetic-data generators and binary-invocation helpers.

#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pragmask::segmenter::SubwordVocab;
use pragmask::text_norm::{NormalizedTweet, UnitKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const EMOJI_POOL: &[&str] = &["😀", "🎉", "👍🏽", "❤\u{FE0F}", "👩\u{200D}👩\u{200D}👧", "🤮"];

/// Random lowercase word over {a, b, c, d}, 1–4 characters.
pub fn word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..=4usize);
    (0..len).map(|_| (b'a' + rng.random_range(0..4u8)) as char).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, kind: UnitKind) -> (String, UnitKind) {
    let surface = match kind {
        UnitKind::Word => word(rng),
        UnitKind::Hashtag => format!("#{}", word(rng)),
        UnitKind::Emoji => EMOJI_POOL[rng.random_range(0..EMOJI_POOL.len())].to_string(),
        UnitKind::Special => if rng.random_range(0..2) == 0 { "USER" } else { "URL" }.to_string(),
        UnitKind::Punct => ["!", "!!", "...", ",", "?"][rng.random_range(0..5)].to_string(),
    };
    (surface, kind)
}

/// Random tweet with up to `max_pragmatic` hashtag/emoji units shuffled
/// among words, punctuation, and specials.
pub fn synth_tweet(rng: &mut ChaCha8Rng, id: &str, max_pragmatic: usize) -> NormalizedTweet {
    use rand::seq::SliceRandom;
    let n_prag = rng.random_range(0..=max_pragmatic);
    let n_other = rng.random_range(1..=12usize);
    let mut parts: Vec<(String, UnitKind)> = Vec::new();
    for _ in 0..n_prag {
        let kind = if rng.random_range(0..2) == 0 { UnitKind::Hashtag } else { UnitKind::Emoji };
        parts.push(unit(rng, kind));
    }
    for _ in 0..n_other {
        let kind = match rng.random_range(0..10) {
            0 => UnitKind::Punct,
            1 => UnitKind::Special,
            _ => UnitKind::Word,
        };
        parts.push(unit(rng, kind));
    }
    parts.shuffle(rng);
    NormalizedTweet::from_parts(id, parts)
}

/// Single-character pieces over the synthetic alphabet: every word unit of
/// length `n` segments into exactly `n` tokens; emoji and `#` go through
/// byte fallback, giving natural multi-token pragmatic units.
pub fn letters_vocab() -> SubwordVocab {
    SubwordVocab::from_pieces(["a", "b", "c", "d"])
}

/// Path of the compiled `pragmask` binary.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pragmask")
}

/// Fresh scratch directory under the target tmp dir.
pub fn scratch(tag: &str) -> std::path::PathBuf {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(tag);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub struct CmdOut {
    pub status: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// Run the binary with `args`, feeding `stdin_path` when given.
pub fn run_bin(args: &[&str], stdin_path: Option<&std::path::Path>) -> CmdOut {
    use std::process::{Command, Stdio};
    let mut cmd = Command::new(bin());
    cmd.args(args);
    match stdin_path {
        Some(p) => {
            cmd.stdin(std::fs::File::open(p).unwrap());
        }
        None => {
            cmd.stdin(Stdio::null());
        }
    }
    let out = cmd.output().unwrap();
    CmdOut {
        status: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}
