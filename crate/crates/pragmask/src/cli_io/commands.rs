//! Subcommand definitions and pipelines.

use clap::{Parser, Subcommand};
use rayon::ThreadPool;

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use crate::corpus_derive::{matches_tag, Reservoir, StatsAccumulator, SubsetTag};
use crate::para_clean::{clean, CleanConfig, ParaphraseSet, Similarity};
use crate::prag_mask::{apply, plan_record, MaskMode, MaskingConfig};
use crate::segmenter::{pair_with_topic, segment, truncate_pad, SubwordVocab};
use crate::surrogate::{
    assign_split, extract_label, validate_ratios, LabelCounter, LabelKind, LabelVocabulary,
};
use crate::text_norm::{
    normalize, normalize_with, seed_set, strip_seed_hashtags, NormalizeOptions, NormalizedTweet,
    RawTweet,
};

use super::config::{parse_triple, ConfigFile};
use super::engine::drive;
use super::formats::{
    Footer, MaskedWire, NormalizedWire, ParaReportWire, ParaSetWire, RawTweetWire, SurrogateWire,
};
use super::CliError;

#[derive(Debug, Parser)]
#[command(name = "pragmask", version, about = "Deterministic corpus engineering for pragmatically masked language-model pre-training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Global seed (also config key `seed` or env `PRAGMASK_SEED`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (>= 1; defaults to all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Fail on the first malformed record instead of skipping it.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Flat key=value config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Input file (defaults to stdin).
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,

    /// Output file (defaults to stdout).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw tweets in, normalized unit sequences out.
    Normalize {
        /// Keep only records whose language tag equals this value.
        #[arg(long)]
        lang: Option<String>,
        /// Accept Unicode alphanumerics after '#' in hashtags.
        #[arg(long)]
        unicode_hashtags: bool,
        /// Comma-separated seed hashtags to remove (e.g. "#sarcasm,#not").
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Drop normalized tweets with fewer than --min-words words.
    Filter {
        #[arg(long)]
        min_words: Option<usize>,
    },
    /// Reservoir-sample --count tweets matching --tag.
    Derive {
        /// naive | hashtag_any | emoji_any | hashtag_end | emoji_end
        #[arg(long)]
        tag: Option<String>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Corpus composition statistics as one JSON object.
    Stats,
    /// Masked-example generation from normalized tweets.
    Mask {
        /// Subword vocabulary file.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// pragmatic | random
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        mask_rate: Option<f64>,
        /// Mask,random,keep probabilities, e.g. "0.8,0.1,0.1".
        #[arg(long)]
        action_probs: Option<String>,
        /// Maximum sequence length (60, or 70 when --topic is given).
        #[arg(long)]
        max_len: Option<usize>,
        /// Topic term appended behind the post content after [SEP].
        #[arg(long)]
        topic: Option<String>,
    },
    /// Build surrogate classification records from end-position cues.
    Surrogate {
        /// hashtag | emoji
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        min_count: Option<u64>,
        /// Train,dev,test ratios, e.g. "0.8,0.1,0.1".
        #[arg(long)]
        ratios: Option<String>,
        /// Reuse a previously written label vocabulary instead of counting.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Also write the label vocabulary here.
        #[arg(long)]
        label_vocab_out: Option<PathBuf>,
    },
    /// (Re-)assign train/dev/test splits on surrogate records.
    Split {
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Clean paraphrase candidate sets with n-gram similarity rules.
    Paraclean {
        #[arg(long)]
        copy_thresh: Option<f64>,
        #[arg(long)]
        mutual_thresh: Option<f64>,
        #[arg(long)]
        unrelated_thresh: Option<f64>,
        /// jaccard | dice
        #[arg(long)]
        measure: Option<String>,
        /// Cap on kept paraphrases per original.
        #[arg(long)]
        max_per_original: Option<usize>,
    },
    /// Count end-position cue labels and write the label vocabulary.
    Vocab {
        /// hashtag | emoji
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        min_count: Option<u64>,
    },
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::open(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufReader::new(f)))
        }
        None => Ok(Box::new(std::io::BufReader::new(std::io::stdin()))),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::BufWriter::new(std::io::stdout()))),
    }
}

fn build_pool(workers: Option<usize>) -> Result<ThreadPool, CliError> {
    if workers == Some(0) {
        return Err(CliError::Config("workers must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn parse_normalized(line: &str) -> Result<NormalizedTweet, String> {
    let wire: NormalizedWire = serde_json::from_str(line).map_err(|e| e.to_string())?;
    wire.into_tweet()
}

struct Ctx {
    pool: ThreadPool,
    strict: bool,
    seed: u64,
    input: Box<dyn BufRead>,
    output: Box<dyn Write>,
}

pub fn execute(cli: Cli) -> Result<Footer, CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx {
        pool: build_pool(cfg.resolve_opt(cli.workers, "workers")?)?,
        strict: cli.strict,
        seed: cfg.resolve_seed(cli.seed)?,
        input: open_input(&cli.input)?,
        output: open_output(&cli.output)?,
    };
    match cli.command {
        Command::Normalize { lang, unicode_hashtags, seeds } => {
            cmd_normalize(ctx, &cfg, lang, unicode_hashtags, seeds)
        }
        Command::Filter { min_words } => cmd_filter(ctx, &cfg, min_words),
        Command::Derive { tag, count } => cmd_derive(ctx, &cfg, tag, count),
        Command::Stats => cmd_stats(ctx),
        Command::Mask { vocab, mode, mask_rate, action_probs, max_len, topic } => {
            cmd_mask(ctx, &cfg, vocab, mode, mask_rate, action_probs, max_len, topic)
        }
        Command::Surrogate { kind, min_count, ratios, labels, label_vocab_out } => {
            cmd_surrogate(ctx, &cfg, kind, min_count, ratios, labels, label_vocab_out)
        }
        Command::Split { ratios } => cmd_split(ctx, &cfg, ratios),
        Command::Paraclean { copy_thresh, mutual_thresh, unrelated_thresh, measure, max_per_original } => {
            cmd_paraclean(ctx, &cfg, copy_thresh, mutual_thresh, unrelated_thresh, measure, max_per_original)
        }
        Command::Vocab { kind, min_count } => cmd_vocab(ctx, &cfg, kind, min_count),
    }
}

/// Ordered parallel map: the closure produces an output line or a clean drop.
fn run_map<F>(mut ctx: Ctx, f: F) -> Result<Footer, CliError>
where
    F: Fn(&str) -> Result<Option<String>, String> + Sync,
{
    let mut footer = Footer::default();
    drive(ctx.input, &ctx.pool, ctx.strict, &mut footer, f, |item, footer| {
        if let Some(line) = item {
            ctx.output.write_all(line.as_bytes())?;
            ctx.output.write_all(b"\n")?;
            footer.written += 1;
        }
        Ok(())
    })?;
    ctx.output.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(footer)
}

fn cmd_normalize(
    ctx: Ctx,
    cfg: &ConfigFile,
    lang: Option<String>,
    unicode_hashtags: bool,
    seeds: Option<String>,
) -> Result<Footer, CliError> {
    let lang: Option<String> = match lang {
        Some(l) => Some(l),
        None => cfg.get("lang").map(str::to_string),
    };
    let unicode_hashtags =
        unicode_hashtags || cfg.get("unicode-hashtags").is_some_and(|v| v == "true" || v == "1");
    let seeds: Option<String> = match seeds {
        Some(s) => Some(s),
        None => cfg.get("seeds").map(str::to_string),
    };
    let seed_tags = seeds.map(|s| seed_set(s.split(',').map(str::trim).filter(|t| !t.is_empty())));
    let opts = NormalizeOptions { unicode_hashtags };

    run_map(ctx, move |line| {
        let wire: RawTweetWire = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if let Some(want) = &lang {
            match &wire.lang {
                Some(have) if have.eq_ignore_ascii_case(want) => {}
                _ => return Ok(None),
            }
        }
        let raw = RawTweet::from(wire);
        let mut t = normalize_with(&raw, &opts);
        if let Some(seeds) = &seed_tags {
            t = strip_seed_hashtags(&t, seeds);
        }
        Ok(Some(serde_json::to_string(&NormalizedWire::from(&t)).expect("serializes")))
    })
}

fn cmd_filter(ctx: Ctx, cfg: &ConfigFile, min_words: Option<usize>) -> Result<Footer, CliError> {
    let min_words = cfg.resolve(min_words, "min-words", 5usize)?;
    run_map(ctx, move |line| {
        let t = parse_normalized(line)?;
        if crate::text_norm::length_filter(&t, min_words) {
            Ok(Some(serde_json::to_string(&NormalizedWire::from(&t)).expect("serializes")))
        } else {
            Ok(None)
        }
    })
}

fn cmd_derive(
    mut ctx: Ctx,
    cfg: &ConfigFile,
    tag: Option<String>,
    count: Option<usize>,
) -> Result<Footer, CliError> {
    let tag_raw = cfg
        .resolve_opt(tag, "tag")?
        .ok_or_else(|| CliError::Config("derive requires --tag".into()))?;
    let tag = SubsetTag::parse(&tag_raw)
        .ok_or_else(|| CliError::Config(format!("unknown subset tag {tag_raw:?}")))?;
    let count = cfg
        .resolve_opt(count, "count")?
        .ok_or_else(|| CliError::Config("derive requires --count".into()))?;

    let mut footer = Footer::default();
    let mut reservoir: Reservoir<NormalizedTweet> = Reservoir::new(count, ctx.seed);
    drive(
        ctx.input,
        &ctx.pool,
        ctx.strict,
        &mut footer,
        |line| {
            let t = parse_normalized(line)?;
            Ok(matches_tag(&t, tag).then_some(t))
        },
        |item, _| {
            if let Some(t) = item {
                reservoir.push(t);
            }
            Ok(())
        },
    )?;
    for t in reservoir.into_items() {
        let line = serde_json::to_string(&NormalizedWire::from(&t)).expect("serializes");
        ctx.output.write_all(line.as_bytes()).map_err(|e| CliError::Input(e.to_string()))?;
        ctx.output.write_all(b"\n").map_err(|e| CliError::Input(e.to_string()))?;
        footer.written += 1;
    }
    ctx.output.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(footer)
}

fn cmd_stats(mut ctx: Ctx) -> Result<Footer, CliError> {
    let mut footer = Footer::default();
    let mut acc = StatsAccumulator::default();
    drive(
        ctx.input,
        &ctx.pool,
        ctx.strict,
        &mut footer,
        parse_normalized,
        |t, _| {
            acc.push(&t);
            Ok(())
        },
    )?;
    let stats = acc.finalize();
    let line = serde_json::to_string(&stats).expect("serializes");
    ctx.output.write_all(line.as_bytes()).map_err(|e| CliError::Input(e.to_string()))?;
    ctx.output.write_all(b"\n").map_err(|e| CliError::Input(e.to_string()))?;
    ctx.output.flush().map_err(|e| CliError::Input(e.to_string()))?;
    footer.written += 1;
    Ok(footer)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mask(
    ctx: Ctx,
    cfg: &ConfigFile,
    vocab: Option<PathBuf>,
    mode: Option<String>,
    mask_rate: Option<f64>,
    action_probs: Option<String>,
    max_len: Option<usize>,
    topic: Option<String>,
) -> Result<Footer, CliError> {
    let vocab_path = cfg
        .resolve_opt(vocab, "vocab")?
        .ok_or_else(|| CliError::Config("mask requires --vocab".into()))?;

    let mode_raw = cfg.resolve(mode, "mode", "pragmatic".to_string())?;
    let mode = match mode_raw.as_str() {
        "pragmatic" => MaskMode::Pragmatic,
        "random" => MaskMode::Random,
        other => return Err(CliError::Config(format!("unknown mask mode {other:?}"))),
    };
    let mask_rate = cfg.resolve(mask_rate, "mask-rate", 0.15f64)?;
    let action_probs = match cfg.resolve_opt(action_probs, "action-probs")? {
        Some(raw) => parse_triple(&raw, "action-probs")?,
        None => (0.8, 0.1, 0.1),
    };
    let topic: Option<String> = match topic {
        Some(t) => Some(t),
        None => cfg.get("topic").map(str::to_string),
    };
    let default_len = if topic.is_some() {
        crate::segmenter::DEFAULT_PAIRED_MAX_LEN
    } else {
        crate::segmenter::DEFAULT_MAX_LEN
    };
    let max_len = cfg.resolve(max_len, "max-len", default_len)?;
    if max_len == 0 {
        return Err(CliError::Config("max-len must be >= 1".into()));
    }

    let mask_cfg = MaskingConfig { mask_rate, action_probs, mode, seed: ctx.seed };
    mask_cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let vocab =
        SubwordVocab::from_path(&vocab_path).map_err(|e| CliError::Vocab(e.to_string()))?;
    let topic_tweet = topic.map(|text| normalize(&RawTweet::new("topic", text)));

    run_map(ctx, move |line| {
        let t = parse_normalized(line)?;
        let s = segment(&t, &vocab);
        let s = match &topic_tweet {
            Some(topic) => pair_with_topic(s, topic, &vocab, max_len),
            None => truncate_pad(s, max_len, &vocab),
        };
        let plan = plan_record(&s, &mask_cfg, &vocab);
        let example = apply(&s, &plan).map_err(|e| e.to_string())?;
        Ok(Some(serde_json::to_string(&MaskedWire::new(&example, &plan)).expect("serializes")))
    })
}

fn cmd_surrogate(
    mut ctx: Ctx,
    cfg: &ConfigFile,
    kind: Option<String>,
    min_count: Option<u64>,
    ratios: Option<String>,
    labels: Option<PathBuf>,
    label_vocab_out: Option<PathBuf>,
) -> Result<Footer, CliError> {
    let kind_raw = cfg
        .resolve_opt(kind, "kind")?
        .ok_or_else(|| CliError::Config("surrogate requires --kind".into()))?;
    let kind = LabelKind::parse(&kind_raw)
        .ok_or_else(|| CliError::Config(format!("unknown label kind {kind_raw:?}")))?;
    let min_count = cfg.resolve(min_count, "min-count", 200u64)?;
    if min_count == 0 {
        return Err(CliError::Config("min-count must be >= 1".into()));
    }
    let ratios = match cfg.resolve_opt(ratios, "ratios")? {
        Some(raw) => parse_triple(&raw, "ratios")?,
        None => (0.8, 0.1, 0.1),
    };
    validate_ratios(ratios).map_err(|e| CliError::Config(e.to_string()))?;

    let end_tag = match kind {
        LabelKind::Hashtag => SubsetTag::HashtagEnd,
        LabelKind::Emoji => SubsetTag::EmojiEnd,
    };

    // Phase 1: extract labeled records in input order.
    let mut footer = Footer::default();
    let mut extracted: Vec<(NormalizedTweet, String)> = Vec::new();
    drive(
        ctx.input,
        &ctx.pool,
        ctx.strict,
        &mut footer,
        |line| {
            let t = parse_normalized(line)?;
            if !matches_tag(&t, end_tag) {
                return Ok(None);
            }
            Ok(extract_label(&t, kind))
        },
        |item, _| {
            if let Some((label, stripped)) = item {
                extracted.push((stripped, label));
            }
            Ok(())
        },
    )?;

    // Phase 2: label vocabulary (counted here or loaded), prune, split.
    let vocab = match labels {
        Some(path) => {
            let f = std::fs::File::open(&path)
                .map_err(|e| CliError::Vocab(format!("{}: {e}", path.display())))?;
            LabelVocabulary::read(std::io::BufReader::new(f), min_count, kind)
                .map_err(|e| CliError::Vocab(e.to_string()))?
        }
        None => {
            let mut counter = LabelCounter::default();
            for (_, label) in &extracted {
                counter.push(label);
            }
            counter.build(min_count, kind)
        }
    };
    if let Some(path) = label_vocab_out {
        let f = std::fs::File::create(&path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        vocab.write(std::io::BufWriter::new(f)).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let keep: HashSet<&str> = vocab.labels.iter().map(|(s, _)| s.as_str()).collect();

    for (tweet, label) in &extracted {
        if !keep.contains(label.as_str()) {
            continue;
        }
        let wire = SurrogateWire {
            id: tweet.id.clone(),
            text: tweet.canonical_text(),
            label: label.clone(),
            split: assign_split(ctx.seed, &tweet.id, ratios),
        };
        let line = serde_json::to_string(&wire).expect("serializes");
        ctx.output.write_all(line.as_bytes()).map_err(|e| CliError::Input(e.to_string()))?;
        ctx.output.write_all(b"\n").map_err(|e| CliError::Input(e.to_string()))?;
        footer.written += 1;
    }
    ctx.output.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(footer)
}

fn cmd_split(ctx: Ctx, cfg: &ConfigFile, ratios: Option<String>) -> Result<Footer, CliError> {
    let ratios = match cfg.resolve_opt(ratios, "ratios")? {
        Some(raw) => parse_triple(&raw, "ratios")?,
        None => (0.8, 0.1, 0.1),
    };
    validate_ratios(ratios).map_err(|e| CliError::Config(e.to_string()))?;
    let seed = ctx.seed;
    run_map(ctx, move |line| {
        let mut wire: SurrogateWire = serde_json::from_str(line).map_err(|e| e.to_string())?;
        wire.split = assign_split(seed, &wire.id, ratios);
        Ok(Some(serde_json::to_string(&wire).expect("serializes")))
    })
}

fn cmd_paraclean(
    ctx: Ctx,
    cfg: &ConfigFile,
    copy_thresh: Option<f64>,
    mutual_thresh: Option<f64>,
    unrelated_thresh: Option<f64>,
    measure: Option<String>,
    max_per_original: Option<usize>,
) -> Result<Footer, CliError> {
    let clean_cfg = CleanConfig {
        copy_thresh: cfg.resolve(copy_thresh, "copy-thresh", 0.95f64)?,
        mutual_thresh: cfg.resolve(mutual_thresh, "mutual-thresh", 0.50f64)?,
        unrelated_thresh: cfg.resolve(unrelated_thresh, "unrelated-thresh", 0.0f64)?,
        measure: match cfg.resolve(measure, "measure", "jaccard".to_string())?.as_str() {
            "jaccard" => Similarity::Jaccard,
            "dice" => Similarity::Dice,
            other => return Err(CliError::Config(format!("unknown measure {other:?}"))),
        },
    };
    for (name, t) in [
        ("copy-thresh", clean_cfg.copy_thresh),
        ("mutual-thresh", clean_cfg.mutual_thresh),
        ("unrelated-thresh", clean_cfg.unrelated_thresh),
    ] {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Config(format!("{name} must be in [0, 1]")));
        }
    }
    let cap = cfg.resolve_opt(max_per_original, "max-per-original")?;

    run_map(ctx, move |line| {
        let wire: ParaSetWire = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let set = ParaphraseSet {
            original: normalize(&RawTweet::new(wire.original_id.clone(), wire.original)),
            candidates: wire
                .candidates
                .into_iter()
                .enumerate()
                .map(|(i, text)| normalize(&RawTweet::new(format!("{}#{i}", wire.original_id), text)))
                .collect(),
            original_id: wire.original_id,
        };
        let report = clean(&set, &clean_cfg);
        let mut kept: Vec<String> = report
            .kept_indices()
            .into_iter()
            .map(|i| set.candidates[i].canonical_text())
            .collect();
        if let Some(cap) = cap {
            kept.truncate(cap);
        }
        let out = ParaReportWire {
            original_id: set.original_id,
            verdicts: report.verdicts.clone(),
            sim_to_original: report.sim_to_original.clone(),
            mutual_pairs_dropped: report.mutual_pairs_dropped.clone(),
            kept,
        };
        Ok(Some(serde_json::to_string(&out).expect("serializes")))
    })
}

fn cmd_vocab(
    mut ctx: Ctx,
    cfg: &ConfigFile,
    kind: Option<String>,
    min_count: Option<u64>,
) -> Result<Footer, CliError> {
    let kind_raw = cfg
        .resolve_opt(kind, "kind")?
        .ok_or_else(|| CliError::Config("vocab requires --kind".into()))?;
    let kind = LabelKind::parse(&kind_raw)
        .ok_or_else(|| CliError::Config(format!("unknown label kind {kind_raw:?}")))?;
    let min_count = cfg.resolve(min_count, "min-count", 200u64)?;
    if min_count == 0 {
        return Err(CliError::Config("min-count must be >= 1".into()));
    }
    let end_tag = match kind {
        LabelKind::Hashtag => SubsetTag::HashtagEnd,
        LabelKind::Emoji => SubsetTag::EmojiEnd,
    };

    let mut footer = Footer::default();
    let mut counter = LabelCounter::default();
    drive(
        ctx.input,
        &ctx.pool,
        ctx.strict,
        &mut footer,
        |line| {
            let t = parse_normalized(line)?;
            if !matches_tag(&t, end_tag) {
                return Ok(None);
            }
            Ok(extract_label(&t, kind).map(|(label, _)| label))
        },
        |item, _| {
            if let Some(label) = item {
                counter.push(&label);
            }
            Ok(())
        },
    )?;
    let vocab = counter.build(min_count, kind);
    footer.written = vocab.labels.len() as u64;
    vocab.write(&mut ctx.output).map_err(|e| CliError::Input(e.to_string()))?;
    ctx.output.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(footer)
}
