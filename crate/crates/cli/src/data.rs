//! `lexicon`, `corpus` and `agreement` subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Subcommand, ValueEnum};
use serde_json::json;

use emoguard::agreement::{fleiss_kappa, load_annotations, span_agreement_f1, RatingMatrix};
use emoguard::corpus::{
    corpus_stats, emoji_context_report, parse_corpus, perturb, split, Corpus, LoadMode, PerturbMode, SpanCategory,
};
use emoguard::emojitext::{composition_histogram, Adjacency};
use emoguard::lexicon::{parse_lexicon, validate_lexicon_source, Lexicon, LexiconFormat, CANONICAL_ENTRY_COUNT};

use crate::io::{emit_json, emit_text, key_value_csv, write_file, Format, Inputs};
use crate::Globals;

#[derive(Debug, Subcommand)]
pub enum LexiconCmd {
    /// Check a sensitivity matrix file; exits nonzero on violations.
    Validate {
        path: PathBuf,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        input_format: Option<InputFormat>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    Json,
    Tsv,
}

impl From<InputFormat> for LexiconFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Json => LexiconFormat::Json,
            InputFormat::Tsv => LexiconFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PerturbArg {
    Shuffle,
    Replace,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdjacencyArg {
    Whitespace,
    Strict,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Validate every post; exits nonzero when any row is invalid.
    Validate { path: PathBuf },
    /// Label, emoji, length and span counts.
    Stats { path: PathBuf },
    /// Composition-length histogram and per-emoji span context counts.
    EmojiReport {
        path: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "whitespace")]
        adjacency: AdjacencyArg,
    },
    /// Stratified train/test split written to `<out-dir>/{train,test}.jsonl`.
    Split {
        path: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Emoji noise on a fraction of emoji-bearing posts.
    Perturb {
        path: PathBuf,
        #[arg(long, value_enum)]
        mode: PerturbArg,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CategoryArg {
    Cm,
    Si,
}

#[derive(Debug, Subcommand)]
pub enum AgreementCmd {
    /// Fleiss' kappa from an items-by-categories count CSV.
    Kappa {
        #[arg(long)]
        ratings: PathBuf,
    },
    /// Pairwise span F1 from a directory of `<annotator>.jsonl` files.
    Spans {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_enum)]
        category: CategoryArg,
    },
}

pub fn load_lexicon_file(inputs: &mut Inputs, path: &Path) -> Result<Lexicon> {
    let text = inputs.read(path)?;
    parse_lexicon(&text, LexiconFormat::from_path(path), path.display().to_string())
        .with_context(|| format!("loading lexicon {}", path.display()))
}

pub fn load_corpus_file(inputs: &mut Inputs, path: &Path, strict: bool) -> Result<Corpus> {
    let text = inputs.read(path)?;
    let mode = if strict { LoadMode::Strict } else { LoadMode::Lenient };
    let out = parse_corpus(&text, mode).with_context(|| format!("loading corpus {}", path.display()))?;
    if !out.violations.is_empty() {
        log::warn!("{}: dropped {} invalid rows", path.display(), out.violations.len());
    }
    Ok(out.corpus)
}

pub fn lexicon(cmd: LexiconCmd, g: &Globals) -> Result<()> {
    match cmd {
        LexiconCmd::Validate { path, input_format } => {
            let mut inputs = Inputs::default();
            let text = inputs.read(&path)?;
            let format = input_format.map_or_else(|| LexiconFormat::from_path(&path), Into::into);
            let report = validate_lexicon_source(&text, format);
            match g.format {
                Format::Json => emit_json(&report, None)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["kind", "location", "message"])?;
                    for f in &report.violations {
                        let loc = f.location.as_ref().map(ToString::to_string).unwrap_or_default();
                        w.write_record([format!("{:?}", f.kind), loc, f.message.clone()])?;
                    }
                    emit_text(&String::from_utf8(w.into_inner()?)?, None)?;
                }
            }
            if !report.is_clean() {
                bail!("{} violation(s) in {}", report.violations.len(), path.display());
            }
            if g.strict && report.entry_count != CANONICAL_ENTRY_COUNT {
                bail!(
                    "--strict: {} entries, expected {CANONICAL_ENTRY_COUNT}",
                    report.entry_count
                );
            }
            Ok(())
        }
    }
}

pub fn corpus(cmd: CorpusCmd, g: &Globals) -> Result<()> {
    let mut inputs = Inputs::default();
    match cmd {
        CorpusCmd::Validate { path } => {
            let text = inputs.read(&path)?;
            let out = parse_corpus(&text, LoadMode::Lenient)?;
            let report = json!({
                "valid_posts": out.corpus.len(),
                "violations": out.violations,
                "warnings": out.warnings,
            });
            emit_json(&report, None)?;
            if !out.violations.is_empty() {
                bail!("{} invalid row(s) in {}", out.violations.len(), path.display());
            }
            if g.strict && !out.warnings.is_empty() {
                bail!("--strict: {} warning(s) in {}", out.warnings.len(), path.display());
            }
        }
        CorpusCmd::Stats { path } => {
            let c = load_corpus_file(&mut inputs, &path, g.strict)?;
            let stats = corpus_stats(&c);
            match g.format {
                Format::Json => emit_json(&stats, None)?,
                Format::Csv => emit_text(&key_value_csv(&stats)?, None)?,
            }
        }
        CorpusCmd::EmojiReport {
            path,
            lexicon,
            adjacency,
        } => {
            let c = load_corpus_file(&mut inputs, &path, g.strict)?;
            let lex = match &lexicon {
                Some(p) => load_lexicon_file(&mut inputs, p)?,
                None => Lexicon::from_entries(vec![], "none")?,
            };
            let adjacency = match adjacency {
                AdjacencyArg::Whitespace => Adjacency::WhitespaceTolerant,
                AdjacencyArg::Strict => Adjacency::Strict,
            };
            let hist = composition_histogram(&c.posts, adjacency);
            let context = emoji_context_report(&c.posts, &lex);
            match g.format {
                Format::Json => emit_json(&json!({ "compositions": hist.rows(), "emojis": context }), None)?,
                Format::Csv => emit_text(&format!("{}\n{}", hist.to_csv(), context.to_csv()), None)?,
            }
        }
        CorpusCmd::Split {
            path,
            fraction,
            out_dir,
        } => {
            let c = load_corpus_file(&mut inputs, &path, g.strict)?;
            let (train, test) = split(&c, fraction, g.seed)?;
            write_file(&out_dir.join("train.jsonl"), &train.to_jsonl())?;
            write_file(&out_dir.join("test.jsonl"), &test.to_jsonl())?;
            emit_json(
                &json!({ "seed": g.seed, "fraction": fraction, "train": train.len(), "test": test.len() }),
                None,
            )?;
        }
        CorpusCmd::Perturb {
            path,
            mode,
            fraction,
            lexicon,
            out,
        } => {
            let c = load_corpus_file(&mut inputs, &path, g.strict)?;
            let lex = lexicon
                .as_ref()
                .map(|p| load_lexicon_file(&mut inputs, p))
                .transpose()?;
            let mode = match mode {
                PerturbArg::Shuffle => PerturbMode::ShufflePositions,
                PerturbArg::Replace => PerturbMode::ReplaceRandom,
            };
            let outcome = perturb(&c, mode, fraction, g.seed, lex.as_ref())?;
            write_file(&out, &outcome.corpus.to_jsonl())?;
            emit_json(
                &json!({ "seed": g.seed, "mode": mode, "selected": outcome.selected_ids }),
                None,
            )?;
        }
    }
    Ok(())
}

pub fn agreement(cmd: AgreementCmd, _g: &Globals) -> Result<()> {
    match cmd {
        AgreementCmd::Kappa { ratings } => {
            let text = Inputs::default().read(&ratings)?;
            let m = RatingMatrix::from_csv(&text)?;
            let kappa = fleiss_kappa(&m)?;
            emit_json(
                &json!({ "kappa": kappa, "items": m.items(), "categories": m.categories(), "raters": m.raters() }),
                None,
            )
        }
        AgreementCmd::Spans { annotations, category } => {
            let a = load_annotations(&annotations)?;
            let cat = match category {
                CategoryArg::Cm => SpanCategory::Cm,
                CategoryArg::Si => SpanCategory::Si,
            };
            let f1 = span_agreement_f1(&a, cat)?;
            emit_json(
                &json!({ "category": cat, "f1": f1, "annotators": a.keys().collect::<Vec<_>>() }),
                None,
            )
        }
    }
}
