//! `prompt`, `run` and `eval` subcommands.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use emoguard::corpus::{Corpus, Post};
use emoguard::gateway::{backend_from_config, complete_all, parse_prediction, BackendKind, ParseRoute};
use emoguard::lexicon::Lexicon;
use emoguard::metrics::{
    evaluate, paired_t_test, EvalOptions, EvalReport, F1Average, HashingEmbedder, Normalization, Prediction, RunMeta,
    Sample,
};
use emoguard::prompts::{
    build_fewshot, build_finetune, build_rationale, build_synthetic, build_zeroshot, select_exemplars, PromptInstance,
    PromptMode,
};
use emoguard::Label;

use crate::data::{load_corpus_file, load_lexicon_file};
use crate::io::{emit_json, parse_jsonl, to_jsonl, write_file, Inputs, ToolConfig};
use crate::Globals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Finetune,
    Rationale,
    Zeroshot,
    Fewshot,
    Synthetic,
}

#[derive(Debug, Subcommand)]
pub enum PromptCmd {
    /// Render prompts for every post of a corpus as JSONL.
    Build(BuildArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Posts to render; not needed for `synthetic`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Few-shot exemplar count (2 or 5).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Prediction records to explain (`rationale` mode).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Mock,
    Http,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Overrides the backend named in the config file.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long)]
    pub prompts: PathBuf,
    /// Gold corpus the mock backend answers from.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Macro-averaged classification F1 instead of the self-harm class F1.
    #[arg(long)]
    pub r#macro: bool,
    /// Drop English articles before span token matching.
    #[arg(long)]
    pub remove_articles: bool,
}

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    Classification(EvalArgs),
    Spans(EvalArgs),
    Rationale(EvalArgs),
    /// Paired t-test on one metric's per-sample values of two reports.
    Significance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "classification_f1")]
        metric: String,
    },
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub mode: PromptMode,
    pub raw: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<ParseRoute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Prediction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn read_predictions(text: &str) -> Result<BTreeMap<String, Option<Prediction>>> {
    let mut out = BTreeMap::new();
    for v in parse_jsonl::<serde_json::Value>(text, "predictions")? {
        let id = v["id"]
            .as_str()
            .ok_or_else(|| anyhow!("prediction line without id"))?
            .to_string();
        let p = if v.get("raw").is_some() || v.get("prediction").is_some() {
            serde_json::from_value::<PredictionRecord>(v)?.prediction
        } else {
            Some(serde_json::from_value::<Prediction>(v)?)
        };
        out.insert(id, p);
    }
    Ok(out)
}

pub fn build_prompts(
    mode: ModeArg,
    corpus: Option<&Corpus>,
    lexicon: Option<&Lexicon>,
    k: usize,
    seed: u64,
    predictions: Option<&BTreeMap<String, Option<Prediction>>>,
) -> Result<Vec<PromptInstance>> {
    if mode == ModeArg::Synthetic {
        return Ok(vec![
            build_synthetic(Label::SelfHarm),
            build_synthetic(Label::NonSelfHarm),
        ]);
    }
    let corpus = corpus.ok_or_else(|| anyhow!("--corpus is required for this mode"))?;
    let need_lexicon = || lexicon.ok_or_else(|| anyhow!("{mode:?} prompts need --lexicon"));
    Ok(match mode {
        ModeArg::Finetune => {
            let lex = need_lexicon()?;
            corpus.posts.iter().map(|p| build_finetune(p, lex)).collect()
        }
        ModeArg::Rationale => {
            let lex = need_lexicon()?;
            let preds = predictions.ok_or_else(|| anyhow!("rationale prompts need --predictions"))?;
            let mut out = Vec::new();
            for p in &corpus.posts {
                match preds.get(&p.id).and_then(Option::as_ref) {
                    Some(pred) => out.push(build_rationale(p, Some(pred), lex)?),
                    None => log::warn!("post {}: no parsed prediction, skipped", p.id),
                }
            }
            out
        }
        ModeArg::Zeroshot => corpus.posts.iter().map(build_zeroshot).collect::<Result<_, _>>()?,
        ModeArg::Fewshot => {
            let exemplars = select_exemplars(corpus, k, seed)?;
            let taken: HashSet<&str> = exemplars.iter().map(|p| p.id.as_str()).collect();
            corpus
                .posts
                .iter()
                .filter(|p| !taken.contains(p.id.as_str()))
                .map(|p| build_fewshot(p, &exemplars))
                .collect::<Result<_, _>>()?
        }
        ModeArg::Synthetic => unreachable!(),
    })
}

pub fn prompt(cmd: PromptCmd, g: &Globals) -> Result<()> {
    let PromptCmd::Build(a) = cmd;
    let mut inputs = Inputs::default();
    let corpus = a
        .corpus
        .as_ref()
        .map(|p| load_corpus_file(&mut inputs, p, g.strict))
        .transpose()?;
    let lexicon = a
        .lexicon
        .as_ref()
        .map(|p| load_lexicon_file(&mut inputs, p))
        .transpose()?;
    let preds = a
        .predictions
        .as_ref()
        .map(|p| inputs.read(p).and_then(|t| read_predictions(&t)))
        .transpose()?;
    let prompts = build_prompts(a.mode, corpus.as_ref(), lexicon.as_ref(), a.k, g.seed, preds.as_ref())?;
    write_file(&a.out, &to_jsonl(&prompts))?;
    emit_json(
        &json!({ "mode": a.mode.to_possible_value().unwrap().get_name(), "prompts": prompts.len(), "out": a.out }),
        None,
    )
}

/// Gold answers keyed by post id, for the mock backend.
pub fn golds(corpus: &Corpus) -> BTreeMap<String, Prediction> {
    corpus
        .posts
        .iter()
        .map(|p| (p.id.clone(), Prediction::from_post(p)))
        .collect()
}

pub fn run_prompts(
    config: &ToolConfig,
    prompts: &[PromptInstance],
    gold: Option<&Corpus>,
) -> Result<Vec<PredictionRecord>> {
    let backend = backend_from_config(&config.backend, gold.map(golds).unwrap_or_default())?;
    let results = complete_all(backend.as_ref(), prompts, config.backend.max_concurrent);
    let mut out = Vec::with_capacity(prompts.len());
    for (prompt, result) in prompts.iter().zip(results) {
        let id = prompt.id.clone().unwrap_or_default();
        let raw = result.with_context(|| format!("completing prompt {id}"))?;
        let mut rec = PredictionRecord {
            id,
            mode: prompt.mode,
            raw: raw.text.clone(),
            latency_ms: raw.latency_ms,
            route: None,
            prediction: None,
            error: None,
        };
        if prompt.mode == PromptMode::Rationale {
            rec.prediction = prompt.input.classification.map(|label| Prediction {
                label,
                cm_spans: prompt.input.casual_mention_spans.clone().unwrap_or_default(),
                si_spans: prompt.input.serious_intent_spans.clone().unwrap_or_default(),
                rationale: raw.text.trim().to_string(),
            });
        } else {
            match parse_prediction(&raw) {
                Ok(parsed) => {
                    rec.route = Some(parsed.route);
                    rec.prediction = Some(parsed.prediction);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn run(a: RunArgs, g: &Globals) -> Result<()> {
    let mut config = ToolConfig::load(g.config.as_deref())?;
    if let Some(b) = a.backend {
        config.backend.backend = match b {
            BackendArg::Mock => BackendKind::Mock,
            BackendArg::Http => BackendKind::Http,
        };
    }
    let mut inputs = Inputs::default();
    let prompts: Vec<PromptInstance> = parse_jsonl(&inputs.read(&a.prompts)?, "prompts")?;
    let gold = a
        .gold
        .as_ref()
        .map(|p| load_corpus_file(&mut inputs, p, g.strict))
        .transpose()?;
    let records = run_prompts(&config, &prompts, gold.as_ref())?;
    write_file(&a.out, &to_jsonl(&records))?;
    let failed = records.iter().filter(|r| r.prediction.is_none()).count();
    emit_json(
        &json!({ "completions": records.len(), "unparseable": failed, "out": a.out }),
        None,
    )
}

pub fn samples(gold: &Corpus, preds: &BTreeMap<String, Option<Prediction>>) -> Vec<Sample> {
    gold.posts
        .iter()
        .filter_map(|p: &Post| {
            preds.get(&p.id).map(|pred| Sample {
                id: p.id.clone(),
                gold: Prediction::from_post(p),
                pred: pred.clone(),
            })
        })
        .collect()
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

pub fn eval(cmd: EvalCmd, g: &Globals) -> Result<()> {
    let (a, opts) = match cmd {
        EvalCmd::Significance { a, b, metric } => {
            let mut inputs = Inputs::default();
            let read = |inputs: &mut Inputs, p: &PathBuf| -> Result<EvalReport> {
                serde_json::from_str(&inputs.read(p)?).with_context(|| format!("parsing {}", p.display()))
            };
            let ra = read(&mut inputs, &a)?;
            let rb = read(&mut inputs, &b)?;
            let get = |r: &EvalReport, p: &PathBuf| {
                r.metric(&metric)
                    .map(|m| m.per_sample.clone())
                    .ok_or_else(|| anyhow!("{} has no metric {metric}", p.display()))
            };
            let t = paired_t_test(&get(&ra, &a)?, &get(&rb, &b)?)?;
            return emit_json(&json!({ "metric": metric, "test": t, "inputs": inputs.digests }), None);
        }
        EvalCmd::Classification(a) => (a, (true, false, false)),
        EvalCmd::Spans(a) => (a, (false, true, false)),
        EvalCmd::Rationale(a) => (a, (false, false, true)),
    };
    let mut inputs = Inputs::default();
    let gold = load_corpus_file(&mut inputs, &a.gold, g.strict)?;
    let preds = read_predictions(&inputs.read(&a.pred)?)?;
    let samples = samples(&gold, &preds);
    if samples.is_empty() {
        bail!("no prediction ids match the gold corpus");
    }
    let options = EvalOptions {
        classification: opts.0,
        spans: opts.1,
        rationale: opts.2,
        average: if a.r#macro {
            F1Average::Macro
        } else {
            F1Average::Positive
        },
        normalization: Normalization {
            remove_articles: a.remove_articles,
        },
    };
    let meta = RunMeta {
        seed: g.seed,
        model_id: String::new(),
        timestamp: now(),
    };
    let mut report = evaluate(&samples, &options, &HashingEmbedder::default(), meta)?;
    report.manifest = Some(json!({ "tool_version": env!("CARGO_PKG_VERSION"), "inputs": inputs.digests }));
    emit_json(&report, a.report.as_ref())
}
