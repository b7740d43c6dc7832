//! End-to-end runs: split, build prompts, complete, parse, score.
//!
//! Run `i` uses seed `seed + i`. One generator seeded from it yields the
//! split seed and the exemplar seed, and the mock fixture id is suffixed
//! with it, so a run never reads ambient entropy. The aggregate report keeps
//! one value per run in `per_sample` and reports the population variance of
//! those run means.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use emoguard::corpus::{split, Corpus};
use emoguard::gateway::BackendKind;
use emoguard::lexicon::Lexicon;
use emoguard::metrics::{
    evaluate, EvalOptions, EvalReport, F1Average, HashingEmbedder, MetricSummary, Normalization, Prediction, RunMeta,
};
use emoguard::prompts::{
    build_fewshot, build_finetune, build_rationale, build_zeroshot, select_exemplars, PromptInstance,
};
use emoguard::util::seeded_rng;

use crate::data::{load_corpus_file, load_lexicon_file};
use crate::io::{emit_json, to_jsonl, write_file, Inputs, ToolConfig};
use crate::model::{now, run_prompts, samples, ModeArg, PredictionRecord};
use crate::Globals;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub test_fraction: f64,
    pub fewshot_k: usize,
    pub average: F1Average,
    pub remove_articles: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            test_fraction: 0.2,
            fewshot_k: 2,
            average: F1Average::Positive,
            remove_articles: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub run: u64,
    pub split: u64,
    pub exemplars: u64,
}

/// Everything needed to replay a pipeline invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub mode: ModeArg,
    pub config: ToolConfig,
    pub seeds: Vec<RunSeeds>,
    pub inputs: BTreeMap<String, String>,
    /// Stage name to elapsed milliseconds, summed over runs.
    pub timings_ms: BTreeMap<String, u64>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "finetune")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    /// Few-shot exemplar count; overrides the config.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl RunSeeds {
    pub fn derive(run: u64) -> RunSeeds {
        let mut rng = seeded_rng(run);
        RunSeeds {
            run,
            split: rng.next_u64(),
            exemplars: rng.next_u64(),
        }
    }
}

struct Timer(BTreeMap<String, u64>);

impl Timer {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().with_context(|| format!("stage {name}"))?;
        *self.0.entry(name.to_string()).or_default() += start.elapsed().as_millis() as u64;
        Ok(out)
    }
}

fn options(mode: ModeArg, s: &PipelineSettings) -> Result<EvalOptions> {
    let (classification, spans, rationale) = match mode {
        ModeArg::Finetune => (true, true, true),
        ModeArg::Rationale => (false, false, true),
        ModeArg::Zeroshot | ModeArg::Fewshot => (true, false, true),
        ModeArg::Synthetic => bail!("synthetic prompts have nothing to score; use `prompt build`"),
    };
    Ok(EvalOptions {
        classification,
        spans,
        rationale,
        average: s.average,
        normalization: Normalization {
            remove_articles: s.remove_articles,
        },
    })
}

/// Prompts for the test side of one run.
fn build(
    mode: ModeArg,
    train: &Corpus,
    test: &Corpus,
    lexicon: Option<&Lexicon>,
    k: usize,
    seeds: &RunSeeds,
) -> Result<Vec<PromptInstance>> {
    let lex = || lexicon.ok_or_else(|| anyhow!("{mode:?} mode needs --lexicon"));
    Ok(match mode {
        ModeArg::Finetune => {
            let lex = lex()?;
            test.posts.iter().map(|p| build_finetune(p, lex)).collect()
        }
        ModeArg::Rationale => {
            let lex = lex()?;
            test.posts
                .iter()
                .map(|p| build_rationale(p, Some(&Prediction::from_post(p)), lex))
                .collect::<Result<_, _>>()?
        }
        ModeArg::Zeroshot => test.posts.iter().map(build_zeroshot).collect::<Result<_, _>>()?,
        ModeArg::Fewshot => {
            let ex = select_exemplars(train, k, seeds.exemplars)?;
            test.posts
                .iter()
                .map(|p| build_fewshot(p, &ex))
                .collect::<Result<_, _>>()?
        }
        ModeArg::Synthetic => unreachable!("rejected by options()"),
    })
}

/// Attach second-stage rationales to first-stage predictions.
fn merge_rationales(records: &mut [PredictionRecord], rationales: &[PredictionRecord]) {
    let by_id: BTreeMap<&str, &PredictionRecord> = rationales.iter().map(|r| (r.id.as_str(), r)).collect();
    for rec in records.iter_mut() {
        if let (Some(p), Some(r)) = (rec.prediction.as_mut(), by_id.get(rec.id.as_str())) {
            p.rationale = r.raw.trim().to_string();
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn pipeline_run(
    corpus: &Corpus,
    lexicon: Option<&Lexicon>,
    mode: ModeArg,
    config: &ToolConfig,
    seed: u64,
    runs: u64,
    out_dir: &Path,
    mut inputs: BTreeMap<String, String>,
) -> Result<EvalReport> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let opts = options(mode, &config.pipeline).context("stage config")?;
    if matches!(mode, ModeArg::Finetune | ModeArg::Rationale) && lexicon.is_none() {
        bail!("stage prompt: {mode:?} mode needs --lexicon");
    }
    let mut timer = Timer(BTreeMap::new());
    let mut per_run = Vec::new();
    let mut all_seeds = Vec::new();
    for run in seed..seed + runs {
        let seeds = RunSeeds::derive(run);
        let dir = out_dir.join(format!("run-{run}"));
        let (train, test) = timer.stage("split", || {
            Ok(split(corpus, config.pipeline.test_fraction, seeds.split)?)
        })?;
        let prompts = timer.stage("prompt", || {
            build(mode, &train, &test, lexicon, config.pipeline.fewshot_k, &seeds)
        })?;

        let mut run_config = config.clone();
        if run_config.backend.backend == BackendKind::Mock {
            run_config.backend.mock.fixture_id = format!("{}-{run}", config.backend.mock.fixture_id);
        }
        let mut records = timer.stage("complete", || run_prompts(&run_config, &prompts, Some(&test)))?;
        let mut all_prompts = prompts;
        if mode == ModeArg::Finetune {
            let lex = lexicon.expect("checked above");
            let second: Vec<PromptInstance> = timer.stage("prompt", || {
                let mut out = Vec::new();
                for rec in &records {
                    if let (Some(p), Some(post)) = (&rec.prediction, test.get(&rec.id)) {
                        out.push(build_rationale(post, Some(p), lex)?);
                    }
                }
                Ok(out)
            })?;
            let rationales = timer.stage("complete", || run_prompts(&run_config, &second, Some(&test)))?;
            merge_rationales(&mut records, &rationales);
            all_prompts.extend(second);
        }

        let preds: BTreeMap<String, Option<Prediction>> =
            records.iter().map(|r| (r.id.clone(), r.prediction.clone())).collect();
        let report = timer.stage("score", || {
            let meta = RunMeta {
                seed: run,
                model_id: config.backend.model_id.clone(),
                timestamp: now(),
            };
            Ok(evaluate(
                &samples(&test, &preds),
                &opts,
                &HashingEmbedder::default(),
                meta,
            )?)
        })?;

        timer.stage("write", || {
            write_file(&dir.join("train.jsonl"), &train.to_jsonl())?;
            write_file(&dir.join("test.jsonl"), &test.to_jsonl())?;
            write_file(&dir.join("prompts.jsonl"), &to_jsonl(&all_prompts))?;
            write_file(&dir.join("predictions.jsonl"), &to_jsonl(&records))?;
            emit_json(&report, Some(&dir.join("report.json")))
        })?;
        log::info!("run {run}: {} test posts scored", test.len());
        per_run.push(report);
        all_seeds.push(seeds);
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        mode,
        config: config.clone(),
        seeds: all_seeds,
        inputs: std::mem::take(&mut inputs),
        timings_ms: timer.0,
    };
    let report = aggregate(
        &per_run,
        seed,
        &config.backend.model_id,
        serde_json::to_value(&manifest)?,
    );
    emit_json(&manifest, Some(&out_dir.join("manifest.json")))?;
    emit_json(&report, Some(&out_dir.join("report.json")))?;
    Ok(report)
}

/// One `per_sample` entry per run: that run's metric mean.
pub fn aggregate(runs: &[EvalReport], seed: u64, model_id: &str, manifest: serde_json::Value) -> EvalReport {
    let mut metrics = BTreeMap::new();
    let names: HashSet<&String> = runs.iter().flat_map(|r| r.metrics.keys()).collect();
    for name in names {
        let means: Vec<f64> = runs.iter().filter_map(|r| r.metric(name)).map(|m| m.mean).collect();
        metrics.insert(name.clone(), MetricSummary::from_samples(means));
    }
    let mut counters = BTreeMap::new();
    for r in runs {
        for (k, v) in &r.counters {
            *counters.entry(k.clone()).or_default() += v;
        }
    }
    counters.insert("runs".into(), runs.len() as u64);
    EvalReport {
        metrics,
        meta: RunMeta {
            seed,
            model_id: model_id.to_string(),
            timestamp: now(),
        },
        counters,
        manifest: Some(manifest),
    }
}

pub fn pipeline(a: PipelineArgs, g: &Globals) -> Result<()> {
    let mut config = ToolConfig::load(g.config.as_deref()).context("stage config")?;
    if let Some(k) = a.k {
        config.pipeline.fewshot_k = k;
    }
    let mut inputs = Inputs::default();
    let corpus = load_corpus_file(&mut inputs, &a.corpus, g.strict).context("stage load")?;
    let lexicon = a
        .lexicon
        .as_ref()
        .map(|p| load_lexicon_file(&mut inputs, p))
        .transpose()
        .context("stage load")?;
    let out = pipeline_run(
        &corpus,
        lexicon.as_ref(),
        a.mode,
        &config,
        g.seed,
        a.runs,
        &a.out_dir,
        inputs.digests,
    )?;
    emit_json(&out, None)
}
