//! Prompt rendering for fine-tuning, rationale generation, zero-shot,
//! few-shot and synthetic-post generation.
//!
//! Every instance serializes as one JSON object with `instruction`, `input`
//! and `output` keys (plus `mode` and an optional `id`). `output` is the
//! expected answer for fine-tuning instances and `""` otherwise.
//! [`PromptInstance::render`] produces the text sent to a model.

use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Corpus, Post};
use crate::emojitext;
use crate::lexicon::{lookup_key, Lexicon};
use crate::metrics::Prediction;
use crate::util::seeded_rng;
use crate::Label;

pub const FINETUNE_INSTRUCTION: &str = "Analyze the following social media post to determine if it is related to self-harm. Identify spans related to casual mention and serious intent regarding self-harm.";

pub const RATIONALE_INSTRUCTION: &str = "Using the provided classification and extracted spans, generate a rationale explaining why the post is classified as self-harm or non-self-harm. Consider the spans and the emoji meanings provided.";

pub const ZEROSHOT_INSTRUCTION: &str = "You are tasked with evaluating social media posts to classify them as self-harm or non self-harm. Review the post below and provide your classification. Additionally, write a detailed rationale that explains your decision, taking into account the content and context of the post.";

pub const FEWSHOT_INSTRUCTION: &str = "You are tasked with evaluating social media posts to classify them as self-harm or non self-harm. Review the following posts and classifications to understand the task. Then classify the new post and write a detailed rationale that explains your decision, taking into account the content and context of the post.";

pub const SYNTHETIC_SH_INSTRUCTION: &str = "Create a Reddit post where the author reflects on their experiences with self-harm. The post should express a real person's emotions and thoughts, incorporating past incidents, current struggles, or stories related to their journey. Encourage the author to discuss their feelings, the impact on their life, or how they\u{2019}ve tried to cope with their condition. The language should be varied and natural, avoiding repetition.";

pub const SYNTHETIC_NSH_INSTRUCTION: &str = "Create a Reddit post containing phrases which indicate self harm in a joking or casual way. Phrases will be containing the self-harm intentions in a sarcastic way where the author is not actually going to harm himself or herself. It can show the irritation, stress, anger or disgrace just to express the situation. The author should be in a light mood to express his/her thoughts.";

const OUTPUT_TEMPLATE: &str = "Classification: [self-harm / non self-harm]\nRationale: Describes the factors and considerations that guided the classification decision.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    FineTune,
    Rationale,
    ZeroShot,
    FewShot,
    Synthetic,
}

/// Lexicon information attached to each distinct emoji of a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiEnrichment {
    pub emoji: String,
    pub usual_meaning: String,
    pub contextual_meaning: String,
    #[serde(rename = "casual mention chance")]
    pub cm_chance: String,
    #[serde(rename = "serious intent chance")]
    pub si_chance: String,
}

/// Worked example shown inside few-shot and synthetic prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub post: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Label>,
    #[serde(default, rename = "serious intent spans", skip_serializing_if = "Option::is_none")]
    pub si_spans: Option<Vec<String>>,
    #[serde(default, rename = "Casual intent spans", skip_serializing_if = "Option::is_none")]
    pub cm_spans: Option<Vec<String>>,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptInput {
    #[serde(rename = "post text", default, skip_serializing_if = "Option::is_none")]
    pub post_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casual_mention_spans: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serious_intent_spans: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emojis: Option<Vec<EmojiEnrichment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<Vec<Example>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub mode: PromptMode,
    pub instruction: String,
    pub input: PromptInput,
    #[serde(serialize_with = "ser_output", deserialize_with = "de_output", default)]
    pub output: Option<Prediction>,
}

fn ser_output<S: Serializer>(v: &Option<Prediction>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(p) => p.serialize(s),
        None => s.serialize_str(""),
    }
}

fn de_output<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Prediction>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Empty(String),
        Full(Prediction),
    }
    match Option::<Repr>::deserialize(d)? {
        None => Ok(None),
        Some(Repr::Full(p)) => Ok(Some(p)),
        Some(Repr::Empty(s)) if s.is_empty() => Ok(None),
        Some(Repr::Empty(s)) => Err(serde::de::Error::custom(format!(
            "output must be an object or \"\", got {s:?}"
        ))),
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("post {0:?} has an empty body")]
    MissingBody(String),
    #[error("post {0:?} has no prediction to explain")]
    MissingPrediction(String),
    #[error("few-shot prompt needs at least one exemplar")]
    EmptyExemplars,
    #[error("not enough {0} exemplars")]
    InsufficientExemplars(ExemplarCategory),
    #[error("exemplar count must be 2 or 5, got {0}")]
    UnsupportedCount(usize),
}

/// Distinct emojis of the post, in order of first occurrence, with their
/// lexicon entries. Glyphs the lexicon does not know get empty fields.
pub fn enrichment(post: &Post, lexicon: &Lexicon) -> Vec<EmojiEnrichment> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for text in post.text_fields() {
        for tok in emojitext::emoji_tokens(text) {
            if !seen.insert(lookup_key(tok.text)) {
                continue;
            }
            out.push(match lexicon.get(tok.text) {
                Some(e) => EmojiEnrichment {
                    emoji: e.glyph.clone(),
                    usual_meaning: e.usual_meaning.clone(),
                    contextual_meaning: e.contextual_meaning.clone(),
                    cm_chance: e.cm_chance.to_string(),
                    si_chance: e.si_chance.to_string(),
                },
                None => {
                    log::warn!("post {}: emoji {} not in lexicon", post.id, tok.text);
                    EmojiEnrichment {
                        emoji: tok.text.to_string(),
                        usual_meaning: String::new(),
                        contextual_meaning: String::new(),
                        cm_chance: String::new(),
                        si_chance: String::new(),
                    }
                }
            });
        }
    }
    out
}

pub fn build_finetune(post: &Post, lexicon: &Lexicon) -> PromptInstance {
    PromptInstance {
        id: Some(post.id.clone()),
        mode: PromptMode::FineTune,
        instruction: FINETUNE_INSTRUCTION.to_string(),
        input: PromptInput {
            post_text: Some(post.full_text()),
            emojis: Some(enrichment(post, lexicon)),
            ..PromptInput::default()
        },
        output: Some(Prediction::from_post(post)),
    }
}

pub fn build_rationale(
    post: &Post,
    prediction: Option<&Prediction>,
    lexicon: &Lexicon,
) -> Result<PromptInstance, PromptError> {
    let p = prediction.ok_or_else(|| PromptError::MissingPrediction(post.id.clone()))?;
    Ok(PromptInstance {
        id: Some(post.id.clone()),
        mode: PromptMode::Rationale,
        instruction: RATIONALE_INSTRUCTION.to_string(),
        input: PromptInput {
            post_text: Some(post.full_text()),
            classification: Some(p.label),
            casual_mention_spans: Some(p.cm_spans.clone()),
            serious_intent_spans: Some(p.si_spans.clone()),
            emojis: Some(enrichment(post, lexicon)),
            examples: None,
        },
        output: None,
    })
}

pub fn build_zeroshot(post: &Post) -> Result<PromptInstance, PromptError> {
    if post.body.trim().is_empty() {
        return Err(PromptError::MissingBody(post.id.clone()));
    }
    Ok(PromptInstance {
        id: Some(post.id.clone()),
        mode: PromptMode::ZeroShot,
        instruction: ZEROSHOT_INSTRUCTION.to_string(),
        input: PromptInput {
            post_text: Some(post.full_text()),
            ..PromptInput::default()
        },
        output: None,
    })
}

/// Short explanation attached to an exemplar, built from its gold spans.
pub fn exemplar_rationale(post: &Post) -> String {
    match (post.label, post.si_spans.first(), post.cm_spans.first()) {
        (Label::SelfHarm, Some(si), _) => format!(
            "The mention of \"{}\" suggests a serious consideration of self-harm.",
            si.text
        ),
        (Label::SelfHarm, None, Some(cm)) => format!(
            "Although \"{}\" could be read as casual, the post as a whole points to genuine self-harm.",
            cm.text
        ),
        (Label::SelfHarm, None, None) => "The post describes thoughts or acts of self-harm.".to_string(),
        (Label::NonSelfHarm, _, Some(cm)) => format!(
            "The phrase \"{}\" is used casually to express frustration and does not show an actual desire for self-harm.",
            cm.text
        ),
        (Label::NonSelfHarm, _, None) => {
            "The post expresses frustration but lacks any direct mention of self-harm.".to_string()
        }
    }
}

pub fn build_fewshot(post: &Post, exemplars: &[Post]) -> Result<PromptInstance, PromptError> {
    if exemplars.is_empty() {
        return Err(PromptError::EmptyExemplars);
    }
    if post.body.trim().is_empty() {
        return Err(PromptError::MissingBody(post.id.clone()));
    }
    let examples = exemplars
        .iter()
        .map(|e| Example {
            post: e.full_text(),
            classification: Some(e.label),
            si_spans: None,
            cm_spans: None,
            rationale: exemplar_rationale(e),
        })
        .collect();
    Ok(PromptInstance {
        id: Some(post.id.clone()),
        mode: PromptMode::FewShot,
        instruction: FEWSHOT_INSTRUCTION.to_string(),
        input: PromptInput {
            post_text: Some(post.full_text()),
            examples: Some(examples),
            ..PromptInput::default()
        },
        output: None,
    })
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn build_synthetic(label: Label) -> PromptInstance {
    let (instruction, examples) = match label {
        Label::SelfHarm => (
            SYNTHETIC_SH_INSTRUCTION,
            vec![
                Example {
                    post: "I keep finding myself tracing the scars on my skin, a reminder of the war inside my head. The urge to self-harm is like a shadow that never leaves, lurking in the corners of my mind. It's a battle between wanting to feel something and wanting the pain to stop. Sometimes the blade feels like the only friend who understands. But deep down, I know it's not the answer. Trying to hold on to hope like a fragile thread in a storm. One day at a time, one breath at a time. We're warriors fighting invisible battles, and our scars tell stories of survival.".into(),
                    classification: None,
                    si_spans: Some(strings(&[
                        "tracing the scars on my skin",
                        "urge to self-harm",
                        "the blade feels like the only friend",
                    ])),
                    cm_spans: None,
                    rationale: "The reference of \"urge to self-harm\" and \"the blade feels like the only friend\" is unquestionably an indication of the author's genuine resolve to cause physical harm to themselves.".into(),
                },
                Example {
                    post: "It\u{2019}s been years since I last hurt myself, but yesterday, I had the strongest urge to do it again. I found an old blade in my drawer and just sat there holding it, trying to convince myself not to use it. I didn\u{2019}t, but it was so hard.".into(),
                    classification: None,
                    si_spans: Some(strings(&["since I last hurt myself", "strongest urge to do it again"])),
                    cm_spans: None,
                    rationale: "The use of phrases like \"strongest urge to do it again\" by the user exhibit a definite intention of causing self-injury, combined with the context of the post.".into(),
                },
            ],
        ),
        Label::NonSelfHarm => (
            SYNTHETIC_NSH_INSTRUCTION,
            vec![
                Example {
                    post: "Great, my boss just gave me another pointless task. Guess I'll just bang my head against the wall.".into(),
                    classification: None,
                    si_spans: None,
                    cm_spans: Some(strings(&["bang my head against the wall"])),
                    rationale: "The mention of \"bang my head against the wall\" is a violent expression suggesting intention to hurt themselves, but,with the context of the situation, it is clearly just a metaphorical expression for frustration and does not show an actual desire for self harm.".into(),
                },
                Example {
                    post: "Lost all my progress because of a glitch. Might as well just throw myself off a cliff.".into(),
                    classification: None,
                    si_spans: None,
                    cm_spans: Some(strings(&[" throw myself off a cliff."])),
                    rationale: "The mention of \"throw myself off a cliff\" shows exasperation of author about loosing his work, but it is clear looking at the emojis that it is definitely not said in a serious intent of harming themselves.".into(),
                },
            ],
        ),
    };
    PromptInstance {
        id: None,
        mode: PromptMode::Synthetic,
        instruction: instruction.to_string(),
        input: PromptInput {
            examples: Some(examples),
            ..PromptInput::default()
        },
        output: None,
    }
}

fn quoted_list(v: &[String]) -> String {
    serde_json::to_string(v).expect("string list serializes")
}

impl PromptInstance {
    /// The `instruction`/`input` pair as a pretty JSON object, the layout used
    /// for fine-tuning records.
    fn render_json_input(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            instruction: &'a str,
            input: &'a PromptInput,
        }
        let record = Record {
            instruction: &self.instruction,
            input: &self.input,
        };
        serde_json::to_string_pretty(&record).expect("prompt serializes")
    }

    /// Text sent to a model.
    pub fn render(&self) -> String {
        match self.mode {
            PromptMode::FineTune | PromptMode::Rationale => {
                format!("{}\n\n## Output\n", self.render_json_input())
            }
            PromptMode::ZeroShot => format!(
                "## Instruction\n\n{}\n\n## Input\n\n{}\n\n## Output\n\n{OUTPUT_TEMPLATE}\n",
                self.instruction,
                self.input.post_text.as_deref().unwrap_or_default()
            ),
            PromptMode::FewShot => {
                let mut s = format!("## Instruction\n\n{}\n\n## Input\n\n", self.instruction);
                for (i, e) in self.input.examples.iter().flatten().enumerate() {
                    s.push_str(&format!("Example {}:\nPost: \"{}\"\n", i + 1, e.post));
                    if let Some(l) = e.classification {
                        s.push_str(&format!("Classification: {}\n", l.as_prose()));
                    }
                    s.push_str(&format!("Rationale: {}\n", e.rationale));
                }
                s.push_str(&format!(
                    "New Post:\n{}\n\n## Output\n\n{OUTPUT_TEMPLATE}\n",
                    self.input.post_text.as_deref().unwrap_or_default()
                ));
                s
            }
            PromptMode::Synthetic => {
                let mut s = format!("## Instruction\n\n{}\n\n## Input\n\n", self.instruction);
                for (i, e) in self.input.examples.iter().flatten().enumerate() {
                    s.push_str(&format!("Example {}:\nPost: \"{}\"\n", i + 1, e.post));
                    if let Some(v) = &e.si_spans {
                        s.push_str(&format!("serious intent spans: {}\n", quoted_list(v)));
                    }
                    if let Some(v) = &e.cm_spans {
                        s.push_str(&format!("Casual intent spans: {}\n", quoted_list(v)));
                    }
                    s.push_str(&format!("Rationale: {}\n\n", e.rationale));
                }
                s.push_str("## Output\n");
                s
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("prompt serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExemplarCategory {
    CasualMention,
    SeriousIntent,
    Borderline,
}

impl std::fmt::Display for ExemplarCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExemplarCategory::CasualMention => "casual-mention",
            ExemplarCategory::SeriousIntent => "serious-intent",
            ExemplarCategory::Borderline => "borderline",
        })
    }
}

/// Default borderline rule: a post carrying both casual-mention and
/// serious-intent spans.
pub fn has_both_span_kinds(post: &Post) -> bool {
    !post.cm_spans.is_empty() && !post.si_spans.is_empty()
}

fn sh_with_only_cm(post: &Post) -> bool {
    post.label == Label::SelfHarm && !post.cm_spans.is_empty() && post.si_spans.is_empty()
}

/// Few-shot exemplars: for `k = 2` one serious-intent (self-harm post with
/// SI spans) and one casual-mention (non-self-harm post with CM spans)
/// exemplar; for `k = 5` two of each plus one borderline post. Returned in
/// the order SI, CM, SI, CM, borderline.
///
/// Borderline posts are those with both span kinds; when there are none,
/// self-harm posts with only CM spans are used instead.
pub fn select_exemplars(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<Post>, PromptError> {
    let pool: Vec<&Post> = corpus.posts.iter().filter(|p| has_both_span_kinds(p)).collect();
    let rule: &dyn Fn(&Post) -> bool = if pool.is_empty() {
        &sh_with_only_cm
    } else {
        &has_both_span_kinds
    };
    select_exemplars_with(corpus, k, seed, rule)
}

/// [`select_exemplars`] with a caller-supplied borderline predicate.
pub fn select_exemplars_with(
    corpus: &Corpus,
    k: usize,
    seed: u64,
    is_borderline: &dyn Fn(&Post) -> bool,
) -> Result<Vec<Post>, PromptError> {
    let per_kind = match k {
        2 => 1,
        5 => 2,
        other => return Err(PromptError::UnsupportedCount(other)),
    };
    let mut rng = seeded_rng(seed);
    let mut draw = |pool: Vec<&Post>, n: usize, cat: ExemplarCategory| {
        if pool.len() < n {
            return Err(PromptError::InsufficientExemplars(cat));
        }
        let mut idx = index::sample(&mut rng, pool.len(), n).into_vec();
        idx.sort_unstable();
        Ok(idx.into_iter().map(|i| pool[i].clone()).collect::<Vec<Post>>())
    };

    let borderline = if k == 5 {
        draw(
            corpus.posts.iter().filter(|p| is_borderline(p)).collect(),
            1,
            ExemplarCategory::Borderline,
        )?
    } else {
        Vec::new()
    };
    let taken: HashSet<&str> = borderline.iter().map(|p| p.id.as_str()).collect();
    let si = draw(
        corpus
            .posts
            .iter()
            .filter(|p| p.label == Label::SelfHarm && !p.si_spans.is_empty() && !taken.contains(p.id.as_str()))
            .collect(),
        per_kind,
        ExemplarCategory::SeriousIntent,
    )?;
    let cm = draw(
        corpus
            .posts
            .iter()
            .filter(|p| p.label == Label::NonSelfHarm && !p.cm_spans.is_empty() && !taken.contains(p.id.as_str()))
            .collect(),
        per_kind,
        ExemplarCategory::CasualMention,
    )?;

    let mut out = Vec::with_capacity(k);
    for (s, c) in si.into_iter().zip(cm) {
        out.push(s);
        out.push(c);
    }
    out.extend(borderline);
    Ok(out)
}
