//! Annotated post corpus: JSONL schema, validation, statistics, emoji
//! context reports, train/test splitting and noise perturbations.
//!
//! One post per line, with fields
//! `id, title, body, label, cm_spans, si_spans, strategy_tags, provenance, split`.
//! Spans are either bare strings (anchored by text) or objects
//! `{"text": ..., "char_start": n, "char_end": m}` with character offsets
//! into `body`.

mod perturb;
mod report;
mod split;
mod stats;

pub use perturb::{perturb, strip_emoji, PerturbMode, PerturbOutcome};
pub use report::{emoji_context_report, EmojiContextReport, EmojiContextRow, Intent, StrategyIntentRow};
pub use split::split;
pub use stats::{corpus_stats, StatsReport};

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::emojitext::{self, Adjacency};
use crate::Label;

pub const SCHEMA_VERSION: &str = "1";

/// Maximum number of spans per category on one post.
pub const MAX_SPANS_PER_CATEGORY: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub text: String,
    pub char_start: Option<usize>,
    pub char_end: Option<usize>,
}

impl Span {
    pub fn text(text: impl Into<String>) -> Span {
        Span {
            text: text.into(),
            char_start: None,
            char_end: None,
        }
    }

    pub fn at(text: impl Into<String>, char_start: usize, char_end: usize) -> Span {
        Span {
            text: text.into(),
            char_start: Some(char_start),
            char_end: Some(char_end),
        }
    }

    pub fn has_offsets(&self) -> bool {
        self.char_start.is_some() || self.char_end.is_some()
    }
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Anchored<'a> {
            text: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            char_start: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            char_end: Option<usize>,
        }
        if self.has_offsets() {
            Anchored {
                text: &self.text,
                char_start: self.char_start,
                char_end: self.char_end,
            }
            .serialize(serializer)
        } else {
            serializer.serialize_str(&self.text)
        }
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Anchored {
                text: String,
                #[serde(default)]
                char_start: Option<usize>,
                #[serde(default)]
                char_end: Option<usize>,
            },
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Text(text) => Span::text(text),
            Repr::Anchored {
                text,
                char_start,
                char_end,
            } => Span {
                text,
                char_start,
                char_end,
            },
        })
    }
}

/// Span category: casual mention or serious intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanCategory {
    Cm,
    Si,
}

impl SpanCategory {
    pub fn field_name(self) -> &'static str {
        match self {
            SpanCategory::Cm => "cm_spans",
            SpanCategory::Si => "si_spans",
        }
    }
}

/// Emoji compositional strategy, stored per composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyTag {
    #[serde(alias = "DR", alias = "direct_representation")]
    Direct,
    #[serde(alias = "MU", alias = "metaphorical_use")]
    Metaphorical,
    #[serde(alias = "SL", alias = "semantic-list")]
    SemanticList,
}

impl StrategyTag {
    pub const ALL: [StrategyTag; 3] = [
        StrategyTag::Direct,
        StrategyTag::Metaphorical,
        StrategyTag::SemanticList,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Original,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
    pub label: Label,
    #[serde(default)]
    pub cm_spans: Vec<Span>,
    #[serde(default)]
    pub si_spans: Vec<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_tags: Option<Vec<StrategyTag>>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

/// `(field, reason)` pair reported by [`Post::check`].
pub type FieldIssue = (String, String);

/// Which text field of a post a span or emoji lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Title,
    Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanLocation {
    pub field: Field,
    pub range: Range<usize>,
}

pub(crate) fn char_to_byte(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

pub(crate) fn char_slice(s: &str, range: Range<usize>) -> Option<&str> {
    let start = char_to_byte(s, range.start)?;
    let end = char_to_byte(s, range.end)?;
    (start <= end).then(|| &s[start..end])
}

impl Post {
    pub fn new(id: impl Into<String>, body: impl Into<String>, label: Label) -> Post {
        Post {
            id: id.into(),
            title: None,
            body: body.into(),
            label,
            cm_spans: Vec::new(),
            si_spans: Vec::new(),
            strategy_tags: None,
            provenance: Provenance::Original,
            split: None,
        }
    }

    pub fn spans(&self, category: SpanCategory) -> &[Span] {
        match category {
            SpanCategory::Cm => &self.cm_spans,
            SpanCategory::Si => &self.si_spans,
        }
    }

    pub fn field(&self, field: Field) -> Option<&str> {
        match field {
            Field::Title => self.title.as_deref(),
            Field::Body => Some(&self.body),
        }
    }

    /// Title (when present) followed by body.
    pub fn text_fields(&self) -> impl Iterator<Item = &str> {
        self.title
            .as_deref()
            .into_iter()
            .chain(std::iter::once(self.body.as_str()))
    }

    pub(crate) fn fields(&self) -> impl Iterator<Item = (Field, &str)> {
        self.title
            .as_deref()
            .map(|t| (Field::Title, t))
            .into_iter()
            .chain(std::iter::once((Field::Body, self.body.as_str())))
    }

    /// Text shown to a model: title and body separated by a blank line.
    pub fn full_text(&self) -> String {
        match &self.title {
            Some(t) if !t.trim().is_empty() => format!("{t}\n\n{}", self.body),
            _ => self.body.clone(),
        }
    }

    pub fn has_emoji(&self) -> bool {
        self.text_fields().any(emojitext::contains_emoji)
    }

    pub fn word_count(&self) -> usize {
        self.text_fields().map(|t| t.split_whitespace().count()).sum()
    }

    /// Resolve where a span sits. Offsets refer to the body; text-only spans
    /// resolve to their first occurrence in the body, then in the title.
    pub fn locate_span(&self, span: &Span) -> Option<SpanLocation> {
        if let (Some(start), Some(end)) = (span.char_start, span.char_end) {
            let slice = char_slice(&self.body, start..end)?;
            return (slice == span.text).then_some(SpanLocation {
                field: Field::Body,
                range: start..end,
            });
        }
        if span.has_offsets() || span.text.is_empty() {
            return None;
        }
        for (field, text) in [
            (Field::Body, Some(self.body.as_str())),
            (Field::Title, self.title.as_deref()),
        ] {
            let Some(text) = text else { continue };
            if let Some(byte) = text.find(&span.text) {
                let start = text[..byte].chars().count();
                let end = start + span.text.chars().count();
                return Some(SpanLocation {
                    field,
                    range: start..end,
                });
            }
        }
        None
    }

    /// Invariant check: (errors, warnings), each as (field, reason).
    pub fn check(&self) -> (Vec<FieldIssue>, Vec<FieldIssue>) {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if self.id.trim().is_empty() {
            errors.push(("id".to_string(), "empty id".to_string()));
        }
        for category in [SpanCategory::Cm, SpanCategory::Si] {
            let spans = self.spans(category);
            let name = category.field_name();
            if spans.len() > MAX_SPANS_PER_CATEGORY {
                errors.push((
                    name.to_string(),
                    format!("{} spans, at most {MAX_SPANS_PER_CATEGORY} allowed", spans.len()),
                ));
            }
            for (i, span) in spans.iter().enumerate() {
                if let Some(reason) = self.span_problem(span) {
                    errors.push((format!("{name}[{i}]"), reason));
                }
            }
        }
        if self.label == Label::NonSelfHarm && !self.si_spans.is_empty() {
            errors.push((
                "si_spans".to_string(),
                "non-self-harm post carries serious-intent spans".to_string(),
            ));
        }
        if let Some(tags) = &self.strategy_tags {
            let n: usize = self
                .text_fields()
                .map(|t| emojitext::compositions(t, Adjacency::default()).len())
                .sum();
            if tags.len() != n {
                errors.push((
                    "strategy_tags".to_string(),
                    format!("{} tags for {n} emoji compositions", tags.len()),
                ));
            }
        }
        if self.label == Label::NonSelfHarm && self.cm_spans.is_empty() {
            warnings.push((
                "cm_spans".to_string(),
                "non-self-harm post has no casual-mention span".to_string(),
            ));
        }
        if self.body.trim().is_empty() {
            warnings.push(("body".to_string(), "empty body".to_string()));
        }
        (errors, warnings)
    }

    fn span_problem(&self, span: &Span) -> Option<String> {
        if span.text.is_empty() {
            return Some("empty span text".into());
        }
        match (span.char_start, span.char_end) {
            (Some(start), Some(end)) => match char_slice(&self.body, start..end) {
                None => Some(format!("offsets {start}..{end} out of range for body")),
                Some(slice) if slice != span.text => Some(format!(
                    "body[{start}..{end}] is {slice:?}, span text is {:?}",
                    span.text
                )),
                Some(_) => None,
            },
            (None, None) => self
                .locate_span(span)
                .is_none()
                .then(|| format!("span text {:?} does not occur in the post", span.text)),
            _ => Some("char_start and char_end must be given together".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub posts: Vec<Post>,
    pub schema_version: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("reading {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: {field}: {reason}")]
    SchemaViolation { line: usize, field: String, reason: String },
    #[error("duplicate post id {0:?}")]
    DuplicateId(String),
    #[error("fraction {0} outside the allowed range")]
    InvalidFraction(f64),
    #[error("insufficient posts: {0}")]
    InsufficientPosts(String),
    #[error("no post contains an emoji")]
    EmptySelection,
    #[error("replacement needs a non-empty lexicon")]
    MissingLexicon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// The first invalid row aborts the load.
    #[default]
    Strict,
    /// Invalid rows are dropped and reported.
    Lenient,
}

/// A problem found on one JSONL line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub line: usize,
    pub id: Option<String>,
    pub field: String,
    pub reason: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)?;
        if let Some(id) = &self.id {
            write!(f, " (id {id})")?;
        }
        write!(f, ": {}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    /// Rows dropped in lenient mode.
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl Corpus {
    pub fn new(posts: Vec<Post>) -> Result<Corpus, CorpusError> {
        let mut seen = HashSet::new();
        for p in &posts {
            if !seen.insert(p.id.as_str()) {
                return Err(CorpusError::DuplicateId(p.id.clone()));
            }
        }
        Ok(Corpus {
            posts,
            schema_version: SCHEMA_VERSION.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.id == id)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.posts {
            out.push_str(&serde_json::to_string(p).expect("post serialises"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        fs::write(path, self.to_jsonl()).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn parse_corpus(text: &str, mode: LoadMode) -> Result<LoadOutcome, CorpusError> {
    let mut posts = Vec::new();
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim_start_matches('\u{FEFF}');
        if raw.trim().is_empty() {
            continue;
        }
        let post: Post = match serde_json::from_str(raw) {
            Ok(p) => p,
            Err(e) => {
                if mode == LoadMode::Strict {
                    return Err(CorpusError::Parse {
                        line,
                        reason: e.to_string(),
                    });
                }
                violations.push(Issue {
                    line,
                    id: None,
                    field: "json".into(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let (mut errors, warns) = post.check();
        if !seen.insert(post.id.clone()) {
            errors.push(("id".into(), format!("duplicate id {:?}", post.id)));
        }
        warnings.extend(warns.into_iter().map(|(field, reason)| Issue {
            line,
            id: Some(post.id.clone()),
            field,
            reason,
        }));
        if let Some((field, reason)) = errors.first().cloned() {
            if mode == LoadMode::Strict {
                return Err(CorpusError::SchemaViolation { line, field, reason });
            }
            violations.extend(errors.into_iter().map(|(field, reason)| Issue {
                line,
                id: Some(post.id.clone()),
                field,
                reason,
            }));
            continue;
        }
        posts.push(post);
    }
    for w in &warnings {
        log::debug!("{w}");
    }
    for v in &violations {
        log::warn!("dropped {v}");
    }
    Ok(LoadOutcome {
        corpus: Corpus {
            posts,
            schema_version: SCHEMA_VERSION.to_string(),
        },
        violations,
        warnings,
    })
}

pub fn load_corpus(path: &Path, mode: LoadMode) -> Result<LoadOutcome, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            CorpusError::FileNotFound(path.to_path_buf())
        } else {
            CorpusError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_corpus(&text, mode)
}
