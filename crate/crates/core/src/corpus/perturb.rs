//! Emoji noise injection for ablation training sets.
//!
//! `round(fraction * n)` (ties to even) of the `n` emoji-bearing posts are
//! drawn uniformly under the seed; all other posts are returned untouched.
//!
//! * [`PerturbMode::ShufflePositions`] removes every emoji token that lies
//!   outside the post's spans and re-inserts each at a uniformly drawn token
//!   boundary. Boundaries strictly inside a span are not eligible, so span
//!   texts stay intact. Span offsets are dropped (text is kept) and strategy
//!   tags are cleared. If the draw reproduces the original text the post is
//!   redrawn, up to a fixed number of attempts.
//! * [`PerturbMode::ReplaceRandom`] replaces every emoji independently with a
//!   uniform draw from the lexicon glyphs. Span texts and offsets are
//!   rewritten to follow the substitution.

use std::ops::Range;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{char_slice, Corpus, CorpusError, Field, Post, Span};
use crate::emojitext::{self, Token, TokenKind};
use crate::lexicon::Lexicon;
use crate::util::{round_half_even_count, seeded_rng, SeededRng};

const MAX_SHUFFLE_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    ShufflePositions,
    ReplaceRandom,
}

#[derive(Debug, Clone)]
pub struct PerturbOutcome {
    pub corpus: Corpus,
    /// Ids of the posts drawn for perturbation, in corpus order.
    pub selected_ids: Vec<String>,
}

/// `text` with every emoji token removed.
pub fn strip_emoji(text: &str) -> String {
    emojitext::segment(text)
        .into_iter()
        .filter(|t| t.kind != TokenKind::Emoji)
        .map(|t| t.text)
        .collect()
}

fn emoji_multiset(text: &str) -> Vec<&str> {
    let mut v: Vec<&str> = emojitext::emoji_tokens(text).into_iter().map(|t| t.text).collect();
    v.sort_unstable();
    v
}

pub fn perturb(
    corpus: &Corpus,
    mode: PerturbMode,
    fraction: f64,
    seed: u64,
    lexicon: Option<&Lexicon>,
) -> Result<PerturbOutcome, CorpusError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CorpusError::InvalidFraction(fraction));
    }
    let glyphs: Vec<&str> = match mode {
        PerturbMode::ReplaceRandom => {
            let lex = lexicon.filter(|l| !l.is_empty()).ok_or(CorpusError::MissingLexicon)?;
            lex.glyphs().collect()
        }
        PerturbMode::ShufflePositions => Vec::new(),
    };
    let candidates: Vec<usize> = corpus
        .posts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.has_emoji())
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Err(CorpusError::EmptySelection);
    }
    let k = round_half_even_count(fraction, candidates.len());
    let mut rng = seeded_rng(seed);
    let mut chosen = index::sample(&mut rng, candidates.len(), k).into_vec();
    chosen.sort_unstable();

    let mut posts = corpus.posts.clone();
    let mut selected_ids = Vec::with_capacity(k);
    for c in chosen {
        let i = candidates[c];
        selected_ids.push(posts[i].id.clone());
        posts[i] = match mode {
            PerturbMode::ShufflePositions => shuffle_post(&posts[i], &mut rng),
            PerturbMode::ReplaceRandom => replace_post(&posts[i], &glyphs, &mut rng),
        };
    }
    Ok(PerturbOutcome {
        corpus: Corpus {
            posts,
            schema_version: corpus.schema_version.clone(),
        },
        selected_ids,
    })
}

fn intersects(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

fn span_ranges(post: &Post, field: Field) -> Vec<Range<usize>> {
    post.cm_spans
        .iter()
        .chain(&post.si_spans)
        .filter_map(|s| post.locate_span(s))
        .filter(|loc| loc.field == field)
        .map(|loc| loc.range)
        .collect()
}

fn set_field(post: &mut Post, field: Field, text: String) {
    match field {
        Field::Title => post.title = Some(text),
        Field::Body => post.body = text,
    }
}

fn shuffle_post(post: &Post, rng: &mut SeededRng) -> Post {
    let protected: Vec<(Field, Vec<Range<usize>>)> = post.fields().map(|(f, _)| (f, span_ranges(post, f))).collect();
    let mut fallback: Option<Post> = None;
    for _ in 0..MAX_SHUFFLE_ATTEMPTS {
        let mut candidate = post.clone();
        let mut valid = true;
        for (field, ranges) in &protected {
            let text = post.field(*field).unwrap_or_default();
            match shuffle_field(text, ranges, rng) {
                Some(new_text) => set_field(&mut candidate, *field, new_text),
                None => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            continue;
        }
        if candidate.title != post.title || candidate.body != post.body {
            for span in candidate.cm_spans.iter_mut().chain(candidate.si_spans.iter_mut()) {
                span.char_start = None;
                span.char_end = None;
            }
            candidate.strategy_tags = None;
            return candidate;
        }
        fallback.get_or_insert(candidate);
    }
    fallback.unwrap_or_else(|| post.clone())
}

/// One shuffle draw for a single field. `None` when re-insertion changed the
/// grapheme structure (for instance a lone skin-tone modifier attaching to a
/// neighbour), in which case the caller redraws.
fn shuffle_field(text: &str, protected: &[Range<usize>], rng: &mut SeededRng) -> Option<String> {
    let tokens = emojitext::segment(text);
    let movable =
        |t: &Token| t.kind == TokenKind::Emoji && !protected.iter().any(|r| intersects(r, &(t.char_start..t.char_end)));
    let emojis: Vec<&str> = tokens.iter().filter(|t| movable(t)).map(|t| t.text).collect();
    if emojis.is_empty() {
        return Some(text.to_string());
    }
    let pieces: Vec<&Token> = tokens.iter().filter(|t| !movable(t)).collect();
    let m = pieces.len();
    let slots: Vec<usize> = (0..=m)
        .filter(|&j| {
            if j == 0 || j == m {
                return true;
            }
            let left_end = pieces[j - 1].char_end;
            let right_start = pieces[j].char_start;
            !protected.iter().any(|r| r.start < left_end && right_start < r.end)
        })
        .collect();
    let mut at: Vec<Vec<&str>> = vec![Vec::new(); m + 1];
    for e in emojis {
        let j = slots[rng.random_range(0..slots.len())];
        at[j].push(e);
    }
    let mut out = String::with_capacity(text.len());
    for j in 0..=m {
        for e in &at[j] {
            out.push_str(e);
        }
        if j < m {
            out.push_str(pieces[j].text);
        }
    }
    (emoji_multiset(&out) == emoji_multiset(text) && strip_emoji(&out) == strip_emoji(text)).then_some(out)
}

/// Old token boundaries mapped onto the rewritten text.
struct OffsetMap {
    /// (old_start, old_end, new_start, new_end, replaced)
    tokens: Vec<(usize, usize, usize, usize, bool)>,
    old_len: usize,
    new_len: usize,
}

impl OffsetMap {
    fn map(&self, p: usize) -> usize {
        if p >= self.old_len {
            return self.new_len;
        }
        let &(os, _, ns, _, replaced) = self
            .tokens
            .iter()
            .find(|(os, oe, ..)| *os <= p && p < *oe)
            .expect("tokens tile the text");
        if replaced {
            ns
        } else {
            ns + (p - os)
        }
    }
}

fn replace_field(text: &str, glyphs: &[&str], rng: &mut SeededRng) -> (String, OffsetMap) {
    let mut out = String::with_capacity(text.len());
    let mut tokens = Vec::new();
    let mut new_pos = 0;
    let mut old_len = 0;
    for tok in emojitext::segment(text) {
        let replaced = tok.kind == TokenKind::Emoji;
        let piece = if replaced {
            glyphs[rng.random_range(0..glyphs.len())]
        } else {
            tok.text
        };
        let n = piece.chars().count();
        out.push_str(piece);
        tokens.push((tok.char_start, tok.char_end, new_pos, new_pos + n, replaced));
        new_pos += n;
        old_len = tok.char_end;
    }
    (
        out,
        OffsetMap {
            tokens,
            old_len,
            new_len: new_pos,
        },
    )
}

fn replace_post(post: &Post, glyphs: &[&str], rng: &mut SeededRng) -> Post {
    let mut out = post.clone();
    let mut maps: Vec<(Field, String, OffsetMap)> = Vec::new();
    for (field, text) in post.fields() {
        let (new_text, map) = replace_field(text, glyphs, rng);
        maps.push((field, new_text, map));
    }
    let rewrite = |span: &Span| -> Span {
        let Some(loc) = post.locate_span(span) else {
            return span.clone();
        };
        let (_, new_text, map) = maps.iter().find(|(f, ..)| *f == loc.field).expect("field mapped");
        let (start, end) = (map.map(loc.range.start), map.map(loc.range.end));
        let text = char_slice(new_text, start..end).unwrap_or(&span.text).to_string();
        if span.has_offsets() {
            Span::at(text, start, end)
        } else {
            Span::text(text)
        }
    };
    out.cm_spans = post.cm_spans.iter().map(rewrite).collect();
    out.si_spans = post.si_spans.iter().map(rewrite).collect();
    for (field, new_text, _) in maps {
        set_field(&mut out, field, new_text);
    }
    out
}
