//! Per-emoji context counts and strategy-by-intent frequencies.
//!
//! An emoji occurrence is "inside" a span when its character range
//! intersects the span's range in the same field. Strategy tags attach to
//! compositions; each emoji of a tagged composition is counted once under
//! the composition's strategy and the post's intent (serious intent for
//! self-harm posts, casual mention otherwise).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Post, SpanCategory, StrategyTag};
use crate::emojitext::{self, Adjacency, TokenKind};
use crate::lexicon::{lookup_key, Lexicon};
use crate::Label;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiContextRow {
    pub emoji: String,
    pub in_lexicon: bool,
    pub cm: u64,
    pub si: u64,
    pub sh: u64,
    pub nsh: u64,
}

impl EmojiContextRow {
    pub fn total(&self) -> u64 {
        self.sh + self.nsh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    #[serde(rename = "serious_intent")]
    SeriousIntent,
    #[serde(rename = "casual_mention")]
    CasualMention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyIntentRow {
    pub intent: Intent,
    pub direct: u64,
    pub metaphorical: u64,
    pub semantic_list: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiContextReport {
    /// Sorted by SI count, then total occurrences, both descending.
    pub rows: Vec<EmojiContextRow>,
    pub strategy_intent: Vec<StrategyIntentRow>,
    pub tagged_posts: u64,
}

impl EmojiContextReport {
    pub fn row(&self, glyph: &str) -> Option<&EmojiContextRow> {
        let key = lookup_key(glyph);
        self.rows.iter().find(|r| lookup_key(&r.emoji) == key)
    }

    pub fn top_by<F: Fn(&EmojiContextRow) -> u64>(&self, n: usize, key: F) -> Vec<&EmojiContextRow> {
        let mut rows: Vec<&EmojiContextRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| key(b).cmp(&key(a)).then_with(|| a.emoji.cmp(&b.emoji)));
        rows.truncate(n);
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("emoji,in_lexicon,cm,si,sh,nsh\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.emoji, r.in_lexicon, r.cm, r.si, r.sh, r.nsh
            ));
        }
        s
    }
}

fn intersects(a: &std::ops::Range<usize>, b: &std::ops::Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

pub fn emoji_context_report(posts: &[Post], lexicon: &Lexicon) -> EmojiContextReport {
    let mut rows: Vec<EmojiContextRow> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // [intent][strategy]
    let mut strategy = [[0u64; 3]; 2];
    let mut tagged_posts = 0;

    for post in posts {
        let located: Vec<(SpanCategory, super::SpanLocation)> = [SpanCategory::Cm, SpanCategory::Si]
            .into_iter()
            .flat_map(|cat| {
                post.spans(cat)
                    .iter()
                    .filter_map(move |s| post.locate_span(s).map(|loc| (cat, loc)))
            })
            .collect();

        for (field, text) in post.fields() {
            for tok in emojitext::segment(text) {
                if tok.kind != TokenKind::Emoji {
                    continue;
                }
                let key = lookup_key(tok.text);
                let i = *index.entry(key).or_insert_with(|| {
                    let known = lexicon.get(tok.text);
                    rows.push(EmojiContextRow {
                        emoji: known.map_or_else(|| tok.text.to_string(), |e| e.glyph.clone()),
                        in_lexicon: known.is_some(),
                        cm: 0,
                        si: 0,
                        sh: 0,
                        nsh: 0,
                    });
                    rows.len() - 1
                });
                let row = &mut rows[i];
                let range = tok.char_start..tok.char_end;
                let inside = |cat: SpanCategory| {
                    located
                        .iter()
                        .any(|(c, loc)| *c == cat && loc.field == field && intersects(&loc.range, &range))
                };
                row.cm += u64::from(inside(SpanCategory::Cm));
                row.si += u64::from(inside(SpanCategory::Si));
                match post.label {
                    Label::SelfHarm => row.sh += 1,
                    Label::NonSelfHarm => row.nsh += 1,
                }
            }
        }

        if let Some(tags) = &post.strategy_tags {
            let comps: Vec<_> = post
                .text_fields()
                .flat_map(|t| emojitext::compositions(t, Adjacency::default()))
                .collect();
            if comps.len() == tags.len() {
                tagged_posts += 1;
                let intent = match post.label {
                    Label::SelfHarm => 0,
                    Label::NonSelfHarm => 1,
                };
                for (comp, tag) in comps.iter().zip(tags) {
                    let s = StrategyTag::ALL.iter().position(|t| t == tag).unwrap();
                    strategy[intent][s] += comp.len() as u64;
                }
            }
        }
    }

    rows.sort_by(|a, b| {
        b.si.cmp(&a.si)
            .then_with(|| b.total().cmp(&a.total()))
            .then_with(|| a.emoji.cmp(&b.emoji))
    });
    let strategy_intent = [Intent::SeriousIntent, Intent::CasualMention]
        .into_iter()
        .zip(strategy)
        .map(|(intent, c)| StrategyIntentRow {
            intent,
            direct: c[0],
            metaphorical: c[1],
            semantic_list: c[2],
        })
        .collect();
    EmojiContextReport {
        rows,
        strategy_intent,
        tagged_posts,
    }
}
