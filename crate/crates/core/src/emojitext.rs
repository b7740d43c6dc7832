//! Unicode-correct tokenisation of post text and emoji composition analysis.
//!
//! Grapheme cluster boundaries follow UAX #29 extended grapheme clusters and
//! emoji properties come from `emoji-data.txt`, both at [`UNICODE_VERSION`].
//!
//! A grapheme cluster is an *emoji grapheme* when every code point in it has
//! `Emoji=Yes` or `Emoji_Component=Yes`, at least one has `Emoji=Yes`, and:
//!
//! * if it starts with a keycap base (`0-9`, `#`, `*`) it contains U+20E3;
//! * if it is a single code point with text default presentation, the code
//!   point is at or above U+2300 (so `©`, `™`, `‼` and arrows written without
//!   U+FE0F stay text, while `❤`, `☹`, `✂` count as emoji).
//!
//! ZWJ sequences, skin-tone modified emoji, flags, tag sequences and keycaps
//! are therefore single emoji graphemes.

use serde::{Deserialize, Serialize};
use unicode_properties::{EmojiStatus, UnicodeEmoji};
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::Post;
use crate::Label;

/// Unicode version of the grapheme break and emoji property tables.
pub const UNICODE_VERSION: (u64, u64, u64) = unicode_segmentation::UNICODE_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Emoji,
    Punct,
    Whitespace,
}

/// A slice of the input text. Offsets are in Unicode scalar values (chars).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub char_start: usize,
    pub char_end: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Extended grapheme clusters of `text`.
pub fn graphemes(text: &str) -> impl Iterator<Item = &str> {
    text.graphemes(true)
}

fn is_keycap_base(c: char) -> bool {
    c.is_ascii_digit() || c == '#' || c == '*'
}

fn has_emoji_presentation(c: char) -> bool {
    matches!(
        c.emoji_status(),
        EmojiStatus::EmojiPresentation
            | EmojiStatus::EmojiPresentationAndModifierBase
            | EmojiStatus::EmojiPresentationAndEmojiComponent
            | EmojiStatus::EmojiPresentationAndModifierAndEmojiComponent
    )
}

/// Whether a single grapheme cluster is rendered as an emoji. See the module
/// docs for the exact rule.
pub fn is_emoji_grapheme(g: &str) -> bool {
    let mut chars = g.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !g.chars().all(|c| c.is_emoji_char_or_emoji_component()) {
        return false;
    }
    if !g.chars().any(|c| c.is_emoji_char()) {
        return false;
    }
    if is_keycap_base(first) {
        return g.contains('\u{20E3}');
    }
    if chars.next().is_some() {
        return true;
    }
    has_emoji_presentation(first) || u32::from(first) >= 0x2300
}

/// Whether every code point in `g` carries `Emoji` or `Emoji_Component`.
pub fn all_emoji_code_points(g: &str) -> bool {
    !g.is_empty() && g.chars().all(|c| c.is_emoji_char_or_emoji_component())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Emoji,
    Space,
    WordChar,
    Joiner,
    Other,
}

fn classify(g: &str) -> Class {
    if is_emoji_grapheme(g) {
        return Class::Emoji;
    }
    let first = g.chars().next().unwrap_or(' ');
    if first.is_whitespace() {
        Class::Space
    } else if first.is_alphanumeric() || first == '_' {
        Class::WordChar
    } else if matches!(first, '\'' | '\u{2019}' | '-') {
        Class::Joiner
    } else {
        Class::Other
    }
}

struct Cluster<'a> {
    text: &'a str,
    byte_start: usize,
    char_start: usize,
    chars: usize,
    class: Class,
}

fn clusters(text: &str) -> Vec<Cluster<'_>> {
    let mut out = Vec::new();
    let mut char_pos = 0;
    for (byte_start, g) in text.grapheme_indices(true) {
        let chars = g.chars().count();
        out.push(Cluster {
            text: g,
            byte_start,
            char_start: char_pos,
            chars,
            class: classify(g),
        });
        char_pos += chars;
    }
    out
}

/// Split `text` into tokens that tile it exactly.
///
/// Words are maximal runs of alphanumeric graphemes, optionally joined by a
/// single apostrophe or hyphen (`don't`, `self-harm`). Whitespace and other
/// punctuation form maximal runs of their own. Every emoji grapheme is its
/// own token.
pub fn segment(text: &str) -> Vec<Token<'_>> {
    let cl = clusters(text);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < cl.len() {
        let start = i;
        let kind = match cl[i].class {
            Class::Emoji => {
                i += 1;
                TokenKind::Emoji
            }
            Class::Space => {
                while i < cl.len() && cl[i].class == Class::Space {
                    i += 1;
                }
                TokenKind::Whitespace
            }
            Class::WordChar => {
                i += 1;
                loop {
                    if i < cl.len() && cl[i].class == Class::WordChar {
                        i += 1;
                    } else if i + 1 < cl.len() && cl[i].class == Class::Joiner && cl[i + 1].class == Class::WordChar {
                        i += 2;
                    } else {
                        break;
                    }
                }
                TokenKind::Word
            }
            Class::Joiner | Class::Other => {
                while i < cl.len() && matches!(cl[i].class, Class::Joiner | Class::Other) {
                    i += 1;
                }
                TokenKind::Punct
            }
        };
        let first = &cl[start];
        let last = &cl[i - 1];
        let byte_end = last.byte_start + last.text.len();
        tokens.push(Token {
            kind,
            text: &text[first.byte_start..byte_end],
            char_start: first.char_start,
            char_end: last.char_start + last.chars,
            byte_start: first.byte_start,
            byte_end,
        });
    }
    tokens
}

/// Emoji tokens of `text`, in order.
pub fn emoji_tokens(text: &str) -> Vec<Token<'_>> {
    segment(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Emoji)
        .collect()
}

pub fn contains_emoji(text: &str) -> bool {
    graphemes(text).any(is_emoji_grapheme)
}

/// Which separators may occur inside a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjacency {
    /// Emoji separated by nothing or by whitespace only belong together.
    #[default]
    WhitespaceTolerant,
    /// Only directly adjacent emoji belong together.
    Strict,
}

/// A maximal run of emoji graphemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiComposition {
    pub glyphs: Vec<String>,
    pub char_start: usize,
    pub char_end: usize,
}

impl EmojiComposition {
    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }
}

/// Maximal emoji runs under the given adjacency rule, ordered by position.
pub fn compositions(text: &str, adjacency: Adjacency) -> Vec<EmojiComposition> {
    let mut out = Vec::new();
    let mut current: Option<EmojiComposition> = None;
    for tok in segment(text) {
        match tok.kind {
            TokenKind::Emoji => match current.as_mut() {
                Some(run) => {
                    run.glyphs.push(tok.text.to_string());
                    run.char_end = tok.char_end;
                }
                None => {
                    current = Some(EmojiComposition {
                        glyphs: vec![tok.text.to_string()],
                        char_start: tok.char_start,
                        char_end: tok.char_end,
                    })
                }
            },
            TokenKind::Whitespace if adjacency == Adjacency::WhitespaceTolerant => {}
            _ => {
                if let Some(run) = current.take() {
                    out.push(run);
                }
            }
        }
    }
    out.extend(current);
    out
}

/// Composition length bucket: 1, 2, 3 or 4 and more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompositionBucket {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4+")]
    FourPlus,
}

impl CompositionBucket {
    pub const ALL: [CompositionBucket; 4] = [
        CompositionBucket::One,
        CompositionBucket::Two,
        CompositionBucket::Three,
        CompositionBucket::FourPlus,
    ];

    pub fn for_len(len: usize) -> CompositionBucket {
        match len {
            0 | 1 => CompositionBucket::One,
            2 => CompositionBucket::Two,
            3 => CompositionBucket::Three,
            _ => CompositionBucket::FourPlus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionBucket::One => "1",
            CompositionBucket::Two => "2",
            CompositionBucket::Three => "3",
            CompositionBucket::FourPlus => "4+",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Composition counts per length bucket and post label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompositionHistogram {
    counts: [[u64; 2]; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bucket: CompositionBucket,
    #[serde(rename = "SH")]
    pub self_harm: u64,
    #[serde(rename = "NSH")]
    pub non_self_harm: u64,
}

impl CompositionHistogram {
    pub fn get(&self, bucket: CompositionBucket, label: Label) -> u64 {
        self.counts[bucket.index()][label.index()]
    }

    pub fn add(&mut self, len: usize, label: Label) {
        self.counts[CompositionBucket::for_len(len).index()][label.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        CompositionBucket::ALL
            .iter()
            .map(|&bucket| HistogramRow {
                bucket,
                self_harm: self.get(bucket, Label::SelfHarm),
                non_self_harm: self.get(bucket, Label::NonSelfHarm),
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("count,SH,NSH\n");
        for row in self.rows() {
            s.push_str(&format!(
                "{},{},{}\n",
                row.bucket.as_str(),
                row.self_harm,
                row.non_self_harm
            ));
        }
        s
    }
}

/// Count every composition of every post (title and body alike) into its
/// length bucket under the post's label. Title and body are scanned
/// separately, so a run never spans the two.
pub fn composition_histogram(posts: &[Post], adjacency: Adjacency) -> CompositionHistogram {
    let mut hist = CompositionHistogram::default();
    for post in posts {
        for field in post.text_fields() {
            for comp in compositions(field, adjacency) {
                hist.add(comp.len(), post.label);
            }
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds<'a>(tokens: &[Token<'a>]) -> Vec<(TokenKind, &'a str)> {
        tokens.iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn pinned_tables_agree() {
        assert_eq!(UNICODE_VERSION, unicode_properties::UNICODE_VERSION);
        assert_eq!(UNICODE_VERSION, (17, 0, 0));
    }

    #[test]
    fn empty_input() {
        assert!(segment("").is_empty());
        assert!(compositions("", Adjacency::default()).is_empty());
    }

    #[test]
    fn word_space_emoji() {
        let toks = segment("sad 💔");
        assert_eq!(
            kinds(&toks),
            vec![
                (TokenKind::Word, "sad"),
                (TokenKind::Whitespace, " "),
                (TokenKind::Emoji, "💔")
            ]
        );
        assert_eq!((toks[2].char_start, toks[2].char_end), (4, 5));
    }

    #[test]
    fn sequences_are_single_tokens() {
        let family = "\u{1F468}\u{200D}\u{1F469}\u{200D}\u{1F467}\u{200D}\u{1F466}";
        for s in [
            family,
            "\u{1F44D}\u{1F3FD}",                // thumbs up, medium skin tone
            "\u{1F1FA}\u{1F1F8}",                // flag
            "1\u{FE0F}\u{20E3}",                 // keycap one
            "\u{2764}\u{FE0F}\u{200D}\u{1F525}", // heart on fire
            "\u{1F3F4}\u{E0067}\u{E0062}\u{E0073}\u{E0063}\u{E0074}\u{E007F}", // tag flag
        ] {
            let toks = segment(s);
            assert_eq!(toks.len(), 1, "{s:?}");
            assert_eq!(toks[0].kind, TokenKind::Emoji, "{s:?}");
        }
    }

    #[test]
    fn text_default_symbols() {
        assert!(!is_emoji_grapheme("©"));
        assert!(is_emoji_grapheme("©\u{FE0F}"));
        assert!(!is_emoji_grapheme("1"));
        assert!(!is_emoji_grapheme("#"));
        assert!(is_emoji_grapheme("\u{2764}"));
        assert!(is_emoji_grapheme("\u{2764}\u{FE0F}"));
        assert!(!is_emoji_grapheme("\u{200D}"));
        assert!(!is_emoji_grapheme("\u{FE0F}"));
        assert!(!is_emoji_grapheme("a"));
        assert!(!is_emoji_grapheme("\u{2764}\u{FE0E}"));
    }

    #[test]
    fn words_keep_joiners() {
        let toks = segment("I don't self-harm...ok");
        assert_eq!(
            kinds(&toks),
            vec![
                (TokenKind::Word, "I"),
                (TokenKind::Whitespace, " "),
                (TokenKind::Word, "don't"),
                (TokenKind::Whitespace, " "),
                (TokenKind::Word, "self-harm"),
                (TokenKind::Punct, "..."),
                (TokenKind::Word, "ok"),
            ]
        );
    }

    #[test]
    fn adjacent_pair_is_one_composition() {
        let comps = compositions("🔪🩸", Adjacency::default());
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].glyphs, vec!["🔪", "🩸"]);
    }

    #[test]
    fn words_break_runs() {
        let comps = compositions("ok 🖤 fine 🖤", Adjacency::default());
        assert_eq!(comps.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn whitespace_tolerance_is_configurable() {
        let text = "💔 💪 ✨";
        let loose = compositions(text, Adjacency::WhitespaceTolerant);
        assert_eq!(loose.len(), 1);
        assert_eq!(loose[0].len(), 3);
        assert_eq!((loose[0].char_start, loose[0].char_end), (0, 5));
        let strict = compositions(text, Adjacency::Strict);
        assert_eq!(strict.len(), 3);
    }

    #[test]
    fn punctuation_breaks_runs() {
        let comps = compositions("💔, 💔", Adjacency::default());
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn histogram_buckets() {
        let mut h = CompositionHistogram::default();
        for len in [1, 2, 3, 4, 9] {
            h.add(len, Label::SelfHarm);
        }
        assert_eq!(h.get(CompositionBucket::FourPlus, Label::SelfHarm), 2);
        assert_eq!(h.total(), 5);
        assert!(h.to_csv().starts_with("count,SH,NSH\n1,1,0\n"));
    }
}
