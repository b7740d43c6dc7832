#![allow(dead_code)]

use emoguard::corpus::{Corpus, Post, Span};
use emoguard::lexicon::{ChanceLevel, EmojiEntry, Lexicon};
use emoguard::util::SeededRng;
use emoguard::Label;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const WORDS: &[&str] = &[
    "i", "want", "to", "die", "the", "exam", "cut", "myself", "again", "lol", "so", "tired", "of", "this", "kill",
    "me", "now", "bleeding", "hurt", "today", "work", "boss", "end", "it", "all",
];

pub const EMOJIS: &[&str] = &[
    "\u{1F602}",
    "\u{1F62D}",
    "\u{1F52A}",
    "\u{1FA78}",
    "\u{1F5A4}",
    "\u{1F480}",
    "\u{2764}\u{FE0F}",
    "\u{1F44D}\u{1F3FD}",
    "\u{1F1FA}\u{1F1F8}",
    "\u{1F468}\u{200D}\u{1F469}\u{200D}\u{1F467}",
];

pub fn lexicon() -> Lexicon {
    let entries = EMOJIS
        .iter()
        .take(6)
        .enumerate()
        .map(|(i, g)| EmojiEntry {
            glyph: g.to_string(),
            usual_meaning: format!("meaning {i}"),
            contextual_meaning: format!("context {i}"),
            cm_chance: ChanceLevel::ALL[i % 3],
            si_chance: ChanceLevel::ALL[(i + 1) % 3],
        })
        .collect();
    Lexicon::from_entries(entries, "test").unwrap()
}

/// Body of `n` items, each a word or an emoji, separated by single spaces.
pub fn random_body(rng: &mut SeededRng, n: usize, emoji_rate: f64) -> Vec<String> {
    (0..n)
        .map(|_| {
            if rng.random_bool(emoji_rate) {
                EMOJIS.choose(rng).unwrap().to_string()
            } else {
                WORDS.choose(rng).unwrap().to_string()
            }
        })
        .collect()
}

fn word_windows(items: &[String]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for start in 0..items.len() {
        for end in start + 1..=(start + 4).min(items.len()) {
            if items[start..end].iter().all(|w| WORDS.contains(&w.as_str())) {
                out.push((start, end));
            }
        }
    }
    out
}

/// A valid post whose spans are runs of words taken from the body.
pub fn random_post(rng: &mut SeededRng, id: &str, emoji_rate: f64) -> Post {
    let n = rng.random_range(3..16);
    let items = random_body(rng, n, emoji_rate);
    let body = items.join(" ");
    let label = if rng.random_bool(0.5) {
        Label::SelfHarm
    } else {
        Label::NonSelfHarm
    };
    let mut post = Post::new(id, body, label);
    let windows = word_windows(&items);
    let si_allowed = label == Label::SelfHarm;
    for (spans, allowed) in [(&mut post.cm_spans, true), (&mut post.si_spans, si_allowed)] {
        if !allowed {
            continue;
        }
        for _ in 0..rng.random_range(0..=2) {
            if let Some(&(s, e)) = windows.choose(rng) {
                let text = items[s..e].join(" ");
                if !spans.iter().any(|x: &Span| x.text == text) {
                    spans.push(Span::text(text));
                }
            }
        }
    }
    post
}

pub fn random_corpus(rng: &mut SeededRng, n: usize, emoji_rate: f64) -> Corpus {
    let posts = (0..n).map(|i| random_post(rng, &format!("p{i}"), emoji_rate)).collect();
    Corpus::new(posts).unwrap()
}
