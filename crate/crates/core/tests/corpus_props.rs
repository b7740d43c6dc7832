mod common;

use std::collections::HashSet;

use emoguard::corpus::{corpus_stats, parse_corpus, perturb, split, strip_emoji, LoadMode, PerturbMode};
use emoguard::emojitext::{segment, TokenKind};
use emoguard::util::{round_half_even_count, seeded_rng};
use proptest::prelude::*;

fn emoji_multiset(text: &str) -> Vec<String> {
    let mut v: Vec<String> = segment(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Emoji)
        .map(|t| t.text.to_string())
        .collect();
    v.sort();
    v
}

fn words(text: &str) -> Vec<String> {
    segment(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text.to_string())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip(seed in any::<u64>()) {
        let c = common::random_corpus(&mut seeded_rng(seed), 12, 0.3);
        let back = parse_corpus(&c.to_jsonl(), LoadMode::Strict).unwrap();
        prop_assert!(back.violations.is_empty());
        prop_assert_eq!(back.corpus, c);
    }

    #[test]
    fn stats_are_consistent(seed in any::<u64>(), n in 1usize..30) {
        let c = common::random_corpus(&mut seeded_rng(seed), n, 0.2);
        let s = corpus_stats(&c);
        prop_assert_eq!(s.self_harm + s.non_self_harm, s.total);
        prop_assert_eq!(s.with_emoji + s.without_emoji, s.total);
        prop_assert_eq!(s.original + s.synthetic, s.total);
    }

    #[test]
    fn split_is_partition(seed in any::<u64>(), frac in 0.1f64..0.9) {
        let c = common::random_corpus(&mut seeded_rng(seed), 30, 0.2);
        if let Ok((train, test)) = split(&c, frac, seed) {
            let a: HashSet<&str> = train.posts.iter().map(|p| p.id.as_str()).collect();
            let b: HashSet<&str> = test.posts.iter().map(|p| p.id.as_str()).collect();
            prop_assert!(a.is_disjoint(&b));
            prop_assert_eq!(a.len() + b.len(), c.len());
        }
    }

    #[test]
    fn perturb_selects_exact_count(seed in any::<u64>(), frac in 0.05f64..=1.0, shuffle in any::<bool>()) {
        let c = common::random_corpus(&mut seeded_rng(seed), 25, 0.25);
        let lex = common::lexicon();
        let mode = if shuffle { PerturbMode::ShufflePositions } else { PerturbMode::ReplaceRandom };
        let Ok(out) = perturb(&c, mode, frac, seed, Some(&lex)) else {
            prop_assert!(c.posts.iter().all(|p| !p.has_emoji()));
            return Ok(());
        };
        let eligible = c.posts.iter().filter(|p| p.has_emoji()).count();
        prop_assert_eq!(out.selected_ids.len(), round_half_even_count(frac, eligible));
        let selected: HashSet<&str> = out.selected_ids.iter().map(String::as_str).collect();
        for (before, after) in c.posts.iter().zip(&out.corpus.posts) {
            if !selected.contains(before.id.as_str()) {
                prop_assert_eq!(before, after);
            } else {
                prop_assert!(before.has_emoji());
                prop_assert_eq!(before.label, after.label);
                prop_assert_eq!(emoji_multiset(&before.body).len(), emoji_multiset(&after.body).len());
            }
        }
    }

    #[test]
    fn shuffle_preserves_emoji_and_words(seed in any::<u64>()) {
        let c = common::random_corpus(&mut seeded_rng(seed), 20, 0.35);
        let Ok(out) = perturb(&c, PerturbMode::ShufflePositions, 0.5, seed, None) else {
            return Ok(());
        };
        for (before, after) in c.posts.iter().zip(&out.corpus.posts) {
            prop_assert_eq!(emoji_multiset(&before.body), emoji_multiset(&after.body));
            prop_assert_eq!(words(&before.body), words(&after.body));
            prop_assert_eq!(strip_emoji(&before.body), strip_emoji(&after.body));
            let texts = |p: &emoguard::corpus::Post| {
                p.cm_spans.iter().chain(&p.si_spans).map(|s| s.text.clone()).collect::<Vec<_>>()
            };
            prop_assert_eq!(texts(before), texts(after));
        }
    }
}
