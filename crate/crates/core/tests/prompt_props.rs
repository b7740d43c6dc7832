mod common;

use std::collections::{BTreeMap, BTreeSet};

use emoguard::emojitext::{segment, TokenKind};
use emoguard::gateway::{parse_text, Backend, BackendConfig, MockBackend, ParseRoute};
use emoguard::metrics::Prediction;
use emoguard::prompts::{build_finetune, build_rationale, build_zeroshot, PromptInstance};
use emoguard::util::seeded_rng;
use emoguard::Label;
use proptest::prelude::*;

fn arb_prediction() -> impl Strategy<Value = Prediction> {
    let span = "[a-z']{1,8}( [a-z']{1,8}){0,3}";
    (
        any::<bool>(),
        prop::collection::vec(span, 0..3),
        prop::collection::vec(span, 0..3),
    )
        .prop_map(|(sh, cm, si)| Prediction {
            label: if sh { Label::SelfHarm } else { Label::NonSelfHarm },
            cm_spans: cm,
            si_spans: si,
            rationale: String::new(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn builders_deterministic_and_serializable(seed in any::<u64>()) {
        let post = common::random_post(&mut seeded_rng(seed), "x", 0.3);
        let lex = common::lexicon();
        let gold = Prediction::from_post(&post);
        let prompts = [
            build_finetune(&post, &lex),
            build_rationale(&post, Some(&gold), &lex).unwrap(),
            build_zeroshot(&post).unwrap(),
        ];
        for p in &prompts {
            let back: PromptInstance = serde_json::from_str(&p.to_json()).unwrap();
            prop_assert_eq!(&back, p);
        }
        prop_assert_eq!(&build_finetune(&post, &lex), &prompts[0]);
        prop_assert_eq!(build_finetune(&post, &lex).render(), prompts[0].render());
    }

    #[test]
    fn enrichment_matches_known_glyphs(seed in any::<u64>()) {
        let post = common::random_post(&mut seeded_rng(seed), "x", 0.4);
        let lex = common::lexicon();
        let list = build_finetune(&post, &lex).input.emojis.unwrap();
        let text = post.full_text();
        let emojis: Vec<&str> = segment(&text)
            .into_iter()
            .filter(|t| t.kind == TokenKind::Emoji)
            .map(|t| t.text)
            .collect();
        // Entries carrying data are exactly the lexicon-known glyphs.
        let with_data: BTreeSet<String> =
            list.iter().filter(|e| !e.usual_meaning.is_empty()).map(|e| e.emoji.clone()).collect();
        let known: BTreeSet<String> = emojis.iter().filter_map(|g| lex.get(g).map(|e| e.glyph.clone())).collect();
        prop_assert_eq!(with_data, known);
        for e in list.iter().filter(|e| !e.usual_meaning.is_empty()) {
            prop_assert!(lex.entries().iter().any(|x| x.glyph == e.emoji && x.usual_meaning == e.usual_meaning));
        }
        // Unknown glyphs are listed once with empty fields.
        let unique: BTreeSet<&str> = emojis.iter().copied().collect();
        prop_assert_eq!(list.len(), unique.len());
    }

    #[test]
    fn finetune_output_parses_back_to_gold(seed in any::<u64>()) {
        let post = common::random_post(&mut seeded_rng(seed), "x", 0.3);
        let p = build_finetune(&post, &common::lexicon());
        let wire = serde_json::to_string(p.output.as_ref().unwrap()).unwrap();
        let parsed = parse_text(&wire).unwrap();
        prop_assert_eq!(parsed.route, ParseRoute::Strict);
        prop_assert_eq!(parsed.prediction, Prediction::from_post(&post));
    }

    #[test]
    fn strict_route_round_trip(p in arb_prediction()) {
        let parsed = parse_text(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(parsed.prediction, p);
    }

    #[test]
    fn recovery_never_invents_labels(s in "\\PC{0,80}") {
        if let Ok(parsed) = parse_text(&s) {
            prop_assert!(Label::ALL.contains(&parsed.prediction.label));
        }
    }

    #[test]
    fn mock_is_pure(seed in any::<u64>(), fixture in "[a-z]{1,6}") {
        let post = common::random_post(&mut seeded_rng(seed), "x", 0.3);
        let prompt = build_finetune(&post, &common::lexicon());
        let mut cfg = BackendConfig::default();
        cfg.mock.fixture_id = fixture;
        let golds: BTreeMap<String, Prediction> = [("x".to_string(), Prediction::from_post(&post))].into();
        let a = MockBackend::new(&cfg, golds.clone()).complete(&prompt).unwrap();
        let b = MockBackend::new(&cfg, golds).complete(&prompt).unwrap();
        prop_assert_eq!(a.text, b.text);
    }
}
