use std::collections::BTreeMap;

use emoguard::agreement::{fleiss_kappa, span_agreement_f1, Annotations, RatingMatrix, SpanAnnotation};
use emoguard::corpus::SpanCategory;
use emoguard::metrics::{
    coherence, paired_t_test, readability, relevance, semantic_similarity, span_set_f1, token_f1, HashingEmbedder,
    MetricSummary,
};
use proptest::prelude::*;

const VOCAB: &[&str] = &[
    "cut", "me", "now", "the", "kill", "i", "want", "die", "so", "tired", "lol", "again",
];

fn arb_span() -> impl Strategy<Value = String> {
    prop::collection::vec(
        (
            prop::sample::select(VOCAB),
            prop::sample::select(&["", "", ",", "!", "."][..]),
        ),
        0..6,
    )
    .prop_map(|ws| {
        ws.into_iter()
            .map(|(w, p)| format!("{w}{p}"))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

fn arb_spans() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(arb_span().prop_filter("non-empty", |s| !s.is_empty()), 0..4)
}

fn arb_text() -> impl Strategy<Value = String> {
    "[A-Za-z]{2,9}( [A-Za-z]{1,9}[.,!?]?){0,20}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metrics_stay_in_range(a in "\\PC{0,40}", b in "\\PC{0,40}", preds in arb_spans(), golds in arb_spans()) {
        let f = token_f1(&a, &b);
        prop_assert!((0.0..=1.0).contains(&f));
        let s = span_set_f1(&preds, &golds);
        prop_assert!((0.0..=1.0).contains(&s));
        let c = coherence(&a, &preds, &golds);
        prop_assert!((0.0..=1.0).contains(&c));
        let r = relevance(&a, &preds, &golds);
        prop_assert!(r == 0.0 || r == 1.0);
        let sim = semantic_similarity(&a, &preds, &golds, &HashingEmbedder::default()).unwrap_or(0.0);
        prop_assert!((-1.0..=1.0).contains(&sim));
        if let Ok(rd) = readability(&a) {
            prop_assert!((0.0..=1.0).contains(&rd.normalized));
        }
    }

    #[test]
    fn token_f1_symmetric(a in arb_span(), b in arb_span()) {
        prop_assert_eq!(token_f1(&a, &b).to_bits(), token_f1(&b, &a).to_bits());
    }

    #[test]
    fn self_similarity(x in arb_text()) {
        prop_assert!((coherence(&x, std::slice::from_ref(&x), &[]) - 1.0).abs() < 1e-9);
        let sim = semantic_similarity(&x, std::slice::from_ref(&x), &[], &HashingEmbedder::default()).unwrap();
        prop_assert!((sim - 1.0).abs() < 1e-6);
        prop_assert_eq!(token_f1(&x, &x), 1.0);
    }

    #[test]
    fn relevance_monotone(rationale in arb_text(), spans in arb_spans()) {
        let before = relevance(&rationale, &spans, &[]);
        for s in &spans {
            let extended = format!("{rationale} {s}");
            prop_assert!(relevance(&extended, &spans, &[]) >= before);
        }
        let all = format!("{rationale} {}", spans.join(" | "));
        prop_assert_eq!(relevance(&all, &spans, &[]), 1.0);
    }

    #[test]
    fn readability_duplication_invariant(x in "[A-Za-z]{1,9}( [A-Za-z]{1,9}){0,12}[.!?]") {
        let once = readability(&x).unwrap();
        let twice = readability(&format!("{x} {x}")).unwrap();
        prop_assert_eq!(once.grade.to_bits(), twice.grade.to_bits());
    }

    #[test]
    fn t_test_antisymmetric(pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..20)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(x), Ok(y)) = (paired_t_test(&a, &b), paired_t_test(&b, &a)) {
            prop_assert_eq!(x.t, -y.t);
            prop_assert_eq!(x.p_two_sided, y.p_two_sided);
            prop_assert!((0.0..=1.0).contains(&x.p_two_sided));
        }
    }

    #[test]
    fn summary_matches_recomputation(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let s = MetricSummary::from_samples(v.clone());
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        prop_assert!((s.mean - mean).abs() <= 1e-9 * mean.abs().max(1.0));
        prop_assert!((s.variance - var).abs() <= 1e-9 * var.abs().max(1.0));
        prop_assert!(s.is_consistent(1e-9 * var.max(1.0)));
    }
}

fn arb_matrix() -> impl Strategy<Value = Vec<Vec<u32>>> {
    (2usize..5, 2u32..6, 2usize..12).prop_flat_map(|(k, n, items)| {
        prop::collection::vec(prop::collection::vec(0..k, n as usize), items).prop_map(move |rows| {
            rows.into_iter()
                .map(|ratings| {
                    let mut row = vec![0u32; k];
                    for c in ratings {
                        row[c] += 1;
                    }
                    row
                })
                .collect()
        })
    })
}

// Direct transcription of the textbook formula, kept separate from the library.
fn kappa_oracle(rows: &[Vec<u32>]) -> Option<f64> {
    let n: f64 = rows[0].iter().sum::<u32>() as f64;
    let items = rows.len() as f64;
    let k = rows[0].len();
    let mut p_j = vec![0.0; k];
    let mut p_i_sum = 0.0;
    for row in rows {
        let mut agree = 0.0;
        for (j, &c) in row.iter().enumerate() {
            let c = c as f64;
            agree += c * (c - 1.0);
            p_j[j] += c;
        }
        p_i_sum += agree / (n * (n - 1.0));
    }
    let p_bar = p_i_sum / items;
    let p_e: f64 = p_j.iter().map(|t| (t / (items * n)) * (t / (items * n))).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

proptest! {
    #[test]
    fn kappa_invariances(rows in arb_matrix(), rot in 0usize..4, dup in 0usize..12) {
        let m = RatingMatrix::new(rows.clone()).unwrap();
        let Ok(k) = fleiss_kappa(&m) else {
            prop_assert!(kappa_oracle(&rows).is_none());
            return Ok(());
        };
        prop_assert!((k - kappa_oracle(&rows).unwrap()).abs() < 1e-12);
        prop_assert!(k <= 1.0 + 1e-12);

        let cats = rows[0].len();
        let permuted: Vec<Vec<u32>> = rows.iter().map(|r| (0..cats).map(|j| r[(j + rot) % cats]).collect()).collect();
        prop_assert!((fleiss_kappa(&RatingMatrix::new(permuted).unwrap()).unwrap() - k).abs() < 1e-12);

        let mut reversed = rows.clone();
        reversed.reverse();
        prop_assert!((fleiss_kappa(&RatingMatrix::new(reversed).unwrap()).unwrap() - k).abs() < 1e-12);

        let mut bigger = rows.clone();
        bigger.push(rows[dup % rows.len()].clone());
        if let Some(expected) = kappa_oracle(&bigger) {
            let got = fleiss_kappa(&RatingMatrix::new(bigger).unwrap()).unwrap();
            prop_assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn span_agreement_symmetric(a in prop::collection::vec(arb_spans(), 1..6), b in prop::collection::vec(arb_spans(), 1..6)) {
        let n = a.len().min(b.len());
        let ann = |spans: &[Vec<String>]| -> Vec<SpanAnnotation> {
            spans[..n]
                .iter()
                .enumerate()
                .map(|(i, s)| SpanAnnotation { id: i.to_string(), cm_spans: s.clone(), si_spans: vec![] })
                .collect()
        };
        let mut x: Annotations = BTreeMap::new();
        x.insert("a".into(), ann(&a));
        x.insert("b".into(), ann(&b));
        let mut y: Annotations = BTreeMap::new();
        y.insert("a".into(), ann(&b));
        y.insert("b".into(), ann(&a));
        let fx = span_agreement_f1(&x, SpanCategory::Cm).unwrap();
        let fy = span_agreement_f1(&y, SpanCategory::Cm).unwrap();
        prop_assert!((fx - fy).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&fx));
    }
}
