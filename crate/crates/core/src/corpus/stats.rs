use serde::{Deserialize, Serialize};

use super::{Corpus, Provenance};
use crate::Label;

/// Dataset-level counts. Post length is measured in whitespace-delimited
/// tokens over title and body together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub total: usize,
    pub self_harm: usize,
    pub non_self_harm: usize,
    pub with_emoji: usize,
    pub without_emoji: usize,
    pub average_length_words: f64,
    /// False for an empty corpus, where the average is reported as 0.
    pub average_length_defined: bool,
    pub sh_with_cm_spans: usize,
    pub sh_with_si_spans: usize,
    pub nsh_with_cm_spans: usize,
    pub nsh_with_si_spans: usize,
    pub original: usize,
    pub synthetic: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut r = StatsReport {
        total: corpus.len(),
        self_harm: 0,
        non_self_harm: 0,
        with_emoji: 0,
        without_emoji: 0,
        average_length_words: 0.0,
        average_length_defined: !corpus.is_empty(),
        sh_with_cm_spans: 0,
        sh_with_si_spans: 0,
        nsh_with_cm_spans: 0,
        nsh_with_si_spans: 0,
        original: 0,
        synthetic: 0,
    };
    let mut words = 0usize;
    for p in &corpus.posts {
        let has_cm = !p.cm_spans.is_empty();
        let has_si = !p.si_spans.is_empty();
        match p.label {
            Label::SelfHarm => {
                r.self_harm += 1;
                r.sh_with_cm_spans += usize::from(has_cm);
                r.sh_with_si_spans += usize::from(has_si);
            }
            Label::NonSelfHarm => {
                r.non_self_harm += 1;
                r.nsh_with_cm_spans += usize::from(has_cm);
                r.nsh_with_si_spans += usize::from(has_si);
            }
        }
        if p.has_emoji() {
            r.with_emoji += 1;
        } else {
            r.without_emoji += 1;
        }
        match p.provenance {
            Provenance::Original => r.original += 1,
            Provenance::Synthetic => r.synthetic += 1,
        }
        words += p.word_count();
    }
    if r.average_length_defined {
        r.average_length_words = words as f64 / r.total as f64;
    }
    r
}
