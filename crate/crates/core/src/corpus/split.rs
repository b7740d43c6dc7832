use rand::seq::SliceRandom;

use super::{Corpus, CorpusError, Post, Provenance, Split};
use crate::util::{round_half_even_count, seeded_rng};
use crate::Label;

/// Stratified train/test split.
///
/// Synthetic posts always go to train. Within each label, original posts are
/// shuffled under `seed` and `round(test_fraction * n_label)` of them (ties
/// to even) go to test. Both sides keep corpus order and get their `split`
/// field set.
pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(test_fraction));
    }
    let mut rng = seeded_rng(seed);
    let mut is_test = vec![false; corpus.len()];
    for label in Label::ALL {
        let mut stratum: Vec<usize> = corpus
            .posts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.provenance == Provenance::Original && p.label == label)
            .map(|(i, _)| i)
            .collect();
        let n_test = round_half_even_count(test_fraction, stratum.len());
        stratum.shuffle(&mut rng);
        for &i in &stratum[..n_test] {
            is_test[i] = true;
        }
    }

    let (mut train, mut test): (Vec<Post>, Vec<Post>) = (Vec::new(), Vec::new());
    for (post, to_test) in corpus.posts.iter().zip(is_test) {
        let mut post = post.clone();
        if to_test {
            post.split = Some(Split::Test);
            test.push(post);
        } else {
            post.split = Some(Split::Train);
            train.push(post);
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(CorpusError::InsufficientPosts(format!(
            "split of {} posts at fraction {test_fraction} leaves {} train / {} test",
            corpus.len(),
            train.len(),
            test.len()
        )));
    }
    let wrap = |posts| Corpus {
        posts,
        schema_version: corpus.schema_version.clone(),
    };
    Ok((wrap(train), wrap(test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(sh: usize, nsh: usize, synthetic: usize) -> Corpus {
        let mut posts = Vec::new();
        for i in 0..sh {
            posts.push(Post::new(format!("sh{i}"), "x", Label::SelfHarm));
        }
        for i in 0..nsh {
            posts.push(Post::new(format!("nsh{i}"), "x", Label::NonSelfHarm));
        }
        for i in 0..synthetic {
            let mut p = Post::new(format!("syn{i}"), "x", Label::ALL[i % 2]);
            p.provenance = Provenance::Synthetic;
            posts.push(p);
        }
        Corpus::new(posts).unwrap()
    }

    fn count(c: &Corpus, label: Label) -> usize {
        c.posts.iter().filter(|p| p.label == label).count()
    }

    #[test]
    fn synthetic_posts_stay_in_train() {
        let (train, test) = split(&fixture(50, 50, 10), 0.2, 7).unwrap();
        assert_eq!(test.len(), 20);
        assert!(test.posts.iter().all(|p| p.provenance == Provenance::Original));
        assert_eq!(train.len(), 90);
    }

    #[test]
    fn skewed_strata() {
        let (_, test) = split(&fixture(90, 10, 0), 0.2, 3).unwrap();
        assert_eq!(count(&test, Label::SelfHarm), 18);
        assert_eq!(count(&test, Label::NonSelfHarm), 2);
    }

    #[test]
    fn deterministic_and_partitioning() {
        let c = fixture(40, 25, 5);
        let a = split(&c, 0.3, 11).unwrap();
        let b = split(&c, 0.3, 11).unwrap();
        assert_eq!(a, b);
        let other = split(&c, 0.3, 12).unwrap();
        assert_ne!(a.1, other.1);
        let mut ids: Vec<&str> = a.0.posts.iter().chain(&a.1.posts).map(|p| p.id.as_str()).collect();
        ids.sort();
        let mut all: Vec<&str> = c.posts.iter().map(|p| p.id.as_str()).collect();
        all.sort();
        assert_eq!(ids, all);
    }

    #[test]
    fn rejects_bad_fraction_and_empty_sides() {
        let c = fixture(2, 0, 0);
        assert!(matches!(split(&c, 0.0, 1), Err(CorpusError::InvalidFraction(_))));
        assert!(matches!(split(&c, 1.0, 1), Err(CorpusError::InvalidFraction(_))));
        assert!(matches!(split(&c, 0.1, 1), Err(CorpusError::InsufficientPosts(_))));
    }
}
