//! Inter-annotator agreement: Fleiss' kappa over categorical ratings and
//! pairwise span F1 between annotators.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SpanCategory;
use crate::metrics::span_set_f1;

#[derive(Debug, thiserror::Error)]
pub enum AgreementError {
    #[error("invalid rating matrix: {0}")]
    InvalidMatrix(String),
    #[error("all ratings fall in one category; kappa is undefined")]
    DegenerateDistribution,
    #[error("need at least 2 annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("annotators cover different post ids: {0}")]
    MisalignedIds(String),
    #[error("reading {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },
}

/// Items by categories; cell `(i, j)` counts raters who put item `i` in
/// category `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingMatrix {
    counts: Vec<Vec<u32>>,
    raters: u32,
}

impl RatingMatrix {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<RatingMatrix, AgreementError> {
        let bad = |m: String| Err(AgreementError::InvalidMatrix(m));
        let Some(first) = counts.first() else {
            return bad("no items".into());
        };
        let k = first.len();
        if k < 2 {
            return bad(format!("need at least 2 categories, got {k}"));
        }
        let raters: u32 = first.iter().sum();
        if raters < 2 {
            return bad(format!("need at least 2 raters per item, got {raters}"));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != k {
                return bad(format!("item {i} has {} categories, expected {k}", row.len()));
            }
            let s: u32 = row.iter().sum();
            if s != raters {
                return bad(format!("item {i} has {s} ratings, expected {raters}"));
            }
        }
        Ok(RatingMatrix { counts, raters })
    }

    /// Build from per-item lists of category labels.
    pub fn from_labels<S: AsRef<str>>(items: &[Vec<S>]) -> Result<RatingMatrix, AgreementError> {
        let cats: BTreeSet<&str> = items.iter().flatten().map(AsRef::as_ref).collect();
        let cats: Vec<&str> = cats.into_iter().collect();
        let counts = items
            .iter()
            .map(|item| {
                let mut row = vec![0u32; cats.len().max(2)];
                for l in item {
                    row[cats.binary_search(&l.as_ref()).unwrap()] += 1;
                }
                row
            })
            .collect();
        RatingMatrix::new(counts)
    }

    /// CSV with one row per item and one integer column per category. A
    /// first row that does not parse as integers is treated as a header.
    pub fn from_csv(text: &str) -> Result<RatingMatrix, AgreementError> {
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Result<Vec<u32>, _> = line.split(',').map(|c| c.trim().parse::<u32>()).collect();
            match cells {
                Ok(row) => counts.push(row),
                Err(_) if i == 0 => continue,
                Err(e) => return Err(AgreementError::InvalidMatrix(format!("line {}: {e}", i + 1))),
            }
        }
        RatingMatrix::new(counts)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

pub fn fleiss_kappa(m: &RatingMatrix) -> Result<f64, AgreementError> {
    let n = f64::from(m.raters);
    let items = m.items() as f64;
    let mut p_bar = 0.0;
    let mut totals = vec![0.0; m.categories()];
    for row in &m.counts {
        let sq: f64 = row.iter().map(|&c| f64::from(c) * f64::from(c)).sum();
        p_bar += (sq - n) / (n * (n - 1.0));
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += f64::from(c);
        }
    }
    p_bar /= items;
    let p_e: f64 = totals.iter().map(|t| (t / (items * n)).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(AgreementError::DegenerateDistribution);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// One annotator's spans for one post.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub id: String,
    #[serde(default)]
    pub cm_spans: Vec<String>,
    #[serde(default)]
    pub si_spans: Vec<String>,
}

impl SpanAnnotation {
    pub fn spans(&self, category: SpanCategory) -> &[String] {
        match category {
            SpanCategory::Cm => &self.cm_spans,
            SpanCategory::Si => &self.si_spans,
        }
    }
}

/// Annotator name to that annotator's posts.
pub type Annotations = BTreeMap<String, Vec<SpanAnnotation>>;

/// Mean over posts and unordered annotator pairs of the span-set F1, each
/// pair scored in both directions and averaged.
pub fn span_agreement_f1(annotations: &Annotations, category: SpanCategory) -> Result<f64, AgreementError> {
    if annotations.len() < 2 {
        return Err(AgreementError::TooFewAnnotators(annotations.len()));
    }
    let by_id: Vec<BTreeMap<&str, &SpanAnnotation>> = annotations
        .values()
        .map(|v| v.iter().map(|a| (a.id.as_str(), a)).collect())
        .collect();
    let names: Vec<&String> = annotations.keys().collect();
    let ids: BTreeSet<&str> = by_id[0].keys().copied().collect();
    for (name, (posts, map)) in names.iter().zip(annotations.values().zip(&by_id)) {
        if map.len() != posts.len() {
            return Err(AgreementError::MisalignedIds(format!("{name} annotates an id twice")));
        }
        let these: BTreeSet<&str> = map.keys().copied().collect();
        if these != ids {
            let diff: Vec<&&str> = these.symmetric_difference(&ids).take(3).collect();
            return Err(AgreementError::MisalignedIds(format!("{name} differs on {diff:?}")));
        }
    }
    if ids.is_empty() {
        return Err(AgreementError::MisalignedIds("no posts annotated".into()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for id in &ids {
        for a in 0..by_id.len() {
            for b in a + 1..by_id.len() {
                let x = by_id[a][id].spans(category);
                let y = by_id[b][id].spans(category);
                sum += (span_set_f1(x, y) + span_set_f1(y, x)) / 2.0;
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

/// Read `<annotator>.jsonl` files from `dir`; each line is a
/// [`SpanAnnotation`].
pub fn load_annotations(dir: &Path) -> Result<Annotations, AgreementError> {
    let io_err = |path: &Path, source| AgreementError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Annotations::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    entries.sort();
    for path in entries {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            rows.push(serde_json::from_str(line).map_err(|e| AgreementError::Parse {
                path: path.clone(),
                line: i + 1,
                reason: e.to_string(),
            })?);
        }
        out.insert(name, rows);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_kappa() {
        let m = RatingMatrix::from_labels(&[vec!["A", "A", "A"], vec!["A", "A", "B"]]).unwrap();
        let k = fleiss_kappa(&m).unwrap();
        assert!((k + 0.2).abs() < 1e-12, "{k}");
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = RatingMatrix::new(vec![vec![3, 0], vec![0, 3], vec![3, 0]]).unwrap();
        assert_eq!(fleiss_kappa(&m).unwrap(), 1.0);
        let d = RatingMatrix::new(vec![vec![3, 0], vec![3, 0]]).unwrap();
        assert!(matches!(fleiss_kappa(&d), Err(AgreementError::DegenerateDistribution)));
    }

    #[test]
    fn matrix_validation() {
        assert!(RatingMatrix::new(vec![]).is_err());
        assert!(RatingMatrix::new(vec![vec![2]]).is_err());
        assert!(RatingMatrix::new(vec![vec![2, 1], vec![1, 1]]).is_err());
        assert!(RatingMatrix::new(vec![vec![1, 0]]).is_err());
        let m = RatingMatrix::from_csv("sh,nsh\n2,1\n0,3\n").unwrap();
        assert_eq!((m.items(), m.categories(), m.raters()), (2, 2, 3));
    }

    fn ann(id: &str, cm: &[&str]) -> SpanAnnotation {
        SpanAnnotation {
            id: id.into(),
            cm_spans: cm.iter().map(|s| s.to_string()).collect(),
            si_spans: vec![],
        }
    }

    #[test]
    fn span_agreement() {
        let mut a = Annotations::new();
        a.insert("x".into(), vec![ann("1", &["kill me now"]), ann("2", &["dead"])]);
        a.insert("y".into(), vec![ann("1", &["kill me now"]), ann("2", &["dead"])]);
        assert_eq!(span_agreement_f1(&a, SpanCategory::Cm).unwrap(), 1.0);

        a.insert("y".into(), vec![ann("1", &[]), ann("2", &[])]);
        a.remove("x");
        a.insert("x".into(), vec![ann("1", &["a"]), ann("2", &["b"])]);
        assert_eq!(span_agreement_f1(&a, SpanCategory::Cm).unwrap(), 0.0);

        let mut p = Annotations::new();
        p.insert("x".into(), vec![ann("1", &["kill me now"])]);
        p.insert("y".into(), vec![ann("1", &["kill me"])]);
        let f = crate::metrics::token_f1("kill me now", "kill me");
        assert!((span_agreement_f1(&p, SpanCategory::Cm).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn misaligned() {
        let mut a = Annotations::new();
        a.insert("x".into(), vec![ann("1", &[])]);
        a.insert("y".into(), vec![ann("2", &[])]);
        assert!(matches!(
            span_agreement_f1(&a, SpanCategory::Cm),
            Err(AgreementError::MisalignedIds(_))
        ));
        a.remove("y");
        assert!(matches!(
            span_agreement_f1(&a, SpanCategory::Cm),
            Err(AgreementError::TooFewAnnotators(1))
        ));
    }
}
