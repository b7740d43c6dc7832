use super::MetricError;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn f1(&self) -> f64 {
        let predicted = self.tp + self.fp;
        let actual = self.tp + self.fn_;
        if predicted == 0 || actual == 0 {
            return 0.0;
        }
        let p = self.tp as f64 / predicted as f64;
        let r = self.tp as f64 / actual as f64;
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn confusion(preds: &[Label], golds: &[Label], positive: Label) -> Result<Confusion, MetricError> {
    if preds.len() != golds.len() {
        return Err(MetricError::LengthMismatch {
            left: preds.len(),
            right: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut c = Confusion::default();
    for (&p, &g) in preds.iter().zip(golds) {
        match (p == positive, g == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// F1 on the `positive` class; 0 when precision and recall are both 0.
pub fn classification_f1(preds: &[Label], golds: &[Label], positive: Label) -> Result<f64, MetricError> {
    Ok(confusion(preds, golds, positive)?.f1())
}

/// Unweighted mean of the per-class F1 scores.
pub fn macro_f1(preds: &[Label], golds: &[Label]) -> Result<f64, MetricError> {
    let mut sum = 0.0;
    for label in Label::ALL {
        sum += classification_f1(preds, golds, label)?;
    }
    Ok(sum / Label::ALL.len() as f64)
}
