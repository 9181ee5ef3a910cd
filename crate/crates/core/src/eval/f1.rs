use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ClassCounts {
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassCounts>,
}

impl F1Report {
    pub fn from_counts(per_class: Vec<ClassCounts>) -> Self {
        let (mut num, mut den) = (0u64, 0u64);
        for c in &per_class {
            num += 2 * c.tp;
            den += 2 * c.tp + c.fp + c.fn_;
        }
        let micro_f1 = if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let macro_f1 = if per_class.is_empty() {
            0.0
        } else {
            per_class.iter().map(ClassCounts::f1).sum::<f64>() / per_class.len() as f64
        };
        F1Report {
            micro_f1,
            macro_f1,
            per_class,
        }
    }
}

/// Micro and macro F1 over `num_classes` classes; every class counts toward the macro mean.
pub fn f1(predictions: &[Vec<usize>], truth: &[Vec<usize>], num_classes: usize) -> Result<F1Report> {
    if predictions.len() != truth.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} truth rows",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Data("empty test set".into()));
    }
    let mut counts = vec![ClassCounts::default(); num_classes];
    for (pred, gold) in predictions.iter().zip(truth) {
        for &c in pred {
            if gold.contains(&c) {
                counts[c].tp += 1;
            } else {
                counts[c].fp += 1;
            }
        }
        for &c in gold {
            if !pred.contains(&c) {
                counts[c].fn_ += 1;
            }
        }
    }
    Ok(F1Report::from_counts(counts))
}
