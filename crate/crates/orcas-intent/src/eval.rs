//! Classification metrics: per-class precision/recall/F1, macro and
//! support-weighted averages, accuracy, confusion matrix, and Cohen's
//! kappa for inter-annotator agreement.

use std::fmt::Display;
use std::io::{self, Write};

use crate::taxonomy::{project_top_level, IntentLabel, TopLevelLabel};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("label lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot evaluate an empty label list")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full evaluation summary over one prediction/gold pairing.
///
/// `per_class` is parallel to `classes`; `confusion[g][p]` counts records
/// with gold class `classes[g]` predicted as `classes[p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<L> {
    pub classes: Vec<L>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
    pub n: u64,
}

impl<L: Copy + PartialEq + Display> EvalReport<L> {
    pub fn class_metrics(&self, label: L) -> Option<&ClassMetrics> {
        let idx = self.classes.iter().position(|c| *c == label)?;
        Some(&self.per_class[idx])
    }

    /// Aligned table in the usual classification-report layout:
    /// precision, recall, F1, examples per class, then accuracy and the
    /// macro / weighted averages.
    pub fn write_table(&self, mut w: impl Write) -> io::Result<()> {
        let name_width = self
            .classes
            .iter()
            .map(|c| c.to_string().len())
            .chain(["weighted avg".len()])
            .max()
            .unwrap_or(12);
        writeln!(
            w,
            "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}",
            "", "precision", "recall", "f1-score", "examples"
        )?;
        for (label, m) in self.classes.iter().zip(&self.per_class) {
            writeln!(
                w,
                "{:<name_width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9}",
                label.to_string(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            )?;
        }
        writeln!(w)?;
        writeln!(
            w,
            "{:<name_width$}  {:>9}  {:>9}  {:>9.3}  {:>9}",
            "accuracy", "", "", self.accuracy, self.n
        )?;
        for (name, avg) in [
            ("macro avg", self.macro_avg),
            ("weighted avg", self.weighted_avg),
        ] {
            writeln!(
                w,
                "{:<name_width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9}",
                name, avg.precision, avg.recall, avg.f1, self.n
            )?;
        }
        Ok(())
    }

    /// `key=value` lines for scripting.
    pub fn write_machine(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "n={}", self.n)?;
        writeln!(w, "accuracy={:.3}", self.accuracy)?;
        writeln!(w, "macro_precision={:.3}", self.macro_avg.precision)?;
        writeln!(w, "macro_recall={:.3}", self.macro_avg.recall)?;
        writeln!(w, "macro_f1={:.3}", self.macro_avg.f1)?;
        writeln!(w, "weighted_precision={:.3}", self.weighted_avg.precision)?;
        writeln!(w, "weighted_recall={:.3}", self.weighted_avg.recall)?;
        writeln!(w, "weighted_f1={:.3}", self.weighted_avg.f1)?;
        for (label, m) in self.classes.iter().zip(&self.per_class) {
            let name = label.to_string();
            writeln!(w, "{name}_precision={:.3}", m.precision)?;
            writeln!(w, "{name}_recall={:.3}", m.recall)?;
            writeln!(w, "{name}_f1={:.3}", m.f1)?;
            writeln!(w, "{name}_support={}", m.support)?;
        }
        Ok(())
    }
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against gold labels over `classes`.
///
/// Labels encountered in either list but missing from `classes` are
/// appended (in encounter order) so spurious predicted classes surface
/// as support-0 rows. Undefined precision/recall is reported as 0.
pub fn evaluate<L: Copy + PartialEq>(
    pred: &[L],
    gold: &[L],
    classes: &[L],
) -> Result<EvalReport<L>, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }

    let mut all_classes: Vec<L> = classes.to_vec();
    for label in gold.iter().chain(pred) {
        if !all_classes.contains(label) {
            all_classes.push(*label);
        }
    }
    let index_of = |label: &L| {
        all_classes
            .iter()
            .position(|c| c == label)
            .expect("every label was registered above")
    };

    let k = all_classes.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (p, g) in pred.iter().zip(gold) {
        confusion[index_of(g)][index_of(p)] += 1;
    }

    let n = pred.len() as u64;
    let mut per_class = Vec::with_capacity(k);
    let mut correct = 0u64;
    for i in 0..k {
        let tp = confusion[i][i];
        correct += tp;
        let support: u64 = confusion[i].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[i]).sum();
        let precision = ratio_or_zero(tp, predicted);
        let recall = ratio_or_zero(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }

    let macro_avg = Averages {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k as f64,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k as f64,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64,
    };
    let weight = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| f(m) * m.support as f64)
            .sum::<f64>()
            / n as f64
    };
    let weighted_avg = Averages {
        precision: weight(|m| m.precision),
        recall: weight(|m| m.recall),
        f1: weight(|m| m.f1),
    };

    Ok(EvalReport {
        classes: all_classes,
        per_class,
        macro_avg,
        weighted_avg,
        accuracy: correct as f64 / n as f64,
        confusion,
        n,
    })
}

/// Projects both sides onto the three top-level classes and evaluates
/// there; informational subclasses collapse together, so disagreements
/// inside informational count as matches.
pub fn evaluate_top_level(
    pred: &[IntentLabel],
    gold: &[IntentLabel],
) -> Result<EvalReport<TopLevelLabel>, EvalError> {
    let project = |labels: &[IntentLabel]| -> Vec<TopLevelLabel> {
        labels.iter().map(|l| project_top_level(*l)).collect()
    };
    evaluate(&project(pred), &project(gold), &TopLevelLabel::ALL)
}

/// Fraction of positions where the two lists agree.
pub fn agreement_rate<L: PartialEq>(a: &[L], b: &[L]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

/// Cohen's kappa: chance-corrected agreement between two annotations,
/// κ = (p_o − p_e) / (1 − p_e) with p_e from the marginal products.
/// Two identical constant lists (p_e = 1) score 1.0.
pub fn cohen_kappa<L: Copy + PartialEq>(a: &[L], b: &[L]) -> Result<f64, EvalError> {
    let p_o = agreement_rate(a, b)?;
    let mut classes: Vec<L> = Vec::new();
    for label in a.iter().chain(b) {
        if !classes.contains(label) {
            classes.push(*label);
        }
    }
    let n = a.len() as f64;
    let p_e: f64 = classes
        .iter()
        .map(|c| {
            let in_a = a.iter().filter(|l| *l == c).count() as f64 / n;
            let in_b = b.iter().filter(|l| *l == c).count() as f64 / n;
            in_a * in_b
        })
        .sum();
    if p_e >= 1.0 {
        // Both lists are the same constant, which forces p_o = 1.
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
