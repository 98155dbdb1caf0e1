//! Classification metrics, confusion-matrix accounting, and report tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ground-truth / predicted class of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Compliant,
    NonCompliant,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Compliant => "compliant",
            Label::NonCompliant => "non-compliant",
        }
    }

    pub fn parse(text: &str) -> Option<Label> {
        match text.trim() {
            "compliant" => Some(Label::Compliant),
            "non-compliant" => Some(Label::NonCompliant),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("unknown report format {0:?}; expected csv, json, or markdown-table")]
    UnknownFormat(String),
}

/// Confusion counts for a chosen positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// One evaluated run: standard metrics plus the engine-side counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub name: String,
    pub positive_class: Label,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    /// Mean wall-clock seconds per record.
    pub mean_latency: f64,
    /// Debate phases (verdict pipeline) or generation retries (rule pipeline).
    pub counter: u64,
    /// Records excluded from the confusion matrix (undecided).
    pub exclusions: usize,
}

/// Compute confusion-matrix metrics over aligned prediction/label sequences.
///
/// `None` predictions are undecided records: they are excluded from the
/// matrix and counted separately, so `tp+fp+tn+fn+exclusions` equals the
/// dataset size.
pub fn compute_metrics(
    name: &str,
    predictions: &[Option<Label>],
    labels: &[Label],
    positive_class: Label,
) -> Result<MetricsReport, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut confusion = Confusion::default();
    let mut exclusions = 0usize;
    for (pred, actual) in predictions.iter().zip(labels) {
        let Some(pred) = pred else {
            exclusions += 1;
            continue;
        };
        match (*pred == positive_class, *actual == positive_class) {
            (true, true) => confusion.tp += 1,
            (true, false) => confusion.fp += 1,
            (false, false) => confusion.tn += 1,
            (false, true) => confusion.fn_ += 1,
        }
    }
    Ok(finish_report(name, positive_class, confusion, exclusions, 0.0, 0))
}

/// Assemble a report from raw confusion counts.
pub fn finish_report(
    name: &str,
    positive_class: Label,
    confusion: Confusion,
    exclusions: usize,
    mean_latency: f64,
    counter: u64,
) -> MetricsReport {
    let total = confusion.tp + confusion.fp + confusion.tn + confusion.fn_;
    let accuracy = if total == 0 {
        0.0
    } else {
        (confusion.tp + confusion.tn) as f64 / total as f64
    };
    let precision = ratio(confusion.tp, confusion.tp + confusion.fp);
    let recall = ratio(confusion.tp, confusion.tp + confusion.fn_);
    let f1 = f1_score(precision, recall);
    MetricsReport {
        name: name.to_string(),
        positive_class,
        accuracy,
        precision,
        recall,
        f1,
        confusion,
        mean_latency,
        counter,
        exclusions,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; zero when both vanish.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Fixed CSV header for emitted report tables.
pub const REPORT_CSV_HEADER: &str = "name,acc,prec,rec,f1,latency,counter,exclusions";

/// Render reports as `csv`, `json`, or `markdown-table`.
pub fn emit_report(reports: &[MetricsReport], format: &str) -> Result<String, MetricsError> {
    match format {
        "csv" => {
            let mut out = String::from(REPORT_CSV_HEADER);
            out.push('\n');
            for r in reports {
                out.push_str(&format!(
                    "{},{:.4},{:.4},{:.4},{:.4},{:.6},{},{}\n",
                    r.name, r.accuracy, r.precision, r.recall, r.f1, r.mean_latency, r.counter,
                    r.exclusions
                ));
            }
            Ok(out)
        }
        "json" => {
            let mut out = serde_json::to_string_pretty(reports).expect("reports serialize");
            out.push('\n');
            Ok(out)
        }
        "markdown-table" => {
            let mut out = String::from(
                "| Name | Acc | Prec | Rec | F1 | Latency | Debates/Retries | Exclusions |\n\
                 |---|---|---|---|---|---|---|---|\n",
            );
            for r in reports {
                out.push_str(&format!(
                    "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.4} | {} | {} |\n",
                    r.name, r.accuracy, r.precision, r.recall, r.f1, r.mean_latency, r.counter,
                    r.exclusions
                ));
            }
            Ok(out)
        }
        other => Err(MetricsError::UnknownFormat(other.to_string())),
    }
}
