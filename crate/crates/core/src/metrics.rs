//! Batch accuracy bookkeeping: confusion counts, classification accuracy,
//! and threshold calibration from known-clean distances.

use std::fmt;

use crate::inspect::Verdict;

/// Default relative margin applied above the largest clean distance.
pub const DEFAULT_CALIBRATION_MARGIN: f64 = 0.05;

/// Errors from metric computations.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// No verdicts or no clean distances to work with.
    EmptyInput,
    /// Calibration margins must be nonnegative.
    NegativeMargin { margin: f64 },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyInput => f.write_str("no inputs to aggregate"),
            MetricsError::NegativeMargin { margin } => {
                write!(f, "calibration margin {margin} is negative")
            }
        }
    }
}

impl std::error::Error for MetricsError {}

/// One classified tile with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVerdict {
    /// Identifier for reporting, typically the image path.
    pub image_id: String,
    pub truth: Verdict,
    pub predicted: Verdict,
    pub distance: f64,
}

/// Confusion counts plus classification accuracy.
///
/// `false_ok` counts missed defects (predicted OK, truth DEFECTIVE);
/// `false_defective` counts false alarms (predicted DEFECTIVE, truth OK).
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub total: usize,
    pub correct: usize,
    pub true_ok: usize,
    pub true_defective: usize,
    pub false_ok: usize,
    pub false_defective: usize,
    /// `100 * correct / total`.
    pub ca_percent: f64,
}

impl fmt::Display for AccuracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>13} {:>20}",
            "", "predicted OK", "predicted DEFECTIVE"
        )?;
        writeln!(
            f,
            "{:<16} {:>13} {:>20}",
            "truth OK", self.true_ok, self.false_defective
        )?;
        writeln!(
            f,
            "{:<16} {:>13} {:>20}",
            "truth DEFECTIVE", self.false_ok, self.true_defective
        )?;
        write!(
            f,
            "total {}  correct {}  CA {:.1}%",
            self.total, self.correct, self.ca_percent
        )
    }
}

/// Aggregates verdicts into confusion counts and accuracy. The order of
/// the input does not affect the result.
pub fn confusion(verdicts: &[LabeledVerdict]) -> Result<AccuracyReport, MetricsError> {
    if verdicts.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut report = AccuracyReport {
        total: verdicts.len(),
        correct: 0,
        true_ok: 0,
        true_defective: 0,
        false_ok: 0,
        false_defective: 0,
        ca_percent: 0.0,
    };
    for v in verdicts {
        match (v.truth, v.predicted) {
            (Verdict::Ok, Verdict::Ok) => {
                report.true_ok += 1;
                report.correct += 1;
            }
            (Verdict::Defective, Verdict::Defective) => {
                report.true_defective += 1;
                report.correct += 1;
            }
            (Verdict::Defective, Verdict::Ok) => report.false_ok += 1,
            (Verdict::Ok, Verdict::Defective) => report.false_defective += 1,
        }
    }
    report.ca_percent = 100.0 * report.correct as f64 / report.total as f64;
    Ok(report)
}

/// Picks a decision threshold from distances of known-clean tiles:
/// `max(clean) * (1 + margin)`.
pub fn calibrate_threshold(clean_distances: &[f64], margin: f64) -> Result<f64, MetricsError> {
    if clean_distances.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if margin < 0.0 {
        return Err(MetricsError::NegativeMargin { margin });
    }
    let max = clean_distances.iter().fold(f64::MIN, |m, &d| m.max(d));
    Ok(max * (1.0 + margin))
}
