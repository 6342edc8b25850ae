//! Prediction result files. One file holds one classifier's predictions for
//! one dataset split: a header naming the run, a free-form parameter line, a
//! summary line with accuracy and timings, then one row per case with the
//! true label, the predicted label, and the probability estimates.
//! Probabilities are quantized to six significant digits when the result is
//! constructed, with the largest entry absorbing the rounding residue so
//! every stored row sums to one; readers validate and never re-round.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ResultsError;
use crate::util::argmax_tie_low;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(value: f64, digits: usize) -> f64 {
    assert!(digits >= 1);
    format!("{:.*e}", digits - 1, value)
        .parse()
        .expect("a formatted float parses back")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub true_label: usize,
    pub predicted_label: usize,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub dataset: String,
    pub classifier: String,
    pub split: Split,
    /// Zero-based fold carried in the file name.
    pub fold: usize,
    pub parameters: String,
    pub accuracy: f64,
    pub build_time_nanos: u64,
    pub test_time_nanos: u64,
    pub rows: Vec<PredictionRow>,
}

fn check_name(field: &str, value: &str) -> Result<(), ResultsError> {
    if value.is_empty() {
        return Err(ResultsError::Invalid(format!("{field} must not be empty")));
    }
    if value.contains(',') || value.contains('\n') || value.contains('\r') {
        return Err(ResultsError::Invalid(format!(
            "{field} `{value}` must not contain commas or line breaks"
        )));
    }
    Ok(())
}

impl ClassifierResult {
    /// Builds a result from raw probability estimates: each row is quantized
    /// to six significant digits, its largest entry is adjusted so the
    /// stored row sums to one, the predicted label is that largest entry
    /// (lowest index on ties), and the accuracy is computed from the rows.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dataset: &str,
        classifier: &str,
        split: Split,
        fold: usize,
        parameters: &str,
        build_time_nanos: u64,
        test_time_nanos: u64,
        predictions: Vec<(usize, Vec<f64>)>,
    ) -> Result<ClassifierResult, ResultsError> {
        check_name("dataset name", dataset)?;
        check_name("classifier name", classifier)?;
        if parameters.contains('\n') || parameters.contains('\r') {
            return Err(ResultsError::Invalid(
                "the parameter line must not contain line breaks".into(),
            ));
        }
        if predictions.is_empty() {
            return Err(ResultsError::Invalid("no prediction rows".into()));
        }
        let classes = predictions[0].1.len();
        if classes == 0 {
            return Err(ResultsError::Invalid("empty probability row".into()));
        }
        let mut rows = Vec::with_capacity(predictions.len());
        for (true_label, probs) in predictions {
            if probs.len() != classes {
                return Err(ResultsError::Invalid(format!(
                    "ragged probability rows: {} then {}",
                    classes,
                    probs.len()
                )));
            }
            if true_label >= classes {
                return Err(ResultsError::Invalid(format!(
                    "true label {true_label} outside the {classes} classes"
                )));
            }
            if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ResultsError::Invalid(format!(
                    "probabilities must be finite and non-negative: {probs:?}"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(ResultsError::Invalid(format!(
                    "probability row sums to {sum}, expected 1"
                )));
            }
            let predicted_label = argmax_tie_low(&probs);
            let mut quantized: Vec<f64> = probs.iter().map(|&p| round_sig(p, 6)).collect();
            let others: f64 = quantized
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != predicted_label)
                .map(|(_, q)| q)
                .sum();
            quantized[predicted_label] = (1.0 - others).max(0.0);
            rows.push(PredictionRow {
                true_label,
                predicted_label,
                probabilities: quantized,
            });
        }
        let accuracy = accuracy_of_rows(&rows);
        Ok(ClassifierResult {
            dataset: dataset.to_string(),
            classifier: classifier.to_string(),
            split,
            fold,
            parameters: parameters.to_string(),
            accuracy,
            build_time_nanos,
            test_time_nanos,
            rows,
        })
    }

    pub fn case_count(&self) -> usize {
        self.rows.len()
    }

    pub fn class_count(&self) -> usize {
        self.rows[0].probabilities.len()
    }

    /// Recall of one class; None when the class never appears as a true
    /// label.
    pub fn class_recall(&self, class: usize) -> Option<f64> {
        let relevant: Vec<&PredictionRow> =
            self.rows.iter().filter(|r| r.true_label == class).collect();
        if relevant.is_empty() {
            return None;
        }
        let hit = relevant
            .iter()
            .filter(|r| r.predicted_label == class)
            .count();
        Some(hit as f64 / relevant.len() as f64)
    }

    pub fn build_hours(&self) -> f64 {
        self.build_time_nanos as f64 / 3.6e12
    }

    pub fn test_minutes(&self) -> f64 {
        self.test_time_nanos as f64 / 6e10
    }

    pub fn file_name(&self) -> String {
        format!("{}Fold{}.csv", self.split, self.fold)
    }
}

fn accuracy_of_rows(rows: &[PredictionRow]) -> f64 {
    let correct = rows
        .iter()
        .filter(|r| r.predicted_label == r.true_label)
        .count();
    correct as f64 / rows.len() as f64
}

/// Where a result file lives under a results root.
pub fn result_path(
    root: impl AsRef<Path>,
    classifier: &str,
    dataset: &str,
    split: Split,
    fold: usize,
) -> PathBuf {
    root.as_ref()
        .join(classifier)
        .join("Predictions")
        .join(dataset)
        .join(format!("{split}Fold{fold}.csv"))
}

/// Writes the result under the root, creating directories as needed, and
/// returns the file path.
pub fn write_result(
    root: impl AsRef<Path>,
    result: &ClassifierResult,
) -> Result<PathBuf, ResultsError> {
    let path = result_path(
        &root,
        &result.classifier,
        &result.dataset,
        result.split,
        result.fold,
    );
    let parent = path.parent().expect("result paths have a parent");
    fs::create_dir_all(parent).map_err(|e| ResultsError::Io {
        path: parent.to_path_buf(),
        source: e,
    })?;
    let mut text = String::new();
    text.push_str(&format!(
        "{},{},{}\n",
        result.dataset, result.classifier, result.split
    ));
    text.push_str(&result.parameters);
    text.push('\n');
    text.push_str(&format!(
        "{},{},{}\n",
        result.accuracy, result.build_time_nanos, result.test_time_nanos
    ));
    for row in &result.rows {
        text.push_str(&format!("{},{},", row.true_label, row.predicted_label));
        for p in &row.probabilities {
            text.push_str(&format!(",{p}"));
        }
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| ResultsError::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> ResultsError {
    ResultsError::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses `trainFoldN.csv` / `testFoldN.csv`.
fn parse_file_name(path: &Path) -> Result<(Split, usize), ResultsError> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    let rest = name
        .strip_suffix(".csv")
        .ok_or_else(|| ResultsError::Invalid(format!("`{name}` is not a result file name")))?;
    for (split, prefix) in [(Split::Train, "trainFold"), (Split::Test, "testFold")] {
        if let Some(fold) = rest.strip_prefix(prefix) {
            let fold = fold.parse().map_err(|_| {
                ResultsError::Invalid(format!("`{name}` has no fold number"))
            })?;
            return Ok((split, fold));
        }
    }
    Err(ResultsError::Invalid(format!(
        "`{name}` is not a result file name"
    )))
}

/// Reads and validates a result file: the name carries the split and fold,
/// every probability row must sum to one within 1e-6, and the stored
/// accuracy must match the rows within 1e-12. Stored probabilities are kept
/// verbatim.
pub fn read_result(path: impl AsRef<Path>) -> Result<ClassifierResult, ResultsError> {
    let path = path.as_ref();
    let (split, fold) = parse_file_name(path)?;
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ResultsError::Missing {
                path: path.to_path_buf(),
            }
        } else {
            ResultsError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 3 {
        return Err(malformed(path, 1, "expected `dataset,classifier,split`"));
    }
    let dataset = fields[0].to_string();
    let classifier = fields[1].to_string();
    if fields[2] != split.as_str() {
        return Err(malformed(
            path,
            1,
            format!(
                "split `{}` does not match the file name's `{split}`",
                fields[2]
            ),
        ));
    }
    let parameters = lines
        .next()
        .ok_or_else(|| malformed(path, 2, "missing parameter line"))?
        .to_string();
    let summary = lines
        .next()
        .ok_or_else(|| malformed(path, 3, "missing summary line"))?;
    let parts: Vec<&str> = summary.split(',').collect();
    if parts.len() != 3 {
        return Err(malformed(
            path,
            3,
            "expected `accuracy,buildTimeNanos,testTimeNanos`",
        ));
    }
    let accuracy: f64 = parts[0]
        .parse()
        .map_err(|_| malformed(path, 3, format!("bad accuracy `{}`", parts[0])))?;
    let build_time_nanos: u64 = parts[1]
        .parse()
        .map_err(|_| malformed(path, 3, format!("bad build time `{}`", parts[1])))?;
    let test_time_nanos: u64 = parts[2]
        .parse()
        .map_err(|_| malformed(path, 3, format!("bad test time `{}`", parts[2])))?;

    let mut rows = Vec::new();
    let mut classes: Option<usize> = None;
    for (offset, line) in lines.enumerate() {
        let line_no = 4 + offset;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            return Err(malformed(
                path,
                line_no,
                "expected `true,predicted,,p0,...`",
            ));
        }
        if !fields[2].is_empty() {
            return Err(malformed(
                path,
                line_no,
                "the third field must be empty",
            ));
        }
        let true_label: usize = fields[0]
            .parse()
            .map_err(|_| malformed(path, line_no, format!("bad true label `{}`", fields[0])))?;
        let predicted_label: usize = fields[1]
            .parse()
            .map_err(|_| malformed(path, line_no, format!("bad predicted label `{}`", fields[1])))?;
        let probabilities: Vec<f64> = fields[3..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| malformed(path, line_no, format!("bad probability `{f}`")))
            })
            .collect::<Result<_, _>>()?;
        match classes {
            None => classes = Some(probabilities.len()),
            Some(c) if c != probabilities.len() => {
                return Err(malformed(path, line_no, "ragged probability rows"));
            }
            _ => {}
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(malformed(
                path,
                line_no,
                "probabilities must be finite and non-negative",
            ));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(ResultsError::BadProbabilitySum {
                path: path.to_path_buf(),
                line: line_no,
                sum,
            });
        }
        let c = probabilities.len();
        if true_label >= c || predicted_label >= c {
            return Err(malformed(path, line_no, "label outside the class range"));
        }
        rows.push(PredictionRow {
            true_label,
            predicted_label,
            probabilities,
        });
    }
    if rows.is_empty() {
        return Err(malformed(path, 4, "no prediction rows"));
    }
    let recomputed = accuracy_of_rows(&rows);
    if (recomputed - accuracy).abs() > 1e-12 {
        return Err(ResultsError::AccuracyMismatch {
            path: path.to_path_buf(),
            stored: accuracy,
            recomputed,
        });
    }
    Ok(ClassifierResult {
        dataset,
        classifier,
        split,
        fold,
        parameters,
        accuracy,
        build_time_nanos,
        test_time_nanos,
        rows,
    })
}
