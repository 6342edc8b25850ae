//! Ensemble assembly from stored component results.
//!
//! Components are expensive to build, so their per-fold predictions are
//! written to disk once and recombined later. This module rebuilds the
//! weighted ensemble from those files alone: no component model is loaded,
//! only the probability rows and the stored train accuracies that become
//! the weights.

use std::path::{Path, PathBuf};

use crate::ensemble::combine_probabilities;
use crate::error::{BuildError, ResultsError};
use crate::results::{read_result, result_path, ClassifierResult, Split};
use crate::util::argmax_tie_low;

/// Path of one component's stored result for a dataset fold, using the
/// shared layout `{root}/{component}/Predictions/{dataset}/{split}Fold{fold}.csv`.
pub fn component_results_path(
    root: impl AsRef<Path>,
    component: &str,
    dataset: &str,
    split: Split,
    fold: usize,
) -> PathBuf {
    result_path(root, component, dataset, split, fold)
}

/// The ensemble recombined from component result files.
///
/// `weights` holds the stored train accuracies in `component_names` order.
/// Prediction rows pair each case's true label with the combined probability
/// vector. Build and test times are the sums over the component test files.
#[derive(Debug, Clone)]
pub struct FileEnsemble {
    pub dataset: String,
    pub fold: usize,
    pub component_names: Vec<String>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub train_predictions: Vec<(usize, Vec<f64>)>,
    pub test_predictions: Vec<(usize, Vec<f64>)>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub build_time_nanos: u64,
    pub test_time_nanos: u64,
}

impl FileEnsemble {
    /// Predicted label for a combined test row.
    pub fn predicted_test_label(&self, case: usize) -> usize {
        argmax_tie_low(&self.test_predictions[case].1)
    }

    /// Packages one split of the combined predictions as a writable result,
    /// so a recombined ensemble can be stored in the same format as its
    /// components.
    pub fn to_result(
        &self,
        classifier: &str,
        split: Split,
    ) -> Result<ClassifierResult, ResultsError> {
        let predictions = match split {
            Split::Train => self.train_predictions.clone(),
            Split::Test => self.test_predictions.clone(),
        };
        let parameters = format!(
            "alpha={},components={}",
            self.alpha,
            self.component_names.join("+")
        );
        ClassifierResult::new(
            &self.dataset,
            classifier,
            split,
            self.fold,
            &parameters,
            self.build_time_nanos,
            self.test_time_nanos,
            predictions,
        )
    }
}

struct ComponentFiles {
    train: ClassifierResult,
    test: ClassifierResult,
}

fn load_component_files(
    root: &Path,
    dataset: &str,
    fold: usize,
    component_names: &[&str],
) -> Result<Vec<ComponentFiles>, BuildError> {
    if component_names.is_empty() {
        return Err(BuildError::InvalidConfig(
            "at least one component name is required".into(),
        ));
    }
    let mut loaded = Vec::with_capacity(component_names.len());
    for name in component_names {
        let train = read_result(component_results_path(
            root,
            name,
            dataset,
            Split::Train,
            fold,
        ))?;
        let test = read_result(component_results_path(
            root,
            name,
            dataset,
            Split::Test,
            fold,
        ))?;
        loaded.push(ComponentFiles { train, test });
    }
    check_agreement(component_names, &loaded)?;
    Ok(loaded)
}

/// Every component must describe the same cases: equal row counts, equal
/// true-label sequences, and equal class counts across both splits.
fn check_agreement(names: &[&str], loaded: &[ComponentFiles]) -> Result<(), BuildError> {
    let first = &loaded[0];
    let classes = first.train.class_count();
    for (name, files) in names.iter().zip(loaded) {
        for (split, result, reference) in [
            ("train", &files.train, &first.train),
            ("test", &files.test, &first.test),
        ] {
            if result.class_count() != classes {
                return Err(BuildError::InvalidData(format!(
                    "component {} {} file has {} classes, expected {}",
                    name,
                    split,
                    result.class_count(),
                    classes
                )));
            }
            if result.case_count() != reference.case_count() {
                return Err(BuildError::InvalidData(format!(
                    "component {} {} file has {} cases, expected {}",
                    name,
                    split,
                    result.case_count(),
                    reference.case_count()
                )));
            }
            for (i, (row, ref_row)) in result.rows.iter().zip(&reference.rows).enumerate() {
                if row.true_label != ref_row.true_label {
                    return Err(BuildError::InvalidData(format!(
                        "component {} {} file disagrees on the true label of case {}",
                        name, split, i
                    )));
                }
            }
        }
    }
    Ok(())
}

fn combine_split(
    loaded: &[ComponentFiles],
    weights: &[f64],
    alpha: f64,
    split: Split,
) -> Result<Vec<(usize, Vec<f64>)>, BuildError> {
    let rows = match split {
        Split::Train => loaded[0].train.rows.len(),
        Split::Test => loaded[0].test.rows.len(),
    };
    let mut combined = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut per_component: Vec<Vec<f64>> = Vec::with_capacity(loaded.len());
        let mut true_label = 0;
        for files in loaded {
            let row = match split {
                Split::Train => &files.train.rows[i],
                Split::Test => &files.test.rows[i],
            };
            true_label = row.true_label;
            per_component.push(row.probabilities.clone());
        }
        combined.push((true_label, combine_probabilities(&per_component, weights, alpha)?));
    }
    Ok(combined)
}

fn accuracy_of(predictions: &[(usize, Vec<f64>)]) -> f64 {
    let correct = predictions
        .iter()
        .filter(|(label, probs)| argmax_tie_low(probs) == *label)
        .count();
    correct as f64 / predictions.len() as f64
}

/// Rebuilds the ensemble for one dataset fold from stored component results.
///
/// For each named component the `{split}Fold{fold}.csv` pair must exist under
/// the root. Weights are the train accuracies stored in the train files, and
/// both splits are recombined with the usual weighted vote at the given
/// `alpha`.
pub fn build_from_results_files(
    root: impl AsRef<Path>,
    dataset: &str,
    fold: usize,
    component_names: &[&str],
    alpha: f64,
) -> Result<FileEnsemble, BuildError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(BuildError::InvalidConfig(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    let loaded = load_component_files(root.as_ref(), dataset, fold, component_names)?;
    let weights: Vec<f64> = loaded.iter().map(|f| f.train.accuracy).collect();
    let train_predictions = combine_split(&loaded, &weights, alpha, Split::Train)?;
    let test_predictions = combine_split(&loaded, &weights, alpha, Split::Test)?;
    let train_accuracy = accuracy_of(&train_predictions);
    let test_accuracy = accuracy_of(&test_predictions);
    let build_time_nanos = loaded.iter().map(|f| f.test.build_time_nanos).sum();
    let test_time_nanos = loaded.iter().map(|f| f.test.test_time_nanos).sum();
    Ok(FileEnsemble {
        dataset: dataset.to_string(),
        fold,
        component_names: component_names.iter().map(|s| s.to_string()).collect(),
        weights,
        alpha,
        train_predictions,
        test_predictions,
        train_accuracy,
        test_accuracy,
        build_time_nanos,
        test_time_nanos,
    })
}

/// Picks the exponent from `candidates` that maximises the recombined train
/// accuracy, reading each component's files once. Ties go to the earliest
/// candidate, so listing candidates in ascending order prefers the smallest.
pub fn tune_alpha(
    root: impl AsRef<Path>,
    dataset: &str,
    fold: usize,
    component_names: &[&str],
    candidates: &[f64],
) -> Result<(f64, f64), BuildError> {
    if candidates.is_empty() {
        return Err(BuildError::InvalidConfig(
            "at least one alpha candidate is required".into(),
        ));
    }
    let loaded = load_component_files(root.as_ref(), dataset, fold, component_names)?;
    let weights: Vec<f64> = loaded.iter().map(|f| f.train.accuracy).collect();
    let mut best: Option<(f64, f64)> = None;
    for &alpha in candidates {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(BuildError::InvalidConfig(format!(
                "alpha must be finite and non-negative, got {alpha}"
            )));
        }
        let combined = combine_split(&loaded, &weights, alpha, Split::Train)?;
        let accuracy = accuracy_of(&combined);
        let better = match best {
            None => true,
            Some((_, best_acc)) => accuracy > best_acc,
        };
        if better {
            best = Some((alpha, accuracy));
        }
    }
    Ok(best.expect("candidates are non-empty"))
}
