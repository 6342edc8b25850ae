//! Decision trees over extracted feature rows: the deterministic
//! information-gain tree used by the interval forest, the random-subspace
//! variant used by the spectral forest, plus stratified cross-validation.
//!
//! Both trees share one split criterion: maximize information gain over
//! candidate thresholds placed at class-boundary midpoints of each attribute's
//! sorted values. Ties in gain prefer the larger separation margin (the gap
//! between the neighboring values), then the lowest attribute index. Pure and
//! unsplittable nodes become leaves holding the empirical class distribution.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::{argmax_tie_low, entropy_bits};

/// A rectangular feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Self {
        assert!(!rows.is_empty(), "feature matrix needs at least one row");
        assert_eq!(rows.len(), labels.len(), "one label per row");
        let d = rows[0].len();
        assert!(d >= 1, "feature matrix needs at least one attribute");
        assert!(
            rows.iter().all(|r| r.len() == d),
            "feature matrix must be rectangular"
        );
        assert!(class_count >= 1, "class count must be at least 1");
        assert!(
            labels.iter().all(|&l| l < class_count),
            "labels must be below the class count"
        );
        Self {
            rows,
            labels,
            class_count,
        }
    }

    pub fn case_count(&self) -> usize {
        self.rows.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.rows[0].len()
    }

    /// New matrix holding the given rows, in the given order.
    pub fn subset(&self, cases: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: cases.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: cases.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }
}

/// A binary decision tree node. At a split, rows with
/// `row[attribute] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        distribution: Vec<f64>,
    },
    Split {
        attribute: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Walks the tree and returns the leaf's class distribution.
    pub fn predict<'a>(&'a self, row: &[f64]) -> &'a [f64] {
        match self {
            TreeNode::Leaf { distribution } => distribution,
            TreeNode::Split {
                attribute,
                threshold,
                left,
                right,
            } => {
                if row[*attribute] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }

    /// Hard vote: the leaf distribution's argmax, lowest index on ties.
    pub fn vote(&self, row: &[f64]) -> usize {
        argmax_tie_low(self.predict(row))
    }

    #[cfg(test)]
    pub(crate) fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Builds the deterministic tree: every attribute is considered at every
/// node. Two builds on the same data produce the identical tree.
pub fn build_time_series_tree(data: &FeatureMatrix) -> TreeNode {
    let mut builder = TreeBuilder::new(data);
    let indices: Vec<u32> = (0..data.case_count() as u32).collect();
    builder.grow(&indices, &mut AttributeChoice::All)
}

/// Builds a tree that evaluates a fresh uniform random subset of
/// `attributes_per_split` attributes at every node. With
/// `attributes_per_split >= d` this reproduces [`build_time_series_tree`].
pub fn build_random_tree(
    data: &FeatureMatrix,
    attributes_per_split: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    assert!(attributes_per_split >= 1, "need at least one attribute per split");
    let d = data.attribute_count();
    let k = attributes_per_split.min(d);
    let mut builder = TreeBuilder::new(data);
    let indices: Vec<u32> = (0..data.case_count() as u32).collect();
    let mut choice = AttributeChoice::Random {
        k,
        pool: (0..d).collect(),
        rng,
    };
    builder.grow(&indices, &mut choice)
}

enum AttributeChoice<'r> {
    All,
    Random {
        k: usize,
        pool: Vec<usize>,
        rng: &'r mut ChaCha8Rng,
    },
}

impl AttributeChoice<'_> {
    /// Attributes to evaluate at one node, ascending so the lowest-index tie
    /// rule is independent of sampling order.
    fn pick(&mut self, d: usize, out: &mut Vec<usize>) {
        out.clear();
        match self {
            AttributeChoice::All => out.extend(0..d),
            AttributeChoice::Random { k, pool, rng } => {
                for j in 0..*k {
                    let swap = rng.gen_range(j..pool.len());
                    pool.swap(j, swap);
                }
                out.extend_from_slice(&pool[..*k]);
                out.sort_unstable();
            }
        }
    }
}

struct BestSplit {
    attribute: usize,
    threshold: f64,
    gain: f64,
    margin: f64,
}

struct TreeBuilder<'d> {
    data: &'d FeatureMatrix,
    // scratch buffers reused across nodes
    pairs: Vec<(f64, u32)>,
    left_counts: Vec<usize>,
    right_counts: Vec<usize>,
    attrs: Vec<usize>,
}

impl<'d> TreeBuilder<'d> {
    fn new(data: &'d FeatureMatrix) -> Self {
        Self {
            data,
            pairs: Vec::with_capacity(data.case_count()),
            left_counts: vec![0; data.class_count],
            right_counts: vec![0; data.class_count],
            attrs: Vec::with_capacity(data.attribute_count()),
        }
    }

    fn grow(&mut self, indices: &[u32], choice: &mut AttributeChoice) -> TreeNode {
        let c = self.data.class_count;
        let mut counts = vec![0usize; c];
        for &i in indices {
            counts[self.data.labels[i as usize]] += 1;
        }
        let n = indices.len();
        let pure = counts.iter().filter(|&&k| k > 0).count() <= 1;
        if pure {
            return leaf_from_counts(&counts, n);
        }
        let parent_entropy = entropy_bits(&counts, n);
        let mut attrs = std::mem::take(&mut self.attrs);
        choice.pick(self.data.attribute_count(), &mut attrs);
        let best = self.best_split(indices, &counts, parent_entropy, &attrs);
        self.attrs = attrs;
        let best = match best {
            Some(b) if b.gain > 0.0 => b,
            _ => return leaf_from_counts(&counts, n),
        };
        let mut left_idx = Vec::new();
        let mut right_idx = Vec::new();
        for &i in indices {
            if self.data.rows[i as usize][best.attribute] <= best.threshold {
                left_idx.push(i);
            } else {
                right_idx.push(i);
            }
        }
        debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
        let left = self.grow(&left_idx, choice);
        drop(left_idx);
        let right = self.grow(&right_idx, choice);
        TreeNode::Split {
            attribute: best.attribute,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split(
        &mut self,
        indices: &[u32],
        parent_counts: &[usize],
        parent_entropy: f64,
        attrs: &[usize],
    ) -> Option<BestSplit> {
        let n = indices.len();
        let c = self.data.class_count;
        let mut best: Option<BestSplit> = None;
        for &attr in attrs {
            self.pairs.clear();
            for &i in indices {
                self.pairs
                    .push((self.data.rows[i as usize][attr], self.data.labels[i as usize] as u32));
            }
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            self.left_counts.iter_mut().for_each(|k| *k = 0);
            self.right_counts.copy_from_slice(parent_counts);
            let mut left_total = 0usize;

            let mut run_start = 0usize;
            while run_start < n {
                let run_value = self.pairs[run_start].0;
                let mut run_end = run_start + 1;
                let first_label = self.pairs[run_start].1;
                let mut run_pure = true;
                while run_end < n && self.pairs[run_end].0 == run_value {
                    if self.pairs[run_end].1 != first_label {
                        run_pure = false;
                    }
                    run_end += 1;
                }
                // move the run to the left side
                for p in &self.pairs[run_start..run_end] {
                    self.left_counts[p.1 as usize] += 1;
                    self.right_counts[p.1 as usize] -= 1;
                }
                left_total += run_end - run_start;
                if run_end == n {
                    break;
                }
                let next_value = self.pairs[run_end].0;
                // class boundary: skip only when this run and the next are
                // both pure with the same class
                let next_pure_same = run_pure && {
                    let next_label = self.pairs[run_end].1;
                    next_label == first_label
                        && self.pairs[run_end..]
                            .iter()
                            .take_while(|p| p.0 == next_value)
                            .all(|p| p.1 == next_label)
                };
                if !next_pure_same {
                    let threshold = run_value + (next_value - run_value) / 2.0;
                    // guard against midpoint rounding onto the upper value
                    if threshold < next_value {
                        let right_total = n - left_total;
                        let gain = parent_entropy
                            - (left_total as f64 / n as f64)
                                * entropy_bits(&self.left_counts[..c], left_total)
                            - (right_total as f64 / n as f64)
                                * entropy_bits(&self.right_counts[..c], right_total);
                        let margin = next_value - run_value;
                        let better = match &best {
                            None => true,
                            Some(b) => {
                                gain > b.gain || (gain == b.gain && margin > b.margin)
                            }
                        };
                        if better {
                            best = Some(BestSplit {
                                attribute: attr,
                                threshold,
                                gain,
                                margin,
                            });
                        }
                    }
                }
                run_start = run_end;
            }
        }
        best
    }
}

fn leaf_from_counts(counts: &[usize], total: usize) -> TreeNode {
    TreeNode::Leaf {
        distribution: counts
            .iter()
            .map(|&k| k as f64 / total as f64)
            .collect(),
    }
}

/// Assigns each case to a fold, stratified by class: within a class the
/// shuffled members are dealt round-robin, and the deal position carries
/// across classes so small classes still spread as evenly as possible.
pub fn stratified_fold_indices(
    labels: &[usize],
    class_count: usize,
    folds: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    assert!(folds >= 2, "need at least two folds");
    assert!(labels.len() >= folds, "need at least one case per fold");
    let mut assignment = vec![0usize; labels.len()];
    let mut position = 0usize;
    for class in 0..class_count {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        use rand::seq::SliceRandom;
        members.shuffle(rng);
        for i in members {
            assignment[i] = position % folds;
            position += 1;
        }
    }
    assignment
}

/// Stratified k-fold cross-validation accuracy. `fit_predict` receives the
/// fold's training matrix and the held-out rows and returns one predicted
/// label per held-out row; the result is the overall proportion of correct
/// predictions.
pub fn cross_validated_accuracy<F>(
    data: &FeatureMatrix,
    folds: usize,
    rng: &mut ChaCha8Rng,
    mut fit_predict: F,
) -> f64
where
    F: FnMut(&FeatureMatrix, &[Vec<f64>]) -> Vec<usize>,
{
    let assignment = stratified_fold_indices(&data.labels, data.class_count, folds, rng);
    let mut correct = 0usize;
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..data.case_count())
            .filter(|&i| assignment[i] != fold)
            .collect();
        let test_idx: Vec<usize> = (0..data.case_count())
            .filter(|&i| assignment[i] == fold)
            .collect();
        if test_idx.is_empty() {
            continue;
        }
        let train = data.subset(&train_idx);
        let test_rows: Vec<Vec<f64>> = test_idx.iter().map(|&i| data.rows[i].clone()).collect();
        let predictions = fit_predict(&train, &test_rows);
        assert_eq!(predictions.len(), test_idx.len(), "one prediction per held-out row");
        for (p, &i) in predictions.iter().zip(&test_idx) {
            if *p == data.labels[i] {
                correct += 1;
            }
        }
    }
    correct as f64 / data.case_count() as f64
}
