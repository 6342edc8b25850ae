//! Rotation forest: an ensemble of deterministic trees, each built on the
//! full training set after rotating random attribute groups onto principal
//! components fitted to a class-and-bootstrap subsample.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::trees::{build_time_series_tree, FeatureMatrix, TreeNode};
use crate::util::stream_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationForestConfig {
    pub tree_count: usize,
    pub group_size: usize,
    /// Probability that a class is included in a group's PCA sample.
    pub class_subsample: f64,
    /// Fraction of the selected classes' cases drawn (with replacement) for
    /// the PCA sample.
    pub bootstrap_proportion: f64,
    /// Skip PCA entirely and rotate by the identity. Exists to let tests pin
    /// the degenerate behaviour; leave false for real use.
    pub identity_rotation: bool,
}

impl Default for RotationForestConfig {
    fn default() -> Self {
        Self {
            tree_count: 200,
            group_size: 3,
            class_subsample: 0.5,
            bootstrap_proportion: 0.75,
            identity_rotation: false,
        }
    }
}

/// One attribute group of a fitted rotation: `components[k]` holds the k-th
/// principal axis over `attributes`, so a rotated feature is the dot product
/// of a row's group values with one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RotationGroup {
    attributes: Vec<usize>,
    components: Vec<Vec<f64>>,
}

impl RotationGroup {
    fn identity(attributes: Vec<usize>) -> Self {
        let g = attributes.len();
        let mut components = vec![vec![0.0; g]; g];
        for (k, row) in components.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        Self {
            attributes,
            components,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RotationTree {
    groups: Vec<RotationGroup>,
    tree: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationForest {
    trees: Vec<RotationTree>,
    class_count: usize,
}

impl RotationForest {
    /// Fits `config.tree_count` trees. Tree `t` draws all of its randomness
    /// from generator stream `t` of `seed`, so forests are reproducible and
    /// insensitive to how many were built before.
    pub fn fit(data: &FeatureMatrix, config: &RotationForestConfig, seed: u64) -> RotationForest {
        assert!(config.tree_count >= 1, "need at least one tree");
        assert!(config.group_size >= 1, "need a positive group size");
        let mut trees = Vec::with_capacity(config.tree_count);
        for t in 0..config.tree_count {
            let mut rng = stream_rng(seed, t as u64);
            let groups = fit_rotation(data, config, &mut rng);
            let rotated = rotate_matrix(data, &groups);
            let tree = build_time_series_tree(&rotated);
            trees.push(RotationTree { groups, tree });
        }
        RotationForest {
            trees,
            class_count: data.class_count,
        }
    }

    /// Mean of the trees' leaf distributions, renormalized to sum to 1.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.class_count];
        let mut rotated = Vec::new();
        for t in &self.trees {
            rotate_row(row, &t.groups, &mut rotated);
            for (s, p) in sum.iter_mut().zip(t.tree.predict(&rotated)) {
                *s += p;
            }
        }
        let total: f64 = sum.iter().sum();
        if total > 0.0 {
            for s in &mut sum {
                *s /= total;
            }
        }
        sum
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

fn fit_rotation(
    data: &FeatureMatrix,
    config: &RotationForestConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<RotationGroup> {
    let d = data.attribute_count();
    let mut attrs: Vec<usize> = (0..d).collect();
    use rand::seq::SliceRandom;
    attrs.shuffle(rng);
    let mut groups = Vec::new();
    for chunk in attrs.chunks(config.group_size) {
        let attributes = chunk.to_vec();
        if config.identity_rotation {
            groups.push(RotationGroup::identity(attributes));
            continue;
        }
        let sample = pca_sample(data, config, rng);
        groups.push(fit_group(data, &attributes, &sample));
    }
    groups
}

/// Case indices for one group's PCA: each class joins with probability
/// `class_subsample` (at least one always does), then a bootstrap of
/// `bootstrap_proportion` of the selected cases is drawn with replacement.
fn pca_sample(
    data: &FeatureMatrix,
    config: &RotationForestConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    let c = data.class_count;
    let mut selected = vec![false; c];
    for s in selected.iter_mut() {
        *s = rng.gen_bool(config.class_subsample.clamp(0.0, 1.0));
    }
    if !selected.iter().any(|&s| s) {
        selected[rng.gen_range(0..c)] = true;
    }
    let members: Vec<usize> = (0..data.case_count())
        .filter(|&i| selected[data.labels[i]])
        .collect();
    if members.is_empty() {
        return (0..data.case_count()).collect();
    }
    let draw = ((members.len() as f64 * config.bootstrap_proportion).ceil() as usize).max(1);
    (0..draw)
        .map(|_| members[rng.gen_range(0..members.len())])
        .collect()
}

fn fit_group(data: &FeatureMatrix, attributes: &[usize], sample: &[usize]) -> RotationGroup {
    let g = attributes.len();
    let n = sample.len();
    // population covariance of the group columns over the sample
    let mut means = vec![0.0; g];
    for &i in sample {
        for (k, &a) in attributes.iter().enumerate() {
            means[k] += data.rows[i][a];
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(g, g);
    for &i in sample {
        for p in 0..g {
            let dp = data.rows[i][attributes[p]] - means[p];
            for q in p..g {
                let dq = data.rows[i][attributes[q]] - means[q];
                cov[(p, q)] += dp * dq;
            }
        }
    }
    for p in 0..g {
        for q in p..g {
            cov[(p, q)] /= n as f64;
            cov[(q, p)] = cov[(p, q)];
        }
    }
    let total_variance: f64 = (0..g).map(|k| cov[(k, k)]).sum();
    if !total_variance.is_finite() || total_variance <= 1e-12 {
        return RotationGroup::identity(attributes.to_vec());
    }
    let eigen = SymmetricEigen::new(cov);
    // order axes by decreasing eigenvalue and fix each axis's sign so the
    // largest-magnitude entry is positive; keeps rotations reproducible
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let mut components = Vec::with_capacity(g);
    for &k in &order {
        let col = eigen.eigenvectors.column(k);
        if col.iter().any(|v| !v.is_finite()) {
            return RotationGroup::identity(attributes.to_vec());
        }
        let mut axis: Vec<f64> = col.iter().copied().collect();
        let lead = (0..g).max_by(|&a, &b| axis[a].abs().total_cmp(&axis[b].abs())).unwrap();
        if axis[lead] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        components.push(axis);
    }
    RotationGroup {
        attributes: attributes.to_vec(),
        components,
    }
}

fn rotate_row(row: &[f64], groups: &[RotationGroup], out: &mut Vec<f64>) {
    out.clear();
    for group in groups {
        for axis in &group.components {
            let mut v = 0.0;
            for (w, &a) in axis.iter().zip(&group.attributes) {
                v += w * row[a];
            }
            out.push(v);
        }
    }
}

fn rotate_matrix(data: &FeatureMatrix, groups: &[RotationGroup]) -> FeatureMatrix {
    let mut rows = Vec::with_capacity(data.case_count());
    for row in &data.rows {
        let mut rotated = Vec::new();
        rotate_row(row, groups, &mut rotated);
        rows.push(rotated);
    }
    FeatureMatrix {
        rows,
        labels: data.labels.clone(),
        class_count: data.class_count,
    }
}
