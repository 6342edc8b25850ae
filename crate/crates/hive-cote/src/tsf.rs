//! Time series forest: an ensemble of deterministic trees, each built on
//! summary features (mean, standard deviation, slope) of randomly located
//! intervals.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledSeriesSet;
use crate::error::BuildError;
use crate::trees::{build_time_series_tree, FeatureMatrix, TreeNode};
use crate::util::stream_rng;

/// A contiguous index range of a series, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "interval start must not exceed its end");
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values<'a>(&self, series: &'a [f64]) -> &'a [f64] {
        &series[self.start..=self.end]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TsfConfig {
    pub tree_count: usize,
    pub min_interval_length: usize,
    /// Intervals per tree; `None` means the square root of the series length
    /// (rounded down, at least 1).
    pub intervals_per_tree: Option<usize>,
    pub seed: u64,
    /// Wall-clock build budget. Checked between trees: the tree in flight
    /// when it expires is kept, and at least one tree is always built.
    pub contract: Option<Duration>,
}

impl Default for TsfConfig {
    fn default() -> Self {
        Self {
            tree_count: 500,
            min_interval_length: 3,
            intervals_per_tree: None,
            seed: 0,
            contract: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsfTree {
    pub intervals: Vec<Interval>,
    pub node: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsfModel {
    trees: Vec<TsfTree>,
    series_length: usize,
    class_count: usize,
}

/// Draws one interval: start uniform on [0, m-p], then end uniform on
/// [start+p-1, m-1], so every interval has length at least p. Series no
/// longer than p yield the single full-series interval.
pub fn sample_interval(m: usize, p: usize, rng: &mut ChaCha8Rng) -> Interval {
    assert!(m >= 1 && p >= 1);
    if m <= p {
        return Interval::new(0, m - 1);
    }
    let start = rng.gen_range(0..=m - p);
    let end = rng.gen_range(start + p - 1..=m - 1);
    Interval::new(start, end)
}

/// Summary features of one interval: mean, population standard deviation,
/// and the least-squares slope against positions 0..len-1. Length-1
/// intervals have zero deviation and zero slope.
pub fn interval_features(series: &[f64], interval: Interval) -> (f64, f64, f64) {
    let values = interval.values(series);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let t_mean = (values.len() - 1) as f64 / 2.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in values.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (v - mean);
        den += dt * dt;
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    (mean, std, slope)
}

fn intervals_per_tree(config: &TsfConfig, m: usize) -> usize {
    config
        .intervals_per_tree
        .unwrap_or_else(|| ((m as f64).sqrt().floor() as usize).max(1))
}

/// Incremental build state: one call to [`TsfBuild::build_next`] adds one
/// tree, drawing all randomness from that tree's own generator stream.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct TsfBuild {
    pub trees: Vec<TsfTree>,
}

impl TsfBuild {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_complete(&self, config: &TsfConfig) -> bool {
        self.trees.len() >= config.tree_count
    }

    pub fn build_next(&mut self, train: &LabeledSeriesSet, config: &TsfConfig) {
        let m = train.series_length();
        let r = intervals_per_tree(config, m);
        let tree_index = self.trees.len() as u64;
        let mut rng = stream_rng(config.seed, tree_index);
        let intervals: Vec<Interval> = (0..r)
            .map(|_| sample_interval(m, config.min_interval_length, &mut rng))
            .collect();
        let rows: Vec<Vec<f64>> = (0..train.case_count())
            .map(|i| feature_row(train.series(i), &intervals))
            .collect();
        let matrix = FeatureMatrix::new(rows, train.labels().to_vec(), train.class_count());
        let node = build_time_series_tree(&matrix);
        self.trees.push(TsfTree { intervals, node });
    }

    pub fn finish(self, train: &LabeledSeriesSet) -> TsfModel {
        TsfModel {
            trees: self.trees,
            series_length: train.series_length(),
            class_count: train.class_count(),
        }
    }
}

fn feature_row(series: &[f64], intervals: &[Interval]) -> Vec<f64> {
    let mut row = Vec::with_capacity(3 * intervals.len());
    for &iv in intervals {
        let (mean, std, slope) = interval_features(series, iv);
        row.push(mean);
        row.push(std);
        row.push(slope);
    }
    row
}

fn validate(train: &LabeledSeriesSet, config: &TsfConfig) -> Result<(), BuildError> {
    if config.tree_count == 0 {
        return Err(BuildError::InvalidConfig("tree count must be positive".into()));
    }
    if config.min_interval_length < 1 {
        return Err(BuildError::InvalidConfig(
            "minimum interval length must be positive".into(),
        ));
    }
    if train.series_length() < 1 {
        return Err(BuildError::InvalidData("series length must be positive".into()));
    }
    Ok(())
}

/// Builds the forest, honoring the contract if one is set.
pub fn build_tsf(train: &LabeledSeriesSet, config: &TsfConfig) -> Result<TsfModel, BuildError> {
    validate(train, config)?;
    let clock = Instant::now();
    let mut build = TsfBuild::new();
    while !build.is_complete(config) {
        if let Some(limit) = config.contract {
            if !build.trees.is_empty() && clock.elapsed() >= limit {
                break;
            }
        }
        build.build_next(train, config);
    }
    Ok(build.finish(train))
}

impl TsfModel {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Per-class fraction of tree votes.
    pub fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, BuildError> {
        if series.len() != self.series_length {
            return Err(BuildError::LengthMismatch {
                expected: self.series_length,
                found: series.len(),
            });
        }
        let mut votes = vec![0.0; self.class_count];
        for t in &self.trees {
            let row = feature_row(series, &t.intervals);
            votes[t.node.vote(&row)] += 1.0;
        }
        let n = self.trees.len() as f64;
        for v in &mut votes {
            *v /= n;
        }
        Ok(votes)
    }
}
