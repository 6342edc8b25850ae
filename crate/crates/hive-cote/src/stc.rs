//! Shapelet transform classification: a time-boxed random search scores
//! candidate subsequences by how well their distance separates one class
//! from the rest, the best survivors become distance features, and a
//! rotation forest classifies the transformed data.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{z_normalize, z_normalize_into, LabeledSeriesSet};
use crate::error::BuildError;
use crate::rotation_forest::{RotationForest, RotationForestConfig};
use crate::trees::FeatureMatrix;
use crate::util::{entropy_bits, seed_mix, stream_rng};

/// A scored candidate subsequence. `order` is the discovery counter that
/// breaks quality ties, so earlier finds win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shapelet {
    /// The z-normalized subsequence.
    pub values: Vec<f64>,
    /// Source series index in the training set.
    pub series: usize,
    /// Start offset in the source series.
    pub start: usize,
    /// Separation quality in bits.
    pub quality: f64,
    /// The class the one-vs-all split targets (the source series' label).
    pub target_class: usize,
    pub order: u64,
}

impl Shapelet {
    pub fn length(&self) -> usize {
        self.values.len()
    }

    fn end(&self) -> usize {
        self.start + self.length() - 1
    }

    fn overlaps(&self, other: &Shapelet) -> bool {
        self.series == other.series && self.start <= other.end() && other.start <= self.end()
    }
}

/// Distance from a z-normalized shapelet to a series: the smallest
/// length-normalized squared Euclidean distance over all alignments, each
/// window z-normalized before comparison.
pub fn shapelet_distance(shapelet: &[f64], series: &[f64]) -> f64 {
    let len = shapelet.len();
    assert!(len <= series.len(), "shapelet longer than the series");
    let mut window = Vec::with_capacity(len);
    let mut best = f64::INFINITY;
    for start in 0..=series.len() - len {
        z_normalize_into(&series[start..start + len], &mut window);
        let mut sum = 0.0;
        for (s, w) in shapelet.iter().zip(&window) {
            let d = s - w;
            sum += d * d;
        }
        let dist = sum / len as f64;
        if dist < best {
            best = dist;
        }
    }
    best
}

/// Best one-vs-all split of the distances: candidate thresholds are the
/// midpoints between consecutive distinct values, quality is the reduction
/// in entropy (bits), and equal-quality splits resolve to the lowest
/// threshold. Needs both a positive and a negative case.
pub fn information_gain(distances: &[f64], is_target: &[bool]) -> Result<(f64, f64), BuildError> {
    assert_eq!(distances.len(), is_target.len());
    let n = distances.len();
    let positives = is_target.iter().filter(|&&t| t).count();
    if positives == 0 || positives == n {
        return Err(BuildError::InvalidData(
            "information gain needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let parent = entropy_bits(&[positives, n - positives], n);
    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0usize;
    let mut left_n = 0usize;
    let mut i = 0;
    while i < n {
        // absorb the run of equal values ending at i
        let value = distances[order[i]];
        while i < n && distances[order[i]] == value {
            if is_target[order[i]] {
                left_pos += 1;
            }
            left_n += 1;
            i += 1;
        }
        if i == n {
            break;
        }
        let threshold = (value + distances[order[i]]) / 2.0;
        let right_n = n - left_n;
        let right_pos = positives - left_pos;
        let gain = parent
            - (left_n as f64 / n as f64) * entropy_bits(&[left_pos, left_n - left_pos], left_n)
            - (right_n as f64 / n as f64)
                * entropy_bits(&[right_pos, right_n - right_pos], right_n);
        if best.map_or(true, |(bg, _)| gain > bg) {
            best = Some((gain, threshold));
        }
    }
    // all distances equal: no split point exists, quality zero at the value
    Ok(best.unwrap_or((0.0, distances[0])))
}

/// Drops candidates that overlap a better one from the same series: sorted
/// best-first, a candidate survives only if it overlaps nothing already
/// kept.
pub fn remove_self_similar(mut candidates: Vec<Shapelet>) -> Vec<Shapelet> {
    sort_best_first(&mut candidates);
    let mut kept: Vec<Shapelet> = Vec::new();
    for candidate in candidates {
        if !kept.iter().any(|k| k.overlaps(&candidate)) {
            kept.push(candidate);
        }
    }
    kept
}

/// Merges a round's survivors into the pool, keeping the `capacity` best by
/// quality (discovery order breaks ties).
pub fn merge_pool(pool: &mut Vec<Shapelet>, new: Vec<Shapelet>, capacity: usize) {
    pool.extend(new);
    sort_best_first(pool);
    pool.truncate(capacity);
}

fn sort_best_first(shapelets: &mut [Shapelet]) {
    shapelets.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then_with(|| a.order.cmp(&b.order))
    });
}

/// How many (series, length, start) candidates exist in total.
pub fn candidate_space_size(case_count: usize, series_length: usize, min_length: usize) -> usize {
    if min_length > series_length {
        return 0;
    }
    let per_series: usize = (min_length..=series_length)
        .map(|len| series_length - len + 1)
        .sum();
    case_count * per_series
}

/// Running mean of per-candidate evaluation time, used to size search
/// rounds when no explicit schedule is given.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ShapeletTiming {
    total_seconds: f64,
    evaluations: u64,
}

impl ShapeletTiming {
    pub fn record(&mut self, seconds: f64, evaluations: u64) {
        self.total_seconds += seconds.max(0.0);
        self.evaluations += evaluations;
    }

    pub fn mean_seconds(&self) -> Option<f64> {
        (self.evaluations > 0).then(|| self.total_seconds / self.evaluations as f64)
    }

    /// Candidates for the next round: a 100-candidate probe first, then as
    /// many as the remaining time should allow, clamped to [1, 10000].
    pub fn next_budget(&self, remaining_seconds: f64) -> usize {
        match self.mean_seconds() {
            None => 100,
            Some(mean) if mean <= 0.0 => 10_000,
            Some(mean) => (remaining_seconds / mean).floor().clamp(1.0, 10_000.0) as usize,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StcConfig {
    /// Pool capacity.
    pub max_shapelets: usize,
    /// Wall-clock budget for the candidate search.
    pub search_time: Duration,
    pub min_shapelet_length: usize,
    pub seed: u64,
    /// Fixed per-round candidate counts; overrides the timed search and
    /// makes runs exactly reproducible.
    pub budget_schedule: Option<Vec<usize>>,
    pub rotation: RotationForestConfig,
}

impl Default for StcConfig {
    fn default() -> Self {
        Self {
            max_shapelets: 1000,
            search_time: Duration::from_secs(3600),
            min_shapelet_length: 3,
            seed: 0,
            budget_schedule: None,
            rotation: RotationForestConfig::default(),
        }
    }
}

/// Search state; one [`StcBuild::search_step`] call runs one round from its
/// own generator stream, so an interrupted search resumes exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StcBuild {
    pub round: usize,
    pub next_order: u64,
    pub pool: Vec<Shapelet>,
    pub search_done: bool,
    /// Search seconds spent so far, accumulated across resumes.
    pub elapsed_seconds: f64,
    pub timing: ShapeletTiming,
}

impl StcBuild {
    pub fn new() -> Self {
        Self {
            round: 0,
            next_order: 0,
            pool: Vec::new(),
            search_done: false,
            elapsed_seconds: 0.0,
            timing: ShapeletTiming::default(),
        }
    }

    /// Runs one search round. Returns false when the search is finished and
    /// no round was run.
    pub fn search_step(
        &mut self,
        train: &LabeledSeriesSet,
        config: &StcConfig,
    ) -> Result<bool, BuildError> {
        validate(train, config)?;
        if self.search_done {
            return Ok(false);
        }
        let budget = match &config.budget_schedule {
            Some(schedule) => {
                if self.round >= schedule.len() {
                    self.search_done = true;
                    return Ok(false);
                }
                schedule[self.round]
            }
            None => {
                let remaining = config.search_time.as_secs_f64() - self.elapsed_seconds;
                if remaining <= 0.0 {
                    self.search_done = true;
                    return Ok(false);
                }
                self.timing.next_budget(remaining)
            }
        };
        let clock = Instant::now();
        let mut rng = stream_rng(config.seed, self.round as u64);
        let (candidates, exhausted) =
            self.sample_and_evaluate(train, config.min_shapelet_length, budget, &mut rng);
        let evaluated = candidates.len() as u64;
        let survivors = remove_self_similar(candidates);
        merge_pool(&mut self.pool, survivors, config.max_shapelets);
        let seconds = clock.elapsed().as_secs_f64();
        self.timing.record(seconds, evaluated);
        self.elapsed_seconds += seconds;
        self.round += 1;
        if exhausted {
            // every candidate was scored; more rounds cannot add anything
            self.search_done = true;
        }
        Ok(true)
    }

    /// Scores `budget` candidates. A budget that covers the whole candidate
    /// space switches to exhaustive enumeration in (series, length, start)
    /// order; otherwise candidates are drawn uniformly, series first, then
    /// length, then start.
    fn sample_and_evaluate(
        &mut self,
        train: &LabeledSeriesSet,
        min_length: usize,
        budget: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<Shapelet>, bool) {
        let n = train.case_count();
        let m = train.series_length();
        let space = candidate_space_size(n, m, min_length);
        let mut candidates = Vec::new();
        if budget >= space {
            for series in 0..n {
                for length in min_length..=m {
                    for start in 0..=m - length {
                        candidates.push(self.evaluate(train, series, start, length));
                    }
                }
            }
            (candidates, true)
        } else {
            for _ in 0..budget {
                let series = rng.gen_range(0..n);
                let length = rng.gen_range(min_length..=m);
                let start = rng.gen_range(0..=m - length);
                candidates.push(self.evaluate(train, series, start, length));
            }
            (candidates, false)
        }
    }

    fn evaluate(
        &mut self,
        train: &LabeledSeriesSet,
        series: usize,
        start: usize,
        length: usize,
    ) -> Shapelet {
        let values = z_normalize(&train.series(series)[start..start + length]);
        let target_class = train.label(series);
        let distances: Vec<f64> = (0..train.case_count())
            .map(|i| shapelet_distance(&values, train.series(i)))
            .collect();
        let is_target: Vec<bool> = train.labels().iter().map(|&l| l == target_class).collect();
        let (quality, _) = information_gain(&distances, &is_target)
            .expect("training data was validated to hold every class");
        let order = self.next_order;
        self.next_order += 1;
        Shapelet {
            values,
            series,
            start,
            quality,
            target_class,
            order,
        }
    }

    /// Distance features of the training set under the current pool.
    pub fn transform_matrix(&self, train: &LabeledSeriesSet) -> FeatureMatrix {
        transform_set(&self.pool, train)
    }

    /// Fits the rotation forest on the transformed data.
    pub fn finish(self, train: &LabeledSeriesSet, config: &StcConfig) -> Result<StcModel, BuildError> {
        if self.pool.is_empty() {
            return Err(BuildError::InvalidData(
                "the shapelet search kept no candidates".into(),
            ));
        }
        let matrix = self.transform_matrix(train);
        self.finish_with_matrix(&matrix, train, config)
    }

    /// Like [`StcBuild::finish`] but reuses an already-computed transform of
    /// the training set.
    pub fn finish_with_matrix(
        self,
        matrix: &FeatureMatrix,
        train: &LabeledSeriesSet,
        config: &StcConfig,
    ) -> Result<StcModel, BuildError> {
        if self.pool.is_empty() {
            return Err(BuildError::InvalidData(
                "the shapelet search kept no candidates".into(),
            ));
        }
        let forest = RotationForest::fit(matrix, &config.rotation, forest_seed(config.seed));
        Ok(StcModel {
            shapelets: self.pool,
            forest,
            class_count: train.class_count(),
            series_length: train.series_length(),
        })
    }
}

impl Default for StcBuild {
    fn default() -> Self {
        Self::new()
    }
}

fn forest_seed(seed: u64) -> u64 {
    seed_mix(seed, 1_000_003)
}

fn validate(train: &LabeledSeriesSet, config: &StcConfig) -> Result<(), BuildError> {
    if config.max_shapelets == 0 {
        return Err(BuildError::InvalidConfig("pool capacity must be positive".into()));
    }
    if config.min_shapelet_length < 2 || config.min_shapelet_length > train.series_length() {
        return Err(BuildError::InvalidConfig(format!(
            "minimum shapelet length {} outside [2, {}]",
            config.min_shapelet_length,
            train.series_length()
        )));
    }
    if train.class_count() < 2 {
        return Err(BuildError::InvalidData("need at least two classes".into()));
    }
    let counts = train.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(BuildError::InvalidData(format!(
            "class {missing} has no training cases"
        )));
    }
    Ok(())
}

/// Distance features of a whole set: one row per case, one column per
/// shapelet.
pub fn transform_set(shapelets: &[Shapelet], set: &LabeledSeriesSet) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = (0..set.case_count())
        .map(|i| transform_series(shapelets, set.series(i)))
        .collect();
    FeatureMatrix::new(rows, set.labels().to_vec(), set.class_count())
}

pub fn transform_series(shapelets: &[Shapelet], series: &[f64]) -> Vec<f64> {
    shapelets
        .iter()
        .map(|s| shapelet_distance(&s.values, series))
        .collect()
}

pub fn build_stc(train: &LabeledSeriesSet, config: &StcConfig) -> Result<StcModel, BuildError> {
    let mut build = StcBuild::new();
    while build.search_step(train, config)? {}
    build.finish(train, config)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StcModel {
    pub shapelets: Vec<Shapelet>,
    forest: RotationForest,
    class_count: usize,
    series_length: usize,
}

impl StcModel {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, BuildError> {
        if series.len() != self.series_length {
            return Err(BuildError::LengthMismatch {
                expected: self.series_length,
                found: series.len(),
            });
        }
        let row = transform_series(&self.shapelets, series);
        Ok(self.forest.predict_proba(&row))
    }
}
