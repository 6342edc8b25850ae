//! Random interval spectral ensemble: random trees built on power spectrum
//! and autocorrelation features of one random interval per tree. The first
//! tree always sees the whole series; later trees draw power-of-two interval
//! lengths, capped by a timing model when a build contract is set.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::data::LabeledSeriesSet;
use crate::error::BuildError;
use crate::trees::{build_random_tree, FeatureMatrix, TreeNode};
use crate::tsf::Interval;
use crate::util::stream_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiseConfig {
    pub tree_count: usize,
    /// Smallest interval length; `None` means min(16, m/2), floored at 2.
    pub min_interval_length: Option<usize>,
    /// Autocorrelation features are computed for lags 1..=min(this, r-1).
    pub max_acf_lags: usize,
    pub seed: u64,
    /// Wall-clock build budget. Checked between trees; the timing model also
    /// uses it to cap the interval lengths of later trees.
    pub contract: Option<Duration>,
}

impl Default for RiseConfig {
    fn default() -> Self {
        Self {
            tree_count: 500,
            min_interval_length: None,
            max_acf_lags: 100,
            seed: 0,
            contract: None,
        }
    }
}

fn min_interval_length(config: &RiseConfig, m: usize) -> usize {
    let p = config
        .min_interval_length
        .unwrap_or_else(|| 16.min(m / 2).max(2));
    p.min(m).max(2)
}

/// Power spectrum then autocorrelation features of one segment of length r:
/// `PS_1..=PS_{r/2}` are squared magnitudes of the unnormalized DFT (the DC
/// coefficient is excluded), `ACF_1..=ACF_L` with `L = min(max_lags, r-1)`
/// divides lagged products of deviations by the lag-0 sum of squares. A
/// zero-variance segment has all-zero autocorrelations.
pub fn spectral_features(segment: &[f64], max_lags: usize) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(segment.len());
    let mut extractor = SpectralExtractor {
        fft,
        max_lags,
        buffer: Vec::new(),
    };
    extractor.extract(segment)
}

/// Number of features [`spectral_features`] produces for a segment length.
pub fn spectral_feature_count(r: usize, max_lags: usize) -> usize {
    r / 2 + max_lags.min(r - 1)
}

struct SpectralExtractor {
    fft: Arc<dyn Fft<f64>>,
    max_lags: usize,
    buffer: Vec<Complex<f64>>,
}

impl SpectralExtractor {
    fn extract(&mut self, segment: &[f64]) -> Vec<f64> {
        let r = segment.len();
        assert!(r >= 2, "spectral features need at least two points");
        assert_eq!(self.fft.len(), r, "extractor planned for a different length");
        let mut out = Vec::with_capacity(spectral_feature_count(r, self.max_lags));

        self.buffer.clear();
        self.buffer
            .extend(segment.iter().map(|&v| Complex::new(v, 0.0)));
        self.fft.process(&mut self.buffer);
        for j in 1..=r / 2 {
            out.push(self.buffer[j].norm_sqr());
        }

        let mean = segment.iter().sum::<f64>() / r as f64;
        let denom: f64 = segment.iter().map(|v| (v - mean) * (v - mean)).sum();
        let lags = self.max_lags.min(r - 1);
        if denom <= 1e-12 {
            out.extend(std::iter::repeat(0.0).take(lags));
        } else {
            for lag in 1..=lags {
                let mut num = 0.0;
                for t in 0..r - lag {
                    num += (segment[t] - mean) * (segment[t + lag] - mean);
                }
                out.push(num / denom);
            }
        }
        out
    }
}

/// Least-squares model of per-tree build seconds against r*ln(r), fitted to
/// the (interval length, seconds) pairs observed so far. With fewer than two
/// observations it predicts zero cost, which disables the interval cap. The
/// fitted slope is floored at zero so predictions never decrease with length.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TimingModel {
    observations: Vec<(usize, f64)>,
}

impl TimingModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, interval_length: usize, seconds: f64) {
        self.observations.push((interval_length, seconds));
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    /// Predicted build seconds for an interval length.
    pub fn predict_seconds(&self, interval_length: usize) -> f64 {
        if self.observations.len() < 2 {
            return 0.0;
        }
        let x = |r: usize| {
            let r = r as f64;
            r * r.ln()
        };
        let n = self.observations.len() as f64;
        let mean_x = self.observations.iter().map(|&(r, _)| x(r)).sum::<f64>() / n;
        let mean_y = self.observations.iter().map(|&(_, s)| s).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for &(r, s) in &self.observations {
            let dx = x(r) - mean_x;
            num += dx * (s - mean_y);
            den += dx * dx;
        }
        let slope = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        let intercept = mean_y - slope * mean_x;
        (intercept + slope * x(interval_length)).max(0.0)
    }
}

/// Picks the interval for one tree. Tree 0 takes the whole series. Later
/// trees draw a uniformly random power-of-two length between the minimum and
/// the largest length the timing model deems affordable within the per-tree
/// budget (no budget or an untrained model means no cap), falling back to
/// the minimum length when no power of two is affordable. The start is
/// uniform over the valid range.
pub fn choose_interval(
    tree_index: usize,
    m: usize,
    p: usize,
    timing: &TimingModel,
    per_tree_budget: Option<Duration>,
    rng: &mut ChaCha8Rng,
) -> Interval {
    assert!(m >= 2 && p >= 2 && p <= m);
    if tree_index == 0 {
        return Interval::new(0, m - 1);
    }
    let affordable = |len: usize| match per_tree_budget {
        Some(budget) => timing.predict_seconds(len) <= budget.as_secs_f64(),
        None => true,
    };
    let mut candidates = Vec::new();
    let mut len = 1usize;
    while len < p {
        len *= 2;
    }
    while len <= m {
        if affordable(len) {
            candidates.push(len);
        }
        len *= 2;
    }
    let length = if candidates.is_empty() {
        p
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    };
    let start = rng.gen_range(0..=m - length);
    Interval::new(start, start + length - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiseTree {
    pub interval: Interval,
    pub node: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiseModel {
    trees: Vec<RiseTree>,
    max_acf_lags: usize,
    series_length: usize,
    class_count: usize,
}

/// Incremental build state; one call to [`RiseBuild::build_next`] adds one
/// tree from that tree's own generator stream and records its cost in the
/// timing model.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RiseBuild {
    pub trees: Vec<RiseTree>,
    pub timing: TimingModel,
}

impl RiseBuild {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_complete(&self, config: &RiseConfig) -> bool {
        self.trees.len() >= config.tree_count
    }

    pub fn build_next(
        &mut self,
        train: &LabeledSeriesSet,
        config: &RiseConfig,
        remaining: Option<Duration>,
    ) {
        let m = train.series_length();
        let p = min_interval_length(config, m);
        let tree_index = self.trees.len();
        let trees_left = config.tree_count - tree_index;
        let per_tree_budget = remaining.map(|r| r / trees_left.max(1) as u32);
        let mut rng = stream_rng(config.seed, tree_index as u64);
        let interval = choose_interval(tree_index, m, p, &self.timing, per_tree_budget, &mut rng);

        let started = Instant::now();
        let mut planner = FftPlanner::new();
        let mut extractor = SpectralExtractor {
            fft: planner.plan_fft_forward(interval.len()),
            max_lags: config.max_acf_lags,
            buffer: Vec::new(),
        };
        let rows: Vec<Vec<f64>> = (0..train.case_count())
            .map(|i| extractor.extract(interval.values(train.series(i))))
            .collect();
        let matrix = FeatureMatrix::new(rows, train.labels().to_vec(), train.class_count());
        let attrs = ((matrix.attribute_count() as f64).sqrt().floor() as usize).max(1);
        let node = build_random_tree(&matrix, attrs, &mut rng);
        self.timing
            .record(interval.len(), started.elapsed().as_secs_f64());
        self.trees.push(RiseTree { interval, node });
    }

    pub fn finish(self, train: &LabeledSeriesSet, config: &RiseConfig) -> RiseModel {
        RiseModel {
            trees: self.trees,
            max_acf_lags: config.max_acf_lags,
            series_length: train.series_length(),
            class_count: train.class_count(),
        }
    }
}

fn validate(train: &LabeledSeriesSet, config: &RiseConfig) -> Result<(), BuildError> {
    if config.tree_count == 0 {
        return Err(BuildError::InvalidConfig("tree count must be positive".into()));
    }
    if config.max_acf_lags == 0 {
        return Err(BuildError::InvalidConfig("need at least one lag".into()));
    }
    if train.series_length() < 2 {
        return Err(BuildError::InvalidData(
            "spectral features need series of length at least 2".into(),
        ));
    }
    if let Some(p) = config.min_interval_length {
        if p < 2 || p > train.series_length() {
            return Err(BuildError::InvalidConfig(format!(
                "minimum interval length {} outside [2, {}]",
                p,
                train.series_length()
            )));
        }
    }
    Ok(())
}

/// Builds the ensemble, honoring the contract if one is set.
pub fn build_rise(train: &LabeledSeriesSet, config: &RiseConfig) -> Result<RiseModel, BuildError> {
    validate(train, config)?;
    let clock = Instant::now();
    let mut build = RiseBuild::new();
    while !build.is_complete(config) {
        let remaining = match config.contract {
            Some(limit) => {
                let elapsed = clock.elapsed();
                if !build.trees.is_empty() && elapsed >= limit {
                    break;
                }
                Some(limit.saturating_sub(elapsed))
            }
            None => None,
        };
        build.build_next(train, config, remaining);
    }
    Ok(build.finish(train, config))
}

impl RiseModel {
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
        let mut planner = FftPlanner::new();
        for t in &self.trees {
            let mut extractor = SpectralExtractor {
                fft: planner.plan_fft_forward(t.interval.len()),
                max_lags: self.max_acf_lags,
                buffer: Vec::new(),
            };
            let row = extractor.extract(t.interval.values(series));
            votes[t.node.vote(&row)] += 1.0;
        }
        let n = self.trees.len() as f64;
        for v in &mut votes {
            *v /= n;
        }
        Ok(votes)
    }
}
