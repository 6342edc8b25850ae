//! Dictionary classification: windows are symbolized through a truncated
//! Fourier approximation and equi-depth breakpoints, series become word
//! histograms, and a 1-NN classifier under the asymmetric histogram distance
//! does the prediction. The contractable ensemble samples window parameters,
//! scores each member by leave-one-out accuracy on its own subsample, and
//! keeps the best by accuracy-to-the-fourth weighted replacement.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{z_normalize_into, LabeledSeriesSet};
use crate::error::BuildError;
use crate::util::stream_rng;

/// One member's transform parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BossParams {
    pub window_length: usize,
    pub word_length: usize,
    pub alphabet_size: usize,
    /// Z-normalize each window before the transform; also drops the first
    /// Fourier coefficient in favour of the next one.
    pub normalise: bool,
}

impl BossParams {
    fn validate(&self, m: usize) -> Result<(), BuildError> {
        let err = |msg: String| Err(BuildError::InvalidConfig(msg));
        if self.word_length < 2 || self.word_length % 2 != 0 {
            return err(format!("word length {} must be even and >= 2", self.word_length));
        }
        if self.alphabet_size < 2 {
            return err(format!("alphabet size {} must be >= 2", self.alphabet_size));
        }
        if self.window_length < 2 || self.window_length > m {
            return err(format!(
                "window length {} outside [2, {m}]",
                self.window_length
            ));
        }
        if self.word_length > self.window_length {
            return err(format!(
                "word length {} exceeds window length {}",
                self.word_length, self.window_length
            ));
        }
        Ok(())
    }
}

/// Interleaved (re, im) pairs of `l/2` consecutive unnormalized Fourier
/// coefficients of the window, starting at coefficient 1 when `normalised`
/// (the mean-carrying coefficient 0 is useless after z-normalization) and at
/// coefficient 0 otherwise. The window itself is used as given.
pub fn truncated_dft(window: &[f64], word_length: usize, normalised: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(word_length);
    truncated_dft_into(window, word_length, normalised, &mut out);
    out
}

fn truncated_dft_into(window: &[f64], word_length: usize, normalised: bool, out: &mut Vec<f64>) {
    let w = window.len();
    let half = word_length / 2;
    let start = usize::from(normalised);
    assert!(
        half + start <= w / 2 + 1,
        "word length {word_length} needs more coefficients than a window of {w} provides"
    );
    out.clear();
    for k in start..start + half {
        let mut re = 0.0;
        let mut im = 0.0;
        for (t, &v) in window.iter().enumerate() {
            let angle = -std::f64::consts::TAU * k as f64 * t as f64 / w as f64;
            re += v * angle.cos();
            im += v * angle.sin();
        }
        out.push(re);
        out.push(im);
    }
}

/// Equi-depth breakpoints: the a-1 interior quantiles (linear interpolation
/// between order statistics) of one coefficient slot's training values.
pub fn equi_depth_breakpoints(values: &[f64], alphabet_size: usize) -> Vec<f64> {
    assert!(!values.is_empty(), "need at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    (1..alphabet_size)
        .map(|i| {
            let h = (n - 1) as f64 * i as f64 / alphabet_size as f64;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 < n {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            }
        })
        .collect()
}

/// Per-slot breakpoints fitted on every training window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McbBreakpoints {
    /// `rows[slot]` holds a-1 non-decreasing thresholds.
    pub rows: Vec<Vec<f64>>,
}

/// Fits the breakpoints: every window of every training series is
/// transformed (with per-window normalization when the parameters say so)
/// and each coefficient slot's values are cut at equi-depth quantiles.
pub fn fit_mcb(train: &LabeledSeriesSet, params: &BossParams) -> Result<McbBreakpoints, BuildError> {
    params.validate(train.series_length())?;
    let w = params.window_length;
    let l = params.word_length;
    let mut slot_values: Vec<Vec<f64>> = vec![Vec::new(); l];
    let mut window_buf = Vec::new();
    let mut dft_buf = Vec::new();
    for case in 0..train.case_count() {
        let series = train.series(case);
        for start in 0..=series.len() - w {
            transform_window(&series[start..start + w], params, &mut window_buf, &mut dft_buf);
            for (slot, &v) in dft_buf.iter().enumerate() {
                slot_values[slot].push(v);
            }
        }
    }
    let rows = slot_values
        .iter()
        .map(|values| equi_depth_breakpoints(values, params.alphabet_size))
        .collect();
    Ok(McbBreakpoints { rows })
}

fn transform_window(
    window: &[f64],
    params: &BossParams,
    window_buf: &mut Vec<f64>,
    dft_buf: &mut Vec<f64>,
) {
    if params.normalise {
        z_normalize_into(window, window_buf);
        truncated_dft_into(window_buf, params.word_length, true, dft_buf);
    } else {
        truncated_dft_into(window, params.word_length, false, dft_buf);
    }
}

/// Symbol for one coefficient value: the count of breakpoints at or below
/// it, so a value equal to a breakpoint takes the higher symbol.
pub fn symbol(value: f64, breakpoints: &[f64]) -> u8 {
    breakpoints.iter().filter(|&&b| b <= value).count() as u8
}

/// A word histogram. Counts are exact, so distances are exact integers and
/// independent of iteration order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BagOfWords {
    counts: HashMap<Vec<u8>, u32>,
}

impl BagOfWords {
    pub fn word_count(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, word: &[u8]) -> u32 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Builds a bag directly from word/count pairs.
    pub fn from_pairs(pairs: &[(&[u8], u32)]) -> Self {
        let mut counts = HashMap::new();
        for (w, c) in pairs {
            counts.insert(w.to_vec(), *c);
        }
        Self { counts }
    }

    /// The distinct words and their counts, in arbitrary order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u8], u32)> {
        self.counts.iter().map(|(w, c)| (w.as_slice(), *c))
    }
}

/// Slides every window over the series, symbolizes it, and counts words
/// under numerosity reduction: a window only counts when its word differs
/// from the previous window's word; the first window always counts.
pub fn series_to_bag(
    series: &[f64],
    params: &BossParams,
    breakpoints: &McbBreakpoints,
) -> BagOfWords {
    let w = params.window_length;
    let mut bag = BagOfWords::default();
    let mut window_buf = Vec::new();
    let mut dft_buf = Vec::new();
    let mut previous: Option<Vec<u8>> = None;
    for start in 0..=series.len() - w {
        transform_window(&series[start..start + w], params, &mut window_buf, &mut dft_buf);
        let word: Vec<u8> = dft_buf
            .iter()
            .zip(&breakpoints.rows)
            .map(|(&v, row)| symbol(v, row))
            .collect();
        if previous.as_ref() != Some(&word) {
            *bag.counts.entry(word.clone()).or_insert(0) += 1;
            previous = Some(word);
        }
    }
    bag
}

/// The asymmetric histogram distance: squared count differences summed over
/// the words present in the query only.
pub fn boss_distance(query: &BagOfWords, reference: &BagOfWords) -> f64 {
    let mut total: u64 = 0;
    for (word, &q) in &query.counts {
        let r = reference.get(word);
        let diff = q as i64 - r as i64;
        total += (diff * diff) as u64;
    }
    total as f64
}

/// One fitted transform plus the training bags: a 1-NN classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseBoss {
    pub params: BossParams,
    pub breakpoints: McbBreakpoints,
    bags: Vec<BagOfWords>,
    labels: Vec<usize>,
    class_count: usize,
}

impl BaseBoss {
    pub fn fit(train: &LabeledSeriesSet, params: BossParams) -> Result<BaseBoss, BuildError> {
        let breakpoints = fit_mcb(train, &params)?;
        let bags: Vec<BagOfWords> = (0..train.case_count())
            .map(|i| series_to_bag(train.series(i), &params, &breakpoints))
            .collect();
        Ok(BaseBoss {
            params,
            breakpoints,
            bags,
            labels: train.labels().to_vec(),
            class_count: train.class_count(),
        })
    }

    pub fn case_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bag(&self, case: usize) -> &BagOfWords {
        &self.bags[case]
    }

    /// Label of the nearest training bag; distance ties go to the lowest
    /// training index. `skip` excludes one training case (leave-one-out).
    pub fn predict_bag(&self, query: &BagOfWords, skip: Option<usize>) -> usize {
        let mut best: Option<(f64, usize)> = None;
        for (i, bag) in self.bags.iter().enumerate() {
            if skip == Some(i) {
                continue;
            }
            let d = boss_distance(query, bag);
            match best {
                Some((bd, _)) if d >= bd => {}
                _ => best = Some((d, i)),
            }
        }
        match best {
            Some((_, i)) => self.labels[i],
            // a single-case training set with that case excluded has no
            // neighbour; fall back to the only label it knows
            None => self.labels[0],
        }
    }

    pub fn predict_series(&self, series: &[f64]) -> usize {
        let bag = series_to_bag(series, &self.params, &self.breakpoints);
        self.predict_bag(&bag, None)
    }

    /// Leave-one-out accuracy over the training bags, never matching a case
    /// to itself.
    pub fn loo_accuracy(&self) -> f64 {
        if self.bags.len() < 2 {
            return 0.0;
        }
        let correct = (0..self.bags.len())
            .filter(|&i| self.predict_bag(&self.bags[i], Some(i)) == self.labels[i])
            .count();
        correct as f64 / self.bags.len() as f64
    }
}

/// Fixed-capacity member pool with strict-improvement replacement: fill to
/// capacity first, then a new member only displaces the current minimum when
/// strictly more accurate. With equal minima the earliest one goes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberPool<T> {
    capacity: usize,
    members: Vec<(T, f64)>,
}

impl<T> MemberPool<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "pool capacity must be positive");
        Self {
            capacity,
            members: Vec::new(),
        }
    }

    /// Offers a member; returns whether it was retained.
    pub fn offer(&mut self, member: T, accuracy: f64) -> bool {
        if self.members.len() < self.capacity {
            self.members.push((member, accuracy));
            return true;
        }
        let mut min_idx = 0;
        for i in 1..self.members.len() {
            if self.members[i].1 < self.members[min_idx].1 {
                min_idx = i;
            }
        }
        if accuracy > self.members[min_idx].1 {
            self.members[min_idx] = (member, accuracy);
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.members.iter().map(|(_, a)| *a).collect()
    }

    pub fn into_members(self) -> Vec<(T, f64)> {
        self.members
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CBossConfig {
    pub max_ensemble_size: usize,
    pub parameter_samples: usize,
    pub subsample_proportion: f64,
    pub seed: u64,
    /// Wall-clock build budget, checked between parameter samples; the
    /// sample in flight when it expires is kept.
    pub contract: Option<Duration>,
}

impl Default for CBossConfig {
    fn default() -> Self {
        Self {
            max_ensemble_size: 50,
            parameter_samples: 250,
            subsample_proportion: 0.7,
            seed: 0,
            contract: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CBossMember {
    pub base: BaseBoss,
    /// Indices into the full training set, ascending.
    pub subsample: Vec<usize>,
    pub accuracy: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CBossModel {
    members: Vec<CBossMember>,
    class_count: usize,
    series_length: usize,
}

/// Incremental build state; one call to [`CBossBuild::build_next`] evaluates
/// one parameter sample from its own generator stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CBossBuild {
    pub next_sample: usize,
    pub pool: MemberPool<CBossMember>,
}

impl CBossBuild {
    pub fn new(config: &CBossConfig) -> Self {
        Self {
            next_sample: 0,
            pool: MemberPool::new(config.max_ensemble_size),
        }
    }

    /// All valid parameter combinations: window lengths 10..=m crossed with
    /// word lengths {16, 14, 12, 10, 8} that fit the window, with and
    /// without normalization.
    pub fn parameter_space(m: usize) -> Vec<BossParams> {
        let mut space = Vec::new();
        for window_length in 10..=m {
            for &word_length in &[16usize, 14, 12, 10, 8] {
                if word_length > window_length {
                    continue;
                }
                for normalise in [false, true] {
                    space.push(BossParams {
                        window_length,
                        word_length,
                        alphabet_size: 4,
                        normalise,
                    });
                }
            }
        }
        space
    }

    /// The sampling order: the parameter space shuffled by the seed. Samples
    /// are drawn without replacement by walking this order.
    pub fn sample_order(config: &CBossConfig, m: usize) -> Vec<BossParams> {
        let mut space = Self::parameter_space(m);
        use rand::seq::SliceRandom;
        space.shuffle(&mut stream_rng(config.seed, 0));
        space
    }

    pub fn total_samples(config: &CBossConfig, m: usize) -> usize {
        Self::parameter_space(m).len().min(config.parameter_samples)
    }

    pub fn is_complete(&self, config: &CBossConfig, m: usize) -> bool {
        self.next_sample >= Self::total_samples(config, m)
    }

    pub fn build_next(
        &mut self,
        train: &LabeledSeriesSet,
        config: &CBossConfig,
    ) -> Result<(), BuildError> {
        let order = Self::sample_order(config, train.series_length());
        let params = order[self.next_sample];
        let mut rng = stream_rng(config.seed, 1 + self.next_sample as u64);
        let subsample = stratified_subsample(
            train.labels(),
            train.class_count(),
            config.subsample_proportion,
            &mut rng,
        );
        let subset = train.subset(&subsample);
        let base = BaseBoss::fit(&subset, params)?;
        let accuracy = base.loo_accuracy();
        let member = CBossMember {
            base,
            subsample,
            accuracy,
            weight: accuracy.powi(4),
        };
        self.pool.offer(member, accuracy);
        self.next_sample += 1;
        Ok(())
    }

    pub fn finish(self, train: &LabeledSeriesSet) -> CBossModel {
        CBossModel {
            members: self.pool.into_members().into_iter().map(|(m, _)| m).collect(),
            class_count: train.class_count(),
            series_length: train.series_length(),
        }
    }
}

/// Stratified subsample without replacement: within each class a fraction
/// `proportion` of the members (rounded up, so every class stays
/// represented). Returned ascending.
fn stratified_subsample(
    labels: &[usize],
    class_count: usize,
    proportion: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut picked = Vec::new();
    for class in 0..class_count {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        let keep = ((members.len() as f64 * proportion).ceil() as usize)
            .clamp(1, members.len());
        for j in 0..keep {
            let swap = rng.gen_range(j..members.len());
            members.swap(j, swap);
        }
        picked.extend_from_slice(&members[..keep]);
    }
    picked.sort_unstable();
    picked
}

fn validate(train: &LabeledSeriesSet, config: &CBossConfig) -> Result<(), BuildError> {
    if config.max_ensemble_size == 0 {
        return Err(BuildError::InvalidConfig("ensemble size must be positive".into()));
    }
    if config.parameter_samples == 0 {
        return Err(BuildError::InvalidConfig("need at least one parameter sample".into()));
    }
    if !(0.0 < config.subsample_proportion && config.subsample_proportion <= 1.0) {
        return Err(BuildError::InvalidConfig(format!(
            "subsample proportion {} outside (0, 1]",
            config.subsample_proportion
        )));
    }
    if train.series_length() < 10 {
        return Err(BuildError::InvalidData(format!(
            "series length {} is below the smallest window length 10",
            train.series_length()
        )));
    }
    Ok(())
}

/// Builds the contractable ensemble, honoring the contract if one is set.
pub fn build_cboss(train: &LabeledSeriesSet, config: &CBossConfig) -> Result<CBossModel, BuildError> {
    validate(train, config)?;
    let clock = Instant::now();
    let mut build = CBossBuild::new(config);
    while !build.is_complete(config, train.series_length()) {
        if let Some(limit) = config.contract {
            if build.next_sample > 0 && clock.elapsed() >= limit {
                break;
            }
        }
        build.build_next(train, config)?;
    }
    Ok(build.finish(train))
}

impl CBossModel {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[CBossMember] {
        &self.members
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    /// Weight-normalized member votes; a degenerate ensemble whose weights
    /// are all zero answers uniformly.
    pub fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, BuildError> {
        if series.len() != self.series_length {
            return Err(BuildError::LengthMismatch {
                expected: self.series_length,
                found: series.len(),
            });
        }
        let mut scores = vec![0.0; self.class_count];
        for member in &self.members {
            let label = member.base.predict_series(series);
            scores[label] += member.weight;
        }
        Ok(normalize_or_uniform(scores))
    }

    /// Train-set probability estimates for ensemble weighting: members that
    /// hold a case in their subsample vote with their leave-one-out
    /// prediction for it, others vote with an ordinary nearest-neighbour
    /// prediction, and votes combine by member weight.
    pub fn train_probabilities(&self, train: &LabeledSeriesSet) -> Vec<Vec<f64>> {
        (0..train.case_count())
            .map(|i| {
                let mut scores = vec![0.0; self.class_count];
                for member in &self.members {
                    let label = match member.subsample.binary_search(&i) {
                        Ok(pos) => member.base.predict_bag(member.base.bag(pos), Some(pos)),
                        Err(_) => member.base.predict_series(train.series(i)),
                    };
                    scores[label] += member.weight;
                }
                normalize_or_uniform(scores)
            })
            .collect()
    }
}

fn normalize_or_uniform(mut scores: Vec<f64>) -> Vec<f64> {
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        for s in &mut scores {
            *s /= total;
        }
    } else {
        let c = scores.len() as f64;
        for s in &mut scores {
            *s = 1.0 / c;
        }
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::argmax_tie_low;

    #[test]
    fn truncated_dft_of_a_constant_window_keeps_only_the_mean_coefficient() {
        let coeffs = truncated_dft(&[1.0, 1.0, 1.0, 1.0], 4, false);
        let expected = [4.0, 0.0, 0.0, 0.0];
        for (a, b) in coeffs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{coeffs:?}");
        }
    }

    #[test]
    fn normalised_transform_starts_at_the_second_coefficient() {
        let coeffs = truncated_dft(&[0.0, 1.0, 0.0, -1.0], 2, true);
        assert!((coeffs[0] - 0.0).abs() < 1e-9);
        assert!((coeffs[1] - (-2.0)).abs() < 1e-9, "{coeffs:?}");
    }

    #[test]
    fn truncated_dft_matches_a_naive_oracle_on_random_windows() {
        let mut rng = stream_rng(17, 0);
        for _ in 0..50 {
            let w = rng.gen_range(8..=32);
            let window: Vec<f64> = (0..w).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for normalised in [false, true] {
                let l = 8;
                let got = truncated_dft(&window, l, normalised);
                // independent oracle: textbook DFT sums per coefficient
                let start = usize::from(normalised);
                for (pair, k) in (start..start + l / 2).enumerate() {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (t, &v) in window.iter().enumerate() {
                        let angle = -std::f64::consts::TAU * (k * t) as f64 / w as f64;
                        re += v * angle.cos();
                        im += v * angle.sin();
                    }
                    assert!((got[2 * pair] - re).abs() < 1e-9);
                    assert!((got[2 * pair + 1] - im).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn word_length_longer_than_the_window_supports_is_rejected() {
        let train = LabeledSeriesSet::new(
            vec![vec![0.0; 12], vec![1.0; 12]],
            vec![0, 1],
            2,
        )
        .unwrap();
        let params = BossParams {
            window_length: 10,
            word_length: 16,
            alphabet_size: 4,
            normalise: false,
        };
        assert!(matches!(
            BaseBoss::fit(&train, params),
            Err(BuildError::InvalidConfig(_))
        ));
    }

    #[test]
    fn equi_depth_breakpoints_match_the_quantile_oracle() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let got = equi_depth_breakpoints(&values, 4);
        let expected = [25.75, 50.5, 75.25];
        for (a, b) in got.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{got:?}");
        }
        let median = equi_depth_breakpoints(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(median, vec![2.5]);
    }

    #[test]
    fn degenerate_slot_collapses_all_breakpoints() {
        let got = equi_depth_breakpoints(&[3.0; 40], 4);
        assert_eq!(got, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn symbols_count_breakpoints_at_or_below_the_value() {
        let row = [1.0, 2.0, 3.0];
        assert_eq!(symbol(0.5, &row), 0);
        assert_eq!(symbol(1.5, &row), 1);
        assert_eq!(symbol(2.5, &row), 2);
        assert_eq!(symbol(9.0, &row), 3);
        // a value on a breakpoint takes the higher symbol
        assert_eq!(symbol(2.0, &row), 2);
    }

    fn tiny_params() -> BossParams {
        BossParams {
            window_length: 3,
            word_length: 2,
            alphabet_size: 4,
            normalise: false,
        }
    }

    #[test]
    fn distinct_windows_all_count() {
        let train =
            LabeledSeriesSet::new(vec![vec![1.0, 5.0, 2.0, 8.0, 3.0, 9.0]], vec![0], 1).unwrap();
        let params = tiny_params();
        let breakpoints = fit_mcb(&train, &params).unwrap();
        let bag = series_to_bag(train.series(0), &params, &breakpoints);
        // four windows in a length-6 series with window 3
        assert_eq!(bag.word_count(), 4);
    }

    #[test]
    fn numerosity_reduction_collapses_repeated_words() {
        let train = LabeledSeriesSet::new(vec![vec![2.0; 8]], vec![0], 1).unwrap();
        let params = tiny_params();
        let breakpoints = fit_mcb(&train, &params).unwrap();
        let bag = series_to_bag(train.series(0), &params, &breakpoints);
        assert_eq!(bag.word_count(), 1);
        assert_eq!(bag.distinct_words(), 1);
    }

    #[test]
    fn distance_counts_only_the_query_support() {
        let q = BagOfWords::from_pairs(&[(b"a", 2), (b"b", 1)]);
        let r = BagOfWords::from_pairs(&[(b"a", 4)]);
        assert_eq!(boss_distance(&q, &r), 5.0);
        assert_eq!(boss_distance(&q, &q), 0.0);
    }

    #[test]
    fn distance_is_asymmetric() {
        let b1 = BagOfWords::from_pairs(&[(b"x", 1), (b"y", 1)]);
        let b2 = BagOfWords::from_pairs(&[(b"x", 2), (b"z", 3)]);
        assert_eq!(boss_distance(&b1, &b2), 2.0);
        assert_eq!(boss_distance(&b2, &b1), 10.0);
    }

    #[test]
    fn nearest_bag_wins_and_ties_go_to_the_lowest_index() {
        let train = LabeledSeriesSet::new(
            vec![
                vec![1.0, 2.0, 3.0, 4.0, 8.0, 1.0],
                vec![9.0, 1.0, 9.0, 1.0, 9.0, 1.0],
            ],
            vec![0, 1],
            2,
        )
        .unwrap();
        let params = tiny_params();
        let base = BaseBoss::fit(&train, params).unwrap();
        // querying with case 1's own bag returns case 1's label
        assert_eq!(base.predict_bag(base.bag(1), None), 1);
        assert_eq!(base.predict_series(train.series(1)), 1);
        // equidistant query (empty bag) resolves to the lowest index
        assert_eq!(base.predict_bag(&BagOfWords::default(), None), 0);
    }

    #[test]
    fn pool_replacement_keeps_the_best_members() {
        let mut pool = MemberPool::new(2);
        for (i, acc) in [0.5, 0.6, 0.7, 0.4].into_iter().enumerate() {
            pool.offer(i, acc);
            assert!(pool.len() <= 2);
        }
        let mut accs = pool.accuracies();
        accs.sort_by(f64::total_cmp);
        assert_eq!(accs, vec![0.6, 0.7]);
    }

    #[test]
    fn pool_requires_strict_improvement() {
        let mut pool = MemberPool::new(2);
        pool.offer(0, 0.5);
        pool.offer(1, 0.6);
        assert!(!pool.offer(2, 0.5), "equal accuracy must not displace");
        let mut accs = pool.accuracies();
        accs.sort_by(f64::total_cmp);
        assert_eq!(accs, vec![0.5, 0.6]);
    }

    #[test]
    fn parameter_space_respects_window_and_word_bounds() {
        let space = CBossBuild::parameter_space(12);
        assert!(!space.is_empty());
        for p in &space {
            assert!(p.window_length >= 10 && p.window_length <= 12);
            assert!([16, 14, 12, 10, 8].contains(&p.word_length));
            assert!(p.word_length <= p.window_length);
            assert_eq!(p.alphabet_size, 4);
        }
        // small spaces are used exhaustively
        let config = CBossConfig::default();
        assert_eq!(CBossBuild::total_samples(&config, 12), space.len());
    }

    fn dictionary_train(seed: u64) -> LabeledSeriesSet {
        crate::synthetic::pattern_frequency_dataset(30, 64, seed)
    }

    #[test]
    fn cboss_is_deterministic_and_respects_the_size_cap() {
        let train = dictionary_train(3);
        let config = CBossConfig {
            max_ensemble_size: 5,
            parameter_samples: 12,
            seed: 21,
            ..CBossConfig::default()
        };
        let a = build_cboss(&train, &config).unwrap();
        let b = build_cboss(&train, &config).unwrap();
        assert_eq!(a.member_count(), b.member_count());
        assert!(a.member_count() <= 5);
        let pa = a.predict_proba(train.series(0)).unwrap();
        let pb = b.predict_proba(train.series(0)).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn weights_are_fourth_power_of_accuracy() {
        let train = dictionary_train(5);
        let config = CBossConfig {
            max_ensemble_size: 4,
            parameter_samples: 6,
            seed: 2,
            ..CBossConfig::default()
        };
        let model = build_cboss(&train, &config).unwrap();
        for member in model.members() {
            assert!((member.weight - member.accuracy.powi(4)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_member_vote_matches_hand_arithmetic() {
        // accuracies 0.5 and 0.2 give weights 0.0625 and 0.0016; when they
        // disagree the normalized scores are 0.0625/0.0641 and 0.0016/0.0641
        let w1 = 0.5f64.powi(4);
        let w2 = 0.2f64.powi(4);
        let scores = normalize_or_uniform(vec![w1, w2]);
        assert!((scores[0] - w1 / (w1 + w2)).abs() < 1e-12);
        assert!((scores[0] - 0.975).abs() < 1e-3);
        assert!((scores[1] - 0.025).abs() < 1e-3);
    }

    #[test]
    fn all_zero_weights_give_a_uniform_answer() {
        assert_eq!(normalize_or_uniform(vec![0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn train_probabilities_cover_every_case_and_sum_to_one() {
        let train = dictionary_train(7);
        let config = CBossConfig {
            max_ensemble_size: 4,
            parameter_samples: 8,
            seed: 9,
            ..CBossConfig::default()
        };
        let model = build_cboss(&train, &config).unwrap();
        let probs = model.train_probabilities(&train);
        assert_eq!(probs.len(), train.case_count());
        for p in &probs {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn separates_pattern_frequencies() {
        let train = crate::synthetic::pattern_frequency_dataset(50, 64, 11);
        let test = crate::synthetic::pattern_frequency_dataset(50, 64, 12);
        let config = CBossConfig {
            max_ensemble_size: 10,
            parameter_samples: 30,
            seed: 13,
            ..CBossConfig::default()
        };
        let model = build_cboss(&train, &config).unwrap();
        let mut correct = 0;
        for i in 0..test.case_count() {
            let p = model.predict_proba(test.series(i)).unwrap();
            if argmax_tie_low(&p) == test.label(i) {
                correct += 1;
            }
        }
        assert!(correct >= 42, "got {correct}/50");
    }

    #[test]
    fn contract_stops_early_but_keeps_at_least_one_member() {
        let train = dictionary_train(15);
        let config = CBossConfig {
            parameter_samples: 100_000,
            seed: 4,
            contract: Some(Duration::from_millis(200)),
            ..CBossConfig::default()
        };
        let clock = Instant::now();
        let model = build_cboss(&train, &config).unwrap();
        assert!(model.member_count() >= 1);
        assert!(clock.elapsed() < Duration::from_secs(10));
    }
}
