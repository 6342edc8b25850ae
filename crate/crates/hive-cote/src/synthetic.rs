//! Seeded synthetic dataset generators. Each family plants a different kind
//! of class structure (interval statistics, spectral content, pattern
//! frequency, local shape) so a classifier's affinity for one structure can
//! be exercised in isolation. Labels are known by construction and classes
//! alternate case by case, so any prefix is close to balanced.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledSeriesSet;
use crate::util::stream_rng;

fn noise(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    let v: f64 = StandardNormal.sample(rng);
    v * scale
}

/// Class is the sign of the mean over positions 10..=20: class 1 cases have
/// that window shifted so its mean is +0.5, class 0 cases -0.5, with unit
/// noise everywhere. Requires `length > 20`.
pub fn interval_mean_dataset(cases: usize, length: usize, seed: u64) -> LabeledSeriesSet {
    assert!(length > 20, "the labeled window spans positions 10..=20");
    let mut rng = stream_rng(seed, 0);
    let mut series = Vec::with_capacity(cases);
    let mut labels = Vec::with_capacity(cases);
    for case in 0..cases {
        let label = case % 2;
        let target = if label == 1 { 0.5 } else { -0.5 };
        let mut s: Vec<f64> = (0..length).map(|_| noise(&mut rng, 1.0)).collect();
        let window = &s[10..=20];
        let current = window.iter().sum::<f64>() / window.len() as f64;
        for v in &mut s[10..=20] {
            *v += target - current;
        }
        series.push(s);
        labels.push(label);
    }
    LabeledSeriesSet::new(series, labels, 2).unwrap()
}

/// Class 0 is a sine at 3 cycles per series, class 1 at 7 cycles, each with
/// a random phase and mild additive noise. Spectral or autocorrelation
/// features separate the classes; pointwise statistics do not.
pub fn two_frequency_dataset(cases: usize, length: usize, seed: u64) -> LabeledSeriesSet {
    let mut rng = stream_rng(seed, 0);
    let mut series = Vec::with_capacity(cases);
    let mut labels = Vec::with_capacity(cases);
    for case in 0..cases {
        let label = case % 2;
        let cycles = if label == 0 { 3.0 } else { 7.0 };
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s: Vec<f64> = (0..length)
            .map(|t| {
                let angle = std::f64::consts::TAU * cycles * t as f64 / length as f64 + phase;
                angle.sin() + noise(&mut rng, 0.2)
            })
            .collect();
        series.push(s);
        labels.push(label);
    }
    LabeledSeriesSet::new(series, labels, 2).unwrap()
}

/// Both classes embed the same length-8 burst; they differ in how often it
/// occurs (twice versus six times), so histograms of local patterns separate
/// them while any single location is uninformative. Requires `length >= 64`.
pub fn pattern_frequency_dataset(cases: usize, length: usize, seed: u64) -> LabeledSeriesSet {
    assert!(length >= 64, "need room for six non-overlapping bursts");
    let mut rng = stream_rng(seed, 0);
    let burst: Vec<f64> = (0..8)
        .map(|t| 3.0 * (std::f64::consts::TAU * t as f64 / 8.0).sin())
        .collect();
    let slots = length / 8;
    let mut series = Vec::with_capacity(cases);
    let mut labels = Vec::with_capacity(cases);
    for case in 0..cases {
        let label = case % 2;
        let occurrences = if label == 0 { 2 } else { 6 };
        let mut s: Vec<f64> = (0..length).map(|_| noise(&mut rng, 0.3)).collect();
        // choose distinct slot positions so bursts never overlap
        let mut chosen: Vec<usize> = (0..slots).collect();
        use rand::seq::SliceRandom;
        chosen.shuffle(&mut rng);
        for &slot in chosen.iter().take(occurrences) {
            for (t, b) in burst.iter().enumerate() {
                s[slot * 8 + t] += b;
            }
        }
        series.push(s);
        labels.push(label);
    }
    LabeledSeriesSet::new(series, labels, 2).unwrap()
}

/// The length-7 pattern planted by [`planted_shapelet_dataset`] for class 1
/// (class 0 gets its negation). Exposed so tests can check that discovered
/// shapelets land on it.
pub fn planted_pattern() -> Vec<f64> {
    vec![0.0, 1.5, 3.0, 0.0, -3.0, -1.5, 0.0]
}

/// Each case hides one short pattern at a random position in noise: class 1
/// gets an up-down spike, class 0 its mirror image. The pattern's location
/// carries no information; only its shape does. Returns the position used
/// for each case alongside the set via [`planted_shapelet_dataset_with_positions`].
pub fn planted_shapelet_dataset(cases: usize, length: usize, seed: u64) -> LabeledSeriesSet {
    planted_shapelet_dataset_with_positions(cases, length, seed).0
}

pub fn planted_shapelet_dataset_with_positions(
    cases: usize,
    length: usize,
    seed: u64,
) -> (LabeledSeriesSet, Vec<usize>) {
    let pattern = planted_pattern();
    assert!(length >= pattern.len() + 4, "series too short for the pattern");
    let mut rng = stream_rng(seed, 0);
    let mut series = Vec::with_capacity(cases);
    let mut labels = Vec::with_capacity(cases);
    let mut positions = Vec::with_capacity(cases);
    for case in 0..cases {
        let label = case % 2;
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let mut s: Vec<f64> = (0..length).map(|_| noise(&mut rng, 0.3)).collect();
        let at = rng.gen_range(0..=length - pattern.len());
        for (t, p) in pattern.iter().enumerate() {
            s[at + t] += sign * p;
        }
        series.push(s);
        labels.push(label);
        positions.push(at);
    }
    (
        LabeledSeriesSet::new(series, labels, 2).unwrap(),
        positions,
    )
}
