//! End-to-end acceptance checks. Each test guards one externally visible
//! guarantee of the toolkit and is named after it, so the harness emits one
//! pass/fail line per guarantee. The tests serialize themselves through a
//! shared lock: several check wall-clock budgets, and those numbers are only
//! meaningful when nothing else is competing for the machine.

use std::sync::{Mutex, MutexGuard, OnceLock, PoisonError};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

use hive_cote::boss::{boss_distance, truncated_dft, BagOfWords, CBossConfig, MemberPool};
use hive_cote::checkpoint::{load_builder, save_builder};
use hive_cote::data::LabeledSeriesSet;
use hive_cote::ensemble::{
    build_component, combine_probabilities, weighted_scores, ComponentConfig, HiveCote,
    HiveCoteBuilder, HiveCoteConfig,
};
use hive_cote::from_file::build_from_results_files;
use hive_cote::results::{read_result, write_result, ClassifierResult, Split};
use hive_cote::rise::RiseConfig;
use hive_cote::rotation_forest::RotationForestConfig;
use hive_cote::stc::{
    candidate_space_size, information_gain, shapelet_distance, StcBuild, StcConfig,
};
use hive_cote::synthetic::{
    interval_mean_dataset, pattern_frequency_dataset, planted_shapelet_dataset,
    two_frequency_dataset,
};
use hive_cote::tsf::TsfConfig;
use hive_cote::util::argmax_tie_low;

fn serial() -> MutexGuard<'static, ()> {
    static GATE: Mutex<()> = Mutex::new(());
    GATE.lock().unwrap_or_else(PoisonError::into_inner)
}

fn accuracy(probs: &[Vec<f64>], labels: &[usize]) -> f64 {
    let correct = probs
        .iter()
        .zip(labels)
        .filter(|(p, &l)| argmax_tie_low(p) == l)
        .count();
    correct as f64 / labels.len() as f64
}

// ---------------------------------------------------------------------------
// 1. The truncated spectral transform matches an independent naive DFT.
// ---------------------------------------------------------------------------

/// Naive DFT over the requested coefficient range, accumulating the phasor
/// by complex rotation instead of evaluating cos/sin per term, so the
/// arithmetic path differs from the implementation under test.
fn oracle_dft(window: &[f64], word_length: usize, normalised: bool) -> Vec<f64> {
    let w = window.len() as f64;
    let half = word_length / 2;
    let start = usize::from(normalised);
    let mut out = Vec::with_capacity(word_length);
    for k in start..start + half {
        let step = -std::f64::consts::TAU * k as f64 / w;
        let (sin_step, cos_step) = step.sin_cos();
        let (mut phasor_re, mut phasor_im) = (1.0f64, 0.0f64);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for &v in window {
            re += v * phasor_re;
            im += v * phasor_im;
            let next_re = phasor_re * cos_step - phasor_im * sin_step;
            phasor_im = phasor_re * sin_step + phasor_im * cos_step;
            phasor_re = next_re;
        }
        out.push(re);
        out.push(im);
    }
    out
}

#[test]
fn criterion_01_truncated_transform_matches_a_naive_dft() {
    let _guard = serial();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC01);
    let mut max_err = 0.0f64;
    for _ in 0..1000 {
        let w = rng.gen_range(4..=256);
        let window: Vec<f64> = (0..w).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let max_half = (w / 2).min(16).max(1);
        let word_length = 2 * rng.gen_range(1..=max_half);
        let normalised = rng.gen_bool(0.5);
        let got = truncated_dft(&window, word_length, normalised);
        let want = oracle_dft(&window, word_length, normalised);
        assert_eq!(got.len(), want.len());
        for (g, o) in got.iter().zip(&want) {
            let err = (g - o).abs();
            max_err = max_err.max(err);
            assert!(
                err <= 1e-9,
                "window length {w}, word length {word_length}, normalised {normalised}: \
                 coefficient off by {err:e}"
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "oracle comparison took {elapsed:.1}s");
    println!("transform oracle: PASS (1000 windows, max error {max_err:.2e}, {elapsed:.2}s)");
}

// ---------------------------------------------------------------------------
// 2. The split quality matches exhaustive threshold enumeration.
// ---------------------------------------------------------------------------

fn oracle_entropy(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for count in [pos, n - pos] {
        if count > 0 {
            let p = count as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}

/// Enumerates every midpoint between consecutive distinct values and scores
/// the partition directly.
fn oracle_best_split(distances: &[f64], is_target: &[bool]) -> (f64, f64) {
    let n = distances.len();
    let mut distinct: Vec<f64> = distances.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let positives = is_target.iter().filter(|&&t| t).count();
    let parent = oracle_entropy(positives, n);
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_threshold = distances[0];
    if distinct.len() == 1 {
        return (0.0, distances[0]);
    }
    for pair in distinct.windows(2) {
        let threshold = (pair[0] + pair[1]) / 2.0;
        let mut left_n = 0;
        let mut left_pos = 0;
        for (d, &t) in distances.iter().zip(is_target) {
            if *d <= threshold {
                left_n += 1;
                if t {
                    left_pos += 1;
                }
            }
        }
        let right_n = n - left_n;
        let right_pos = positives - left_pos;
        let gain = parent
            - (left_n as f64 / n as f64) * oracle_entropy(left_pos, left_n)
            - (right_n as f64 / n as f64) * oracle_entropy(right_pos, right_n);
        if gain > best_gain {
            best_gain = gain;
            best_threshold = threshold;
        }
    }
    (best_gain, best_threshold)
}

#[test]
fn criterion_02_split_quality_matches_exhaustive_enumeration() {
    let _guard = serial();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC02);
    let mut checked = 0usize;
    while checked < 12_000 {
        let n = rng.gen_range(2..=12);
        // half the instances use a coarse grid so ties and repeated values
        // are common; the rest are continuous
        let gridded = rng.gen_bool(0.5);
        let distances: Vec<f64> = (0..n)
            .map(|_| {
                if gridded {
                    rng.gen_range(0..6) as f64 * 0.5
                } else {
                    rng.gen_range(0.0..4.0)
                }
            })
            .collect();
        let is_target: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let single_class = is_target.iter().all(|&t| t) || is_target.iter().all(|&t| !t);
        if single_class {
            assert!(information_gain(&distances, &is_target).is_err());
            continue;
        }
        let (gain, threshold) = information_gain(&distances, &is_target).unwrap();
        let (oracle_gain, oracle_threshold) = oracle_best_split(&distances, &is_target);
        assert!(
            (gain - oracle_gain).abs() <= 1e-12,
            "gain {gain} vs oracle {oracle_gain} on {distances:?} / {is_target:?}"
        );
        assert!(
            (threshold - oracle_threshold).abs() <= 1e-12,
            "threshold {threshold} vs oracle {oracle_threshold} on {distances:?} / {is_target:?}"
        );
        checked += 1;
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "enumeration took {elapsed:.1}s");
    println!("split quality oracle: PASS ({checked} instances, {elapsed:.2}s)");
}

// ---------------------------------------------------------------------------
// 3. The subsequence distance matches a naive double-loop oracle.
// ---------------------------------------------------------------------------

fn oracle_subsequence_distance(shapelet: &[f64], series: &[f64]) -> f64 {
    let len = shapelet.len();
    let mut best = f64::INFINITY;
    for start in 0..=series.len() - len {
        let window = &series[start..start + len];
        let mean = window.iter().sum::<f64>() / len as f64;
        let var = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len as f64;
        let sd = var.sqrt();
        let mut sum = 0.0;
        for (i, s) in shapelet.iter().enumerate() {
            let z = if sd <= 1e-8 {
                0.0
            } else {
                (window[i] - mean) / sd
            };
            let d = s - z;
            sum += d * d;
        }
        best = best.min(sum / len as f64);
    }
    best
}

#[test]
fn criterion_03_subsequence_distance_matches_a_double_loop_oracle() {
    let _guard = serial();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC03);
    let mut max_err = 0.0f64;
    for pair in 0..1000 {
        let m = rng.gen_range(4..=64);
        let l = rng.gen_range(2..=m);
        let series: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // occasionally plant a flat stretch so the degenerate-window rule
        // is exercised
        let mut series = series;
        if pair % 7 == 0 {
            let flat_start = rng.gen_range(0..=m - l);
            for v in &mut series[flat_start..flat_start + l] {
                *v = 1.5;
            }
        }
        let raw: Vec<f64> = (0..l).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let shapelet = hive_cote::data::z_normalize(&raw);
        let got = shapelet_distance(&shapelet, &series);
        let want = oracle_subsequence_distance(&shapelet, &series);
        let err = (got - want).abs();
        max_err = max_err.max(err);
        assert!(err <= 1e-9, "length {l} over {m}: off by {err:e}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "oracle comparison took {elapsed:.1}s");
    println!("subsequence distance oracle: PASS (1000 pairs, max error {max_err:.2e}, {elapsed:.2}s)");
}

// ---------------------------------------------------------------------------
// 4. The bag distance: self-distance zero, dense-vector oracle, asymmetry.
// ---------------------------------------------------------------------------

fn random_bag(rng: &mut ChaCha8Rng, word_length: usize, alphabet: u8) -> BagOfWords {
    let words = rng.gen_range(1..=20);
    let pairs: Vec<(Vec<u8>, u32)> = (0..words)
        .map(|_| {
            let word: Vec<u8> = (0..word_length).map(|_| rng.gen_range(0..alphabet)).collect();
            (word, rng.gen_range(1..=9u32))
        })
        .collect();
    let borrowed: Vec<(&[u8], u32)> = pairs.iter().map(|(w, c)| (w.as_slice(), *c)).collect();
    BagOfWords::from_pairs(&borrowed)
}

/// Squared Euclidean distance over the query's support, computed on dense
/// vectors indexed by the union of both bags' words.
fn oracle_bag_distance(query: &BagOfWords, reference: &BagOfWords) -> f64 {
    let mut words: Vec<Vec<u8>> = query
        .entries()
        .chain(reference.entries())
        .map(|(w, _)| w.to_vec())
        .collect();
    words.sort();
    words.dedup();
    let dense = |bag: &BagOfWords| -> Vec<f64> {
        words.iter().map(|w| bag.get(w) as f64).collect()
    };
    let q = dense(query);
    let r = dense(reference);
    q.iter()
        .zip(&r)
        .filter(|(qc, _)| **qc > 0.0)
        .map(|(qc, rc)| (qc - rc) * (qc - rc))
        .sum()
}

#[test]
fn criterion_04_bag_distance_properties_hold() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC04);
    for _ in 0..100 {
        let bag = random_bag(&mut rng, 4, 4);
        assert_eq!(boss_distance(&bag, &bag), 0.0);
    }
    for _ in 0..200 {
        let a = random_bag(&mut rng, 3, 3);
        let b = random_bag(&mut rng, 3, 3);
        assert_eq!(boss_distance(&a, &b), oracle_bag_distance(&a, &b));
        assert_eq!(boss_distance(&b, &a), oracle_bag_distance(&b, &a));
    }
    // the worked example: words outside the query's support are invisible,
    // so the distance is direction-dependent
    let b1 = BagOfWords::from_pairs(&[(b"x", 1), (b"y", 1)]);
    let b2 = BagOfWords::from_pairs(&[(b"x", 2), (b"z", 3)]);
    assert_eq!(boss_distance(&b1, &b2), 2.0);
    assert_eq!(boss_distance(&b2, &b1), 10.0);
    println!("bag distance properties: PASS (100 self, 200 oracle pairs, asymmetric witness (2, 10))");
}

// ---------------------------------------------------------------------------
// 5. Weighted probability combination.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_weighted_combination_matches_hand_arithmetic() {
    let _guard = serial();
    // two estimators, weights 0.9 and 0.6, exponent 4:
    //   0.9^4 = 0.6561, 0.6^4 = 0.1296
    //   score_0 = 0.6561 * 0.7 + 0.1296 * 0.2 = 0.48519
    //   score_1 = 0.6561 * 0.3 + 0.1296 * 0.8 = 0.30051
    let probs = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
    let weights = [0.9, 0.6];
    let scores = weighted_scores(&probs, &weights, 4.0).unwrap();
    assert!((scores[0] - 0.48519).abs() <= 1e-5, "score 0 was {}", scores[0]);
    assert!((scores[1] - 0.30051).abs() <= 1e-5, "score 1 was {}", scores[1]);

    // scaling every weight by a common factor never changes the winner
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC05);
    for _ in 0..10_000 {
        let k = rng.gen_range(2..=5);
        let classes = rng.gen_range(2..=4);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let raw: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.01..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let factor = 10f64.powf(rng.gen_range(-3.0..3.0));
        let scaled: Vec<f64> = weights.iter().map(|w| w * factor).collect();
        let base = weighted_scores(&rows, &weights, 4.0).unwrap();
        let shifted = weighted_scores(&rows, &scaled, 4.0).unwrap();
        assert_eq!(argmax_tie_low(&base), argmax_tie_low(&shifted));
    }

    // exponent zero flattens the weights into a plain average
    for _ in 0..200 {
        let k = rng.gen_range(2..=5);
        let classes = rng.gen_range(2..=4);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let raw: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.01..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        // zero weights included: with exponent zero they still count
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let combined = combine_probabilities(&rows, &weights, 0.0).unwrap();
        for (j, c) in combined.iter().enumerate() {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / k as f64;
            assert!(
                (c - mean).abs() <= 1e-12,
                "class {j}: combined {c} vs mean {mean}"
            );
        }
    }
    println!("weighted combination: PASS (hand oracle, 10000 scaling draws, exponent-zero mean)");
}

// ---------------------------------------------------------------------------
// Shared synthetic suite used by the accuracy and file-equivalence checks.
// ---------------------------------------------------------------------------

struct SuiteEntry {
    id: &'static str,
    matched: &'static str,
    threshold: f64,
    train: LabeledSeriesSet,
    test: LabeledSeriesSet,
    hc: HiveCote,
    /// Per component (in ensemble order): name and the raw test probability
    /// rows of that component's model.
    component_test_probs: Vec<(String, Vec<Vec<f64>>)>,
    hc_test_probs: Vec<Vec<f64>>,
    build_seconds: f64,
}

struct Suite {
    entries: Vec<SuiteEntry>,
    total_build_seconds: f64,
}

fn suite_config(seed: u64) -> HiveCoteConfig {
    HiveCoteConfig {
        components: vec![
            ComponentConfig::Tsf(TsfConfig {
                tree_count: 200,
                ..TsfConfig::default()
            }),
            ComponentConfig::Rise(RiseConfig {
                tree_count: 200,
                ..RiseConfig::default()
            }),
            ComponentConfig::CBoss(CBossConfig {
                parameter_samples: 120,
                ..CBossConfig::default()
            }),
            ComponentConfig::Stc(StcConfig {
                max_shapelets: 60,
                budget_schedule: Some(vec![2500]),
                rotation: RotationForestConfig {
                    tree_count: 100,
                    ..RotationForestConfig::default()
                },
                ..StcConfig::default()
            }),
        ],
        alpha: 4.0,
        cv_folds: 10,
        contract: None,
        threaded: false,
        seed,
    }
}

fn build_entry(
    id: &'static str,
    matched: &'static str,
    threshold: f64,
    train: LabeledSeriesSet,
    test: LabeledSeriesSet,
    seed: u64,
) -> SuiteEntry {
    let started = Instant::now();
    let hc = HiveCote::fit(&train, &suite_config(seed)).expect("suite ensemble build");
    let build_seconds = started.elapsed().as_secs_f64();
    let component_test_probs: Vec<(String, Vec<Vec<f64>>)> = hc
        .components
        .iter()
        .map(|c| {
            let rows: Vec<Vec<f64>> = (0..test.case_count())
                .map(|i| c.model.predict_proba(test.series(i)).unwrap())
                .collect();
            (c.name.clone(), rows)
        })
        .collect();
    let hc_test_probs: Vec<Vec<f64>> = (0..test.case_count())
        .map(|i| hc.predict_proba(test.series(i)).unwrap())
        .collect();
    SuiteEntry {
        id,
        matched,
        threshold,
        train,
        test,
        hc,
        component_test_probs,
        hc_test_probs,
        build_seconds,
    }
}

fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let entries = vec![
            build_entry(
                "IntervalMean",
                "TSF",
                0.95,
                interval_mean_dataset(200, 50, 101),
                interval_mean_dataset(200, 50, 102),
                41,
            ),
            build_entry(
                "TwoFrequency",
                "RISE",
                0.90,
                two_frequency_dataset(200, 128, 103),
                two_frequency_dataset(200, 128, 104),
                42,
            ),
            build_entry(
                "PatternFrequency",
                "cBOSS",
                0.90,
                pattern_frequency_dataset(200, 128, 105),
                pattern_frequency_dataset(200, 128, 106),
                43,
            ),
            build_entry(
                "PlantedShapelet",
                "STC",
                0.90,
                planted_shapelet_dataset(200, 60, 107),
                planted_shapelet_dataset(200, 60, 108),
                44,
            ),
        ];
        let total_build_seconds = entries.iter().map(|e| e.build_seconds).sum();
        Suite {
            entries,
            total_build_seconds,
        }
    })
}

// ---------------------------------------------------------------------------
// 6. Accuracy floors on the synthetic suite.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_synthetic_suite_meets_accuracy_floors() {
    let _guard = serial();
    let suite = suite();
    for entry in &suite.entries {
        let labels = entry.test.labels();
        let hc_acc = accuracy(&entry.hc_test_probs, labels);
        let (_, matched_probs) = entry
            .component_test_probs
            .iter()
            .find(|(name, _)| name == entry.matched)
            .expect("matched component is in the ensemble");
        let matched_acc = accuracy(matched_probs, labels);
        println!(
            "{}: {} {:.3} (floor {:.2}), ensemble {:.3}, built in {:.1}s",
            entry.id, entry.matched, matched_acc, entry.threshold, hc_acc, entry.build_seconds
        );
        assert!(
            matched_acc >= entry.threshold,
            "{}: {} reached {matched_acc:.3}, needs {:.2}",
            entry.id,
            entry.matched,
            entry.threshold
        );
        assert!(
            hc_acc >= matched_acc - 0.03,
            "{}: ensemble {hc_acc:.3} trails its {} component at {matched_acc:.3}",
            entry.id,
            entry.matched
        );
    }
    assert!(
        suite.total_build_seconds < 600.0,
        "suite builds took {:.0}s",
        suite.total_build_seconds
    );
    println!(
        "synthetic suite: PASS (4 datasets, builds {:.0}s)",
        suite.total_build_seconds
    );
}

// ---------------------------------------------------------------------------
// 7. Contracts bound the build time.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_contracts_bound_build_time() {
    let _guard = serial();
    let train = interval_mean_dataset(150, 60, 201);
    let contract = Duration::from_secs(10);
    let singles: Vec<ComponentConfig> = vec![
        ComponentConfig::Tsf(TsfConfig {
            tree_count: 50_000_000,
            ..TsfConfig::default()
        }),
        ComponentConfig::Rise(RiseConfig {
            tree_count: 50_000_000,
            ..RiseConfig::default()
        }),
        ComponentConfig::CBoss(CBossConfig {
            parameter_samples: 100_000,
            ..CBossConfig::default()
        }),
        ComponentConfig::Stc(StcConfig {
            max_shapelets: 50,
            rotation: RotationForestConfig {
                tree_count: 50,
                ..RotationForestConfig::default()
            },
            ..StcConfig::default()
        }),
    ];
    for config in singles {
        let name = config.name();
        let started = Instant::now();
        let component = build_component(&train, config, 7, Some(contract), 10).unwrap();
        let wall = started.elapsed().as_secs_f64();
        println!(
            "{name}: wall {wall:.2}s, charged {:.2}s against a 10s contract",
            component.build_seconds
        );
        assert!(wall <= 12.5, "{name} took {wall:.2}s against a 10s contract");
    }

    // a sequential ensemble divides its budget evenly: 60s over four
    // components is a 15s slice each
    let config = HiveCoteConfig {
        components: vec![
            ComponentConfig::Tsf(TsfConfig {
                tree_count: 50_000_000,
                ..TsfConfig::default()
            }),
            ComponentConfig::Rise(RiseConfig {
                tree_count: 50_000_000,
                ..RiseConfig::default()
            }),
            ComponentConfig::CBoss(CBossConfig {
                parameter_samples: 100_000,
                ..CBossConfig::default()
            }),
            ComponentConfig::Stc(StcConfig {
                max_shapelets: 50,
                rotation: RotationForestConfig {
                    tree_count: 50,
                    ..RotationForestConfig::default()
                },
                ..StcConfig::default()
            }),
        ],
        alpha: 4.0,
        cv_folds: 10,
        contract: Some(Duration::from_secs(60)),
        threaded: false,
        seed: 7,
    };
    let slice = 60.0 / 4.0;
    let started = Instant::now();
    let hc = HiveCote::fit(&train, &config).unwrap();
    let wall = started.elapsed().as_secs_f64();
    for c in &hc.components {
        println!("{}: {:.2}s of a {slice:.0}s slice", c.name, c.build_seconds);
        assert!(
            c.build_seconds <= slice * 1.25,
            "{} overran its slice: {:.2}s",
            c.name,
            c.build_seconds
        );
    }
    // the forests have far more trees than fit, so they must use their
    // whole slice rather than stopping early
    for c in &hc.components[..2] {
        assert!(
            c.build_seconds >= slice * 0.95,
            "{} left its slice unused: {:.2}s",
            c.name,
            c.build_seconds
        );
    }
    assert!(wall <= 75.0, "60s ensemble contract took {wall:.2}s");
    println!("contracts: PASS (four 10s builds <= 12.5s, 60s ensemble {wall:.1}s <= 75s)");
}

// ---------------------------------------------------------------------------
// 8. Checkpointed builds resume to identical predictions.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_interrupted_builds_resume_identically() {
    let _guard = serial();
    let train = interval_mean_dataset(40, 30, 301);
    let test = interval_mean_dataset(24, 30, 302);
    let config = HiveCoteConfig {
        components: vec![
            ComponentConfig::Tsf(TsfConfig {
                tree_count: 15,
                ..TsfConfig::default()
            }),
            ComponentConfig::Rise(RiseConfig {
                tree_count: 15,
                ..RiseConfig::default()
            }),
            ComponentConfig::CBoss(CBossConfig {
                parameter_samples: 10,
                max_ensemble_size: 5,
                ..CBossConfig::default()
            }),
            ComponentConfig::Stc(StcConfig {
                max_shapelets: 20,
                budget_schedule: Some(vec![60, 60]),
                rotation: RotationForestConfig {
                    tree_count: 15,
                    ..RotationForestConfig::default()
                },
                ..StcConfig::default()
            }),
        ],
        alpha: 4.0,
        cv_folds: 4,
        contract: None,
        threaded: false,
        seed: 9,
    };

    let baseline = HiveCoteBuilder::new(&train, &config)
        .unwrap()
        .run(&train)
        .unwrap();
    let baseline_probs: Vec<Vec<f64>> = (0..test.case_count())
        .map(|i| baseline.predict_proba(test.series(i)).unwrap())
        .collect();

    let dir = tempdir().unwrap();
    for interrupt_at in 0..4 {
        let mut builder = HiveCoteBuilder::new(&train, &config).unwrap();
        while builder.active_component() != Some(interrupt_at) {
            assert!(!builder.is_complete(), "never reached component {interrupt_at}");
            builder.advance(&train).unwrap();
        }
        // a few units into the component, so the interrupt lands mid-build
        for _ in 0..3 {
            if builder.active_component() == Some(interrupt_at) {
                builder.advance(&train).unwrap();
            }
        }
        assert_eq!(
            builder.active_component(),
            Some(interrupt_at),
            "interrupt point fell past the component"
        );
        let path = dir.path().join(format!("interrupt{interrupt_at}.bin"));
        save_builder(&path, &builder).unwrap();
        drop(builder);

        let mut resumed = load_builder(&path).unwrap();
        while !resumed.is_complete() {
            resumed.advance(&train).unwrap();
        }
        let model = resumed.finish(&train).unwrap();
        for (i, expected) in baseline_probs.iter().enumerate() {
            let got = model.predict_proba(test.series(i)).unwrap();
            assert_eq!(
                &got, expected,
                "case {i} diverged after interrupting component {interrupt_at}"
            );
        }
    }
    println!("checkpoint resume: PASS (interrupted inside each of the 4 components)");
}

// ---------------------------------------------------------------------------
// 9. The file-assembled ensemble matches the in-memory one.
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_file_assembly_matches_in_memory_ensemble() {
    let _guard = serial();
    let suite = suite();
    let dir = tempdir().unwrap();
    for entry in &suite.entries {
        for (index, component) in entry.hc.components.iter().enumerate() {
            let build_nanos = (component.build_seconds * 1e9) as u64;
            let train_rows: Vec<(usize, Vec<f64>)> = entry
                .train
                .labels()
                .iter()
                .zip(&component.train_probabilities)
                .map(|(&label, probs)| (label, probs.clone()))
                .collect();
            let train_result = ClassifierResult::new(
                entry.id,
                &component.name,
                Split::Train,
                0,
                &format!("estimate={}", component.estimate_method),
                build_nanos,
                0,
                train_rows,
            )
            .unwrap();
            write_result(dir.path(), &train_result).unwrap();
            let test_rows: Vec<(usize, Vec<f64>)> = entry
                .test
                .labels()
                .iter()
                .zip(&entry.component_test_probs[index].1)
                .map(|(&label, probs)| (label, probs.clone()))
                .collect();
            let test_result = ClassifierResult::new(
                entry.id,
                &component.name,
                Split::Test,
                0,
                &format!("estimate={}", component.estimate_method),
                build_nanos,
                0,
                test_rows,
            )
            .unwrap();
            write_result(dir.path(), &test_result).unwrap();
        }

        let assembled = build_from_results_files(
            dir.path(),
            entry.id,
            0,
            &["TSF", "RISE", "cBOSS", "STC"],
            4.0,
        )
        .unwrap();
        // the stored train accuracies round-trip exactly, so the weights are
        // bit-identical to the live ensemble's
        assert_eq!(assembled.weights, entry.hc.weights(), "{}", entry.id);
        for (i, (_, probs)) in assembled.test_predictions.iter().enumerate() {
            let live = &entry.hc_test_probs[i];
            assert_eq!(
                argmax_tie_low(probs),
                argmax_tie_low(live),
                "{} case {i}: file and live ensembles disagree",
                entry.id
            );
            for (a, b) in probs.iter().zip(live) {
                assert!(
                    (a - b).abs() <= 5e-6,
                    "{} case {i}: probability drifted {a} vs {b}",
                    entry.id
                );
            }
        }
        for (i, (_, probs)) in assembled.train_predictions.iter().enumerate() {
            let live = combine_probabilities(
                &entry
                    .hc
                    .components
                    .iter()
                    .map(|c| c.train_probabilities[i].clone())
                    .collect::<Vec<_>>(),
                &entry.hc.weights(),
                entry.hc.alpha,
            )
            .unwrap();
            assert_eq!(argmax_tie_low(probs), argmax_tie_low(&live));
            for (a, b) in probs.iter().zip(&live) {
                assert!((a - b).abs() <= 5e-6);
            }
        }
        assert_eq!(assembled.train_accuracy, entry.hc.train_accuracy, "{}", entry.id);
    }
    println!("file assembly: PASS (4 datasets, weights exact, labels identical)");
}

// ---------------------------------------------------------------------------
// 10. The ensemble pool's replacement policy.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_member_pool_replacement_policy() {
    let _guard = serial();
    // the worked sequence: capacity 2, offers 0.5, 0.6, 0.7, 0.4
    let mut pool = MemberPool::new(2);
    assert!(pool.offer('a', 0.5));
    assert!(pool.offer('b', 0.6));
    assert!(pool.offer('c', 0.7)); // replaces 0.5
    assert!(!pool.offer('d', 0.4)); // worse than the current minimum
    let mut kept = pool.accuracies();
    kept.sort_by(f64::total_cmp);
    assert_eq!(kept, vec![0.6, 0.7]);

    // ties never displace: equal accuracy is not an improvement
    let mut pool = MemberPool::new(1);
    assert!(pool.offer(0, 0.5));
    assert!(!pool.offer(1, 0.5));
    assert_eq!(pool.into_members().pop().unwrap().0, 0);

    // randomized replays against a reference simulation
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC10);
    for _ in 0..300 {
        let capacity = rng.gen_range(1..=6);
        let offers: Vec<f64> = (0..rng.gen_range(0..=25))
            .map(|_| rng.gen_range(0..=20) as f64 / 20.0)
            .collect();
        let mut pool = MemberPool::new(capacity);
        let mut reference: Vec<f64> = Vec::new();
        for (i, &acc) in offers.iter().enumerate() {
            let accepted = pool.offer(i, acc);
            let expected = if reference.len() < capacity {
                reference.push(acc);
                true
            } else {
                let (min_index, &min_acc) = reference
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| a.total_cmp(b))
                    .unwrap();
                if acc > min_acc {
                    reference[min_index] = acc;
                    true
                } else {
                    false
                }
            };
            assert_eq!(accepted, expected, "offer {i} of {offers:?} at capacity {capacity}");
            assert!(pool.len() <= capacity);
        }
        let mut got = pool.accuracies();
        got.sort_by(f64::total_cmp);
        reference.sort_by(f64::total_cmp);
        assert_eq!(got, reference, "retained set for {offers:?} at capacity {capacity}");
    }
    println!("member pool policy: PASS (worked sequence, tie rule, 300 replays)");
}

// ---------------------------------------------------------------------------
// 11. An oversized search budget equals exhaustive enumeration.
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_oversized_budget_equals_exhaustive_enumeration() {
    let _guard = serial();
    let train = planted_shapelet_dataset(10, 20, 401);
    let space = candidate_space_size(10, 20, 3);
    assert_eq!(space, 1710);
    let config = StcConfig {
        max_shapelets: 40,
        min_shapelet_length: 3,
        budget_schedule: Some(vec![space + 290]),
        ..StcConfig::default()
    };
    let mut build = StcBuild::new();
    assert!(build.search_step(&train, &config).unwrap());
    assert!(build.search_done, "a budget covering the space finishes the search");
    assert!(!build.search_step(&train, &config).unwrap());
    assert_eq!(build.next_order, space as u64);

    // reference: enumerate every candidate in the same canonical order,
    // then apply the overlap filter and capacity cut independently
    struct Candidate {
        series: usize,
        start: usize,
        length: usize,
        quality: f64,
        order: usize,
    }
    let mut candidates = Vec::with_capacity(space);
    for series in 0..train.case_count() {
        for length in 3..=train.series_length() {
            for start in 0..=train.series_length() - length {
                let values =
                    hive_cote::data::z_normalize(&train.series(series)[start..start + length]);
                let distances: Vec<f64> = (0..train.case_count())
                    .map(|i| shapelet_distance(&values, train.series(i)))
                    .collect();
                let is_target: Vec<bool> = train
                    .labels()
                    .iter()
                    .map(|&l| l == train.label(series))
                    .collect();
                let (quality, _) = information_gain(&distances, &is_target).unwrap();
                candidates.push(Candidate {
                    series,
                    start,
                    length,
                    quality,
                    order: candidates.len(),
                });
            }
        }
    }
    let mut by_quality: Vec<usize> = (0..candidates.len()).collect();
    by_quality.sort_by(|&a, &b| {
        candidates[b]
            .quality
            .total_cmp(&candidates[a].quality)
            .then_with(|| candidates[a].order.cmp(&candidates[b].order))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &by_quality {
        let c = &candidates[i];
        let overlaps = kept.iter().any(|&k| {
            let other = &candidates[k];
            other.series == c.series
                && c.start <= other.start + other.length - 1
                && other.start <= c.start + c.length - 1
        });
        if !overlaps {
            kept.push(i);
        }
    }
    kept.truncate(40);

    assert_eq!(build.pool.len(), kept.len().min(40));
    for (got, &want_index) in build.pool.iter().zip(&kept) {
        let want = &candidates[want_index];
        assert_eq!(
            (got.series, got.start, got.values.len()),
            (want.series, want.start, want.length)
        );
        assert_eq!(got.quality.to_bits(), want.quality.to_bits());
        assert_eq!(got.order, want.order as u64);
    }
    println!(
        "exhaustive search: PASS ({space} candidates enumerated, pool of {} identical)",
        build.pool.len()
    );
}

// ---------------------------------------------------------------------------
// 12. Result files round-trip at printed precision and feed the assembler.
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_result_files_round_trip_and_reassemble() {
    let _guard = serial();
    let dir = tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC12);
    let mut written = 0usize;
    for trial in 0..250 {
        let dataset = format!("Set{trial}");
        let fold = rng.gen_range(0..4);
        let cases = rng.gen_range(1..=30);
        let classes = rng.gen_range(2..=6);
        let train_labels: Vec<usize> = (0..cases).map(|_| rng.gen_range(0..classes)).collect();
        let test_labels: Vec<usize> = (0..cases).map(|_| rng.gen_range(0..classes)).collect();
        for classifier in ["Alpha", "Beta"] {
            for (split, labels) in [(Split::Train, &train_labels), (Split::Test, &test_labels)] {
                let predictions: Vec<(usize, Vec<f64>)> = labels
                    .iter()
                    .enumerate()
                    .map(|(i, &label)| {
                        let mut raw: Vec<f64> =
                            (0..classes).map(|_| rng.gen_range(0.001..1.0)).collect();
                        // keep the first train row correct so the assembled
                        // ensemble never sees an all-zero weight vector
                        if i == 0 && split == Split::Train {
                            raw[label] += 1.0;
                        }
                        let sum: f64 = raw.iter().sum();
                        (label, raw.into_iter().map(|v| v / sum).collect())
                    })
                    .collect();
                let result = ClassifierResult::new(
                    &dataset,
                    classifier,
                    split,
                    fold,
                    &format!("trial={trial} rate={}", rng.gen_range(0.0..1.0)),
                    rng.gen_range(0..10_u64.pow(12)),
                    rng.gen_range(0..10_u64.pow(9)),
                    predictions,
                )
                .unwrap();
                let path = write_result(dir.path(), &result).unwrap();
                let back = read_result(&path).unwrap();
                assert_eq!(back.dataset, result.dataset);
                assert_eq!(back.classifier, result.classifier);
                assert_eq!(back.split, result.split);
                assert_eq!(back.fold, result.fold);
                assert_eq!(back.parameters, result.parameters);
                assert_eq!(back.accuracy.to_bits(), result.accuracy.to_bits());
                assert_eq!(back.build_time_nanos, result.build_time_nanos);
                assert_eq!(back.test_time_nanos, result.test_time_nanos);
                assert_eq!(back.rows.len(), result.rows.len());
                for (b, w) in back.rows.iter().zip(&result.rows) {
                    assert_eq!(b.true_label, w.true_label);
                    assert_eq!(b.predicted_label, w.predicted_label);
                    let bb: Vec<u64> = b.probabilities.iter().map(|p| p.to_bits()).collect();
                    let wb: Vec<u64> = w.probabilities.iter().map(|p| p.to_bits()).collect();
                    assert_eq!(bb, wb, "probabilities did not round-trip bitwise");
                }
                written += 1;
            }
        }
        let assembled =
            build_from_results_files(dir.path(), &dataset, fold, &["Alpha", "Beta"], 4.0)
                .unwrap();
        assert_eq!(assembled.test_predictions.len(), cases);
        assert_eq!(assembled.weights.len(), 2);
    }
    assert_eq!(written, 1000);
    println!("result files: PASS (1000 round trips bitwise, 250 reassemblies)");
}
