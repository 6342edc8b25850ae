//! Batch experiment runs driven by command-line flags.
//!
//! A run names a classifier, a dataset, and a fold; it loads the train/test
//! pair, resamples it for the fold, builds the classifier, and writes the
//! test predictions (plus train estimates on request) under the results
//! path in the standard file layout. Existing target files are never
//! rewritten, so interrupted batches can simply be restarted.
//!
//! Flags use `-name=value` form. Every flag can also be supplied through an
//! environment variable (`HC_DATA_PATH`, `HC_RESULTS_PATH`,
//! `HC_GENERATE_TRAIN_FILES`, `HC_CLASSIFIER_NAME`, `HC_DATASET_NAME`,
//! `HC_FOLD`, `HC_CONTRACT`, `HC_SEED`, `HC_THREADS`); an explicit flag wins
//! over its variable. Folds are numbered from 1 on the command line and from
//! 0 in file names, so `-f=1` writes `testFold0.csv`.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::boss::CBossConfig;
use crate::data::{load_train_test, resample, LabeledSeriesSet};
use crate::ensemble::{
    build_component, ComponentConfig, HiveCote, HiveCoteConfig, TrainedComponent,
};
use crate::error::ExperimentError;
use crate::results::{result_path, write_result, ClassifierResult, Split};
use crate::rise::RiseConfig;
use crate::stc::StcConfig;
use crate::tsf::TsfConfig;

/// The classifiers a run may name.
pub const CLASSIFIER_NAMES: [&str; 5] = ["TSF", "RISE", "cBOSS", "STC", "HC"];

pub const USAGE: &str = "\
usage: experiments -dp=<dir> -rp=<dir> -cn=<classifier> -dn=<dataset> -f=<fold> [options]

required flags (or environment variables):
  -dp=<dir>        data path; datasets live at <dir>/<name>/<name>_TRAIN.ts
                   and _TEST.ts (or .csv)           [HC_DATA_PATH]
  -rp=<dir>        results path for prediction files [HC_RESULTS_PATH]
  -cn=<name>       classifier: TSF, RISE, cBOSS, STC or HC
                                                    [HC_CLASSIFIER_NAME]
  -dn=<name>       dataset name                     [HC_DATASET_NAME]
  -f=<fold>        fold number, counted from 1; fold 1 keeps the published
                   split, higher folds resample it  [HC_FOLD]

options:
  -gtf=<bool>      also write the train-estimate file (default false)
                                                    [HC_GENERATE_TRAIN_FILES]
  --contract=<d>   build-time budget, e.g. 30s, 5m, 1h30m, or plain seconds
                                                    [HC_CONTRACT]
  --seed=<int>     random seed (default: the fold number) [HC_SEED]
  --threads=<n>    >1 builds HC components concurrently, each with the full
                   contract (default 1)             [HC_THREADS]

results are written to <rp>/<classifier>/Predictions/<dataset>/testFold<f-1>.csv
(and trainFold<f-1>.csv with -gtf=true); existing files are left untouched.
";

/// A parsed experiment request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub data_path: PathBuf,
    pub results_path: PathBuf,
    pub generate_train_files: bool,
    pub classifier_name: String,
    pub dataset_name: String,
    /// 1-based fold number; file names use `fold - 1`.
    pub fold: usize,
    pub contract: Option<Duration>,
    pub seed: Option<u64>,
    pub threads: usize,
}

impl RunSpec {
    /// Parses command-line arguments, falling back to the process
    /// environment for anything not given as a flag.
    pub fn from_args(args: &[String]) -> Result<RunSpec, ExperimentError> {
        Self::parse(args, &|name| std::env::var(name).ok())
    }

    /// Parses arguments with an explicit environment lookup.
    pub fn parse(
        args: &[String],
        env: &dyn Fn(&str) -> Option<String>,
    ) -> Result<RunSpec, ExperimentError> {
        let mut data_path: Option<String> = None;
        let mut results_path: Option<String> = None;
        let mut generate_train_files: Option<bool> = None;
        let mut classifier_name: Option<String> = None;
        let mut dataset_name: Option<String> = None;
        let mut fold: Option<usize> = None;
        let mut contract: Option<Duration> = None;
        let mut seed: Option<u64> = None;
        let mut threads: Option<usize> = None;

        for arg in args {
            let (key, value) = arg
                .split_once('=')
                .ok_or_else(|| ExperimentError::UnknownFlag(arg.clone()))?;
            match key {
                "-dp" => data_path = Some(value.to_string()),
                "-rp" => results_path = Some(value.to_string()),
                "-gtf" => generate_train_files = Some(parse_bool(key, value)?),
                "-cn" => classifier_name = Some(value.to_string()),
                "-dn" => dataset_name = Some(value.to_string()),
                "-f" => fold = Some(parse_fold(key, value)?),
                "--contract" => contract = Some(parse_contract(key, value)?),
                "--seed" => seed = Some(parse_integer(key, value)?),
                "--threads" => threads = Some(parse_threads(key, value)?),
                _ => return Err(ExperimentError::UnknownFlag(arg.clone())),
            }
        }

        if data_path.is_none() {
            data_path = env("HC_DATA_PATH");
        }
        if results_path.is_none() {
            results_path = env("HC_RESULTS_PATH");
        }
        if classifier_name.is_none() {
            classifier_name = env("HC_CLASSIFIER_NAME");
        }
        if dataset_name.is_none() {
            dataset_name = env("HC_DATASET_NAME");
        }
        if generate_train_files.is_none() {
            if let Some(text) = env("HC_GENERATE_TRAIN_FILES") {
                generate_train_files = Some(parse_bool("HC_GENERATE_TRAIN_FILES", &text)?);
            }
        }
        if fold.is_none() {
            if let Some(text) = env("HC_FOLD") {
                fold = Some(parse_fold("HC_FOLD", &text)?);
            }
        }
        if contract.is_none() {
            if let Some(text) = env("HC_CONTRACT") {
                contract = Some(parse_contract("HC_CONTRACT", &text)?);
            }
        }
        if seed.is_none() {
            if let Some(text) = env("HC_SEED") {
                seed = Some(parse_integer("HC_SEED", &text)?);
            }
        }
        if threads.is_none() {
            if let Some(text) = env("HC_THREADS") {
                threads = Some(parse_threads("HC_THREADS", &text)?);
            }
        }

        let mut missing = Vec::new();
        if data_path.is_none() {
            missing.push("-dp");
        }
        if results_path.is_none() {
            missing.push("-rp");
        }
        if classifier_name.is_none() {
            missing.push("-cn");
        }
        if dataset_name.is_none() {
            missing.push("-dn");
        }
        if fold.is_none() {
            missing.push("-f");
        }
        if !missing.is_empty() {
            return Err(ExperimentError::MissingFlags(missing.join(", ")));
        }

        Ok(RunSpec {
            data_path: PathBuf::from(data_path.unwrap()),
            results_path: PathBuf::from(results_path.unwrap()),
            generate_train_files: generate_train_files.unwrap_or(false),
            classifier_name: classifier_name.unwrap(),
            dataset_name: dataset_name.unwrap(),
            fold: fold.unwrap(),
            contract,
            seed,
            threads: threads.unwrap_or(1),
        })
    }
}

fn bad_flag(flag: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::BadFlag {
        flag: flag.to_string(),
        message: message.into(),
    }
}

fn parse_bool(flag: &str, value: &str) -> Result<bool, ExperimentError> {
    match value.to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_flag(flag, format!("expected true or false, got `{value}`"))),
    }
}

fn parse_fold(flag: &str, value: &str) -> Result<usize, ExperimentError> {
    let fold: usize = value
        .parse()
        .map_err(|_| bad_flag(flag, format!("expected a positive integer, got `{value}`")))?;
    if fold == 0 {
        return Err(bad_flag(flag, "folds are numbered from 1"));
    }
    Ok(fold)
}

fn parse_integer(flag: &str, value: &str) -> Result<u64, ExperimentError> {
    value
        .parse()
        .map_err(|_| bad_flag(flag, format!("expected an integer, got `{value}`")))
}

fn parse_threads(flag: &str, value: &str) -> Result<usize, ExperimentError> {
    let threads: usize = value
        .parse()
        .map_err(|_| bad_flag(flag, format!("expected a positive integer, got `{value}`")))?;
    if threads == 0 {
        return Err(bad_flag(flag, "at least one thread is required"));
    }
    Ok(threads)
}

fn parse_contract(flag: &str, value: &str) -> Result<Duration, ExperimentError> {
    parse_duration(value).ok_or_else(|| {
        bad_flag(
            flag,
            format!("expected a duration such as 30s, 5m, 1h30m or plain seconds, got `{value}`"),
        )
    })
}

/// Parses `1h30m`, `90s`, `250ms`, or a bare number of seconds. The result
/// must be positive.
pub fn parse_duration(text: &str) -> Option<Duration> {
    let text = text.trim().to_ascii_lowercase();
    if text.is_empty() {
        return None;
    }
    if let Ok(seconds) = text.parse::<f64>() {
        if seconds.is_finite() && seconds > 0.0 {
            return Some(Duration::from_secs_f64(seconds));
        }
        return None;
    }
    let mut total_seconds = 0.0f64;
    let mut number = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_ascii_digit() || c == '.' {
            number.push(c);
            continue;
        }
        let scale = match c {
            'h' => 3600.0,
            'm' if chars.peek() == Some(&'s') => {
                chars.next();
                0.001
            }
            'm' => 60.0,
            's' => 1.0,
            _ => return None,
        };
        if number.is_empty() {
            return None;
        }
        let value: f64 = number.parse().ok()?;
        number.clear();
        total_seconds += value * scale;
    }
    if !number.is_empty() {
        return None;
    }
    if total_seconds.is_finite() && total_seconds > 0.0 {
        Some(Duration::from_secs_f64(total_seconds))
    } else {
        None
    }
}

fn single_component_config(name: &str) -> Option<ComponentConfig> {
    match name {
        "TSF" => Some(ComponentConfig::Tsf(TsfConfig::default())),
        "RISE" => Some(ComponentConfig::Rise(RiseConfig::default())),
        "cBOSS" => Some(ComponentConfig::CBoss(CBossConfig::default())),
        "STC" => Some(ComponentConfig::Stc(StcConfig::default())),
        _ => None,
    }
}

enum Built {
    Component(TrainedComponent),
    Ensemble(HiveCote),
}

impl Built {
    fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, crate::error::BuildError> {
        match self {
            Built::Component(c) => c.model.predict_proba(series),
            Built::Ensemble(hc) => hc.predict_proba(series),
        }
    }

    fn train_probabilities(&self) -> &[Vec<f64>] {
        match self {
            Built::Component(c) => &c.train_probabilities,
            Built::Ensemble(hc) => &hc.train_probabilities,
        }
    }

    fn parameter_line(&self, seed: u64, folds: usize, contract: Option<Duration>) -> String {
        let contract_part = match contract {
            Some(c) => format!(",contract={}s", c.as_secs_f64()),
            None => String::new(),
        };
        match self {
            Built::Component(c) => format!(
                "seed={seed},folds={folds},estimate={}{contract_part}",
                c.estimate_method
            ),
            Built::Ensemble(hc) => {
                let names: Vec<&str> = hc.components.iter().map(|c| c.name.as_str()).collect();
                let weights: Vec<String> =
                    hc.weights().iter().map(|w| format!("{w}")).collect();
                format!(
                    "alpha={},seed={seed},folds={folds},components={},weights={}{contract_part}",
                    hc.alpha,
                    names.join("+"),
                    weights.join("|")
                )
            }
        }
    }
}

/// What a run produced: the files it wrote, the targets it left untouched
/// because they already existed, and the test accuracy when the test file
/// was written this run.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub written: Vec<PathBuf>,
    pub skipped: Vec<PathBuf>,
    pub test_accuracy: Option<f64>,
}

fn duration_nanos(d: Duration) -> u64 {
    u64::try_from(d.as_nanos()).unwrap_or(u64::MAX)
}

/// Runs one experiment: load, resample, build, predict, write.
///
/// The test prediction file is always a target; the train estimate file is a
/// target when `generate_train_files` is set. Targets that already exist are
/// skipped, and when nothing is missing the dataset is not even loaded. The
/// train file reuses the build time and records zero test time, since its
/// rows are the held-out estimates produced during the build itself.
pub fn run_experiment(spec: &RunSpec) -> Result<ExperimentOutcome, ExperimentError> {
    if spec.fold == 0 {
        return Err(bad_flag("-f", "folds are numbered from 1"));
    }
    let file_fold = spec.fold - 1;
    let test_target = result_path(
        &spec.results_path,
        &spec.classifier_name,
        &spec.dataset_name,
        Split::Test,
        file_fold,
    );
    let train_target = result_path(
        &spec.results_path,
        &spec.classifier_name,
        &spec.dataset_name,
        Split::Train,
        file_fold,
    );
    let need_test = !test_target.exists();
    let need_train = spec.generate_train_files && !train_target.exists();
    let mut skipped = Vec::new();
    if !need_test {
        skipped.push(test_target.clone());
    }
    if spec.generate_train_files && !need_train {
        skipped.push(train_target.clone());
    }
    if !need_test && !need_train {
        return Ok(ExperimentOutcome {
            written: Vec::new(),
            skipped,
            test_accuracy: None,
        });
    }

    let is_ensemble = spec.classifier_name == "HC";
    if !is_ensemble && single_component_config(&spec.classifier_name).is_none() {
        return Err(ExperimentError::UnknownClassifier(
            spec.classifier_name.clone(),
        ));
    }

    let out_dir = test_target
        .parent()
        .expect("result paths have a parent")
        .to_path_buf();
    fs::create_dir_all(&out_dir).map_err(|source| ExperimentError::Unwritable {
        path: out_dir.clone(),
        source,
    })?;

    let (train_raw, test_raw) = load_train_test(&spec.data_path, &spec.dataset_name)?;
    let (train, test) = resample(&train_raw, &test_raw, spec.fold)?;
    let seed = spec.seed.unwrap_or(spec.fold as u64);
    let folds = estimate_folds(&train);

    let build_start = Instant::now();
    let built = if is_ensemble {
        let config = HiveCoteConfig {
            contract: spec.contract,
            threaded: spec.threads > 1,
            seed,
            cv_folds: folds,
            ..HiveCoteConfig::default()
        };
        Built::Ensemble(HiveCote::fit(&train, &config)?)
    } else {
        let config = single_component_config(&spec.classifier_name).expect("name was checked");
        Built::Component(build_component(&train, config, seed, spec.contract, folds)?)
    };
    let build_nanos = duration_nanos(build_start.elapsed());
    let parameters = built.parameter_line(seed, folds, spec.contract);

    let mut written = Vec::new();
    let mut test_accuracy = None;
    if need_test {
        let test_start = Instant::now();
        let mut predictions = Vec::with_capacity(test.case_count());
        for i in 0..test.case_count() {
            predictions.push((test.label(i), built.predict_proba(test.series(i))?));
        }
        let test_nanos = duration_nanos(test_start.elapsed());
        let result = ClassifierResult::new(
            &spec.dataset_name,
            &spec.classifier_name,
            Split::Test,
            file_fold,
            &parameters,
            build_nanos,
            test_nanos,
            predictions,
        )?;
        written.push(write_result(&spec.results_path, &result)?);
        test_accuracy = Some(result.accuracy);
    }
    if need_train {
        let predictions: Vec<(usize, Vec<f64>)> = train
            .labels()
            .iter()
            .zip(built.train_probabilities())
            .map(|(&label, probs)| (label, probs.clone()))
            .collect();
        let result = ClassifierResult::new(
            &spec.dataset_name,
            &spec.classifier_name,
            Split::Train,
            file_fold,
            &parameters,
            build_nanos,
            0,
            predictions,
        )?;
        written.push(write_result(&spec.results_path, &result)?);
    }
    Ok(ExperimentOutcome {
        written,
        skipped,
        test_accuracy,
    })
}

/// Cross-validation folds for the train estimates: ten when the data
/// supports it, fewer on tiny training sets.
fn estimate_folds(train: &LabeledSeriesSet) -> usize {
    10.min(train.case_count()).max(2)
}
