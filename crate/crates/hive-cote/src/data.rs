//! Labeled univariate time series sets: file loading (`.ts` and headerless
//! CSV), deterministic fold resampling, and z-normalization.
//!
//! A [`LabeledSeriesSet`] is immutable after construction: every case has the
//! same length, every label is an index below the declared class count.
//! Loaders report the file line an error occurred on. Fold 1 of a resample is
//! the original train/test split; higher folds are seeded stratified
//! reshuffles of the pooled cases that preserve the original per-class counts
//! on each side.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Population standard deviations at or below this are treated as zero:
/// z-normalizing such a segment yields the zero vector.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// An equal-length, labeled collection of univariate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeriesSet {
    series: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledSeriesSet {
    /// Builds a set after checking the invariants: at least one case, equal
    /// lengths, length >= 1, and every label below `class_count`.
    pub fn new(
        series: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self, DataError> {
        if series.is_empty() {
            return Err(DataError::InvalidSet("no cases".into()));
        }
        if series.len() != labels.len() {
            return Err(DataError::InvalidSet(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        let m = series[0].len();
        if m == 0 {
            return Err(DataError::InvalidSet("series length is zero".into()));
        }
        if let Some((i, s)) = series.iter().enumerate().find(|(_, s)| s.len() != m) {
            return Err(DataError::InvalidSet(format!(
                "case {} has length {}, expected {}",
                i,
                s.len(),
                m
            )));
        }
        if class_count == 0 {
            return Err(DataError::InvalidSet("class count is zero".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= class_count) {
            return Err(DataError::InvalidSet(format!(
                "case {} has label {} outside [0, {})",
                i, l, class_count
            )));
        }
        Ok(Self {
            series,
            labels,
            class_count,
        })
    }

    pub fn case_count(&self) -> usize {
        self.series.len()
    }

    pub fn series_length(&self) -> usize {
        self.series[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn series(&self, case: usize) -> &[f64] {
        &self.series[case]
    }

    pub fn label(&self, case: usize) -> usize {
        self.labels[case]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of cases per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// A new set holding the given cases, in the given order.
    pub fn subset(&self, cases: &[usize]) -> LabeledSeriesSet {
        let series = cases.iter().map(|&i| self.series[i].clone()).collect();
        let labels = cases.iter().map(|&i| self.labels[i]).collect();
        LabeledSeriesSet {
            series,
            labels,
            class_count: self.class_count,
        }
    }
}

/// Parses the `.ts` format: `@problemName`, `@univariate true`,
/// `@equalLength true`, optional `@seriesLength`, `@classLabel true <names>`,
/// `@data`, then one `v1,v2,...,vm:label` line per case. Labels map to their
/// 0-based position in the declared class list.
pub fn load_ts_file(path: impl AsRef<Path>) -> Result<LabeledSeriesSet, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ts(&text, path)
}

fn parse_ts(text: &str, path: &Path) -> Result<LabeledSeriesSet, DataError> {
    let mut class_names: Option<Vec<String>> = None;
    let mut declared_length: Option<usize> = None;
    let mut in_data = false;
    let mut series: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();

    let header_err = |line: usize, message: &str| DataError::MalformedHeader {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if !line.starts_with('@') {
                return Err(header_err(line_no, "expected a @directive before @data"));
            }
            let mut parts = line.split_whitespace();
            let directive = parts.next().unwrap().to_ascii_lowercase();
            match directive.as_str() {
                "@data" => {
                    if class_names.is_none() {
                        return Err(header_err(line_no, "@classLabel must precede @data"));
                    }
                    in_data = true;
                }
                "@classlabel" => {
                    let flag = parts.next().unwrap_or("").to_ascii_lowercase();
                    if flag != "true" {
                        return Err(header_err(
                            line_no,
                            "@classLabel must be `true` followed by the class names",
                        ));
                    }
                    let names: Vec<String> = parts.map(str::to_string).collect();
                    if names.is_empty() {
                        return Err(header_err(line_no, "@classLabel lists no class names"));
                    }
                    class_names = Some(names);
                }
                "@univariate" => {
                    let flag = parts.next().unwrap_or("").to_ascii_lowercase();
                    if flag != "true" {
                        return Err(header_err(line_no, "only univariate data is supported"));
                    }
                }
                "@equallength" => {
                    let flag = parts.next().unwrap_or("").to_ascii_lowercase();
                    if flag != "true" {
                        return Err(header_err(line_no, "only equal-length data is supported"));
                    }
                }
                "@serieslength" => {
                    let token = parts.next().unwrap_or("");
                    let m: usize = token
                        .parse()
                        .map_err(|_| header_err(line_no, "@seriesLength is not an integer"))?;
                    declared_length = Some(m);
                }
                // @problemName, @timeStamps, @missing and the rest carry no
                // information this loader needs
                _ => {}
            }
            continue;
        }

        let class_names = class_names.as_ref().unwrap();
        let (values_part, label_part) = match line.rsplit_once(':') {
            Some(split) => split,
            None => {
                return Err(DataError::MalformedHeader {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: "data line has no `:label` suffix".into(),
                })
            }
        };
        let label_token = label_part.trim();
        let label = match class_names.iter().position(|n| n == label_token) {
            Some(i) => i,
            None => {
                return Err(DataError::UnknownLabel {
                    path: path.to_path_buf(),
                    line: line_no,
                    token: label_token.to_string(),
                })
            }
        };
        let mut values = Vec::new();
        for token in values_part.split(',') {
            let token = token.trim();
            let v: f64 = token.parse().map_err(|_| DataError::BadValue {
                path: path.to_path_buf(),
                line: line_no,
                token: token.to_string(),
            })?;
            values.push(v);
        }
        let expected = declared_length.unwrap_or_else(|| {
            series.first().map(Vec::len).unwrap_or(values.len())
        });
        if values.len() != expected {
            return Err(DataError::RaggedSeries {
                path: path.to_path_buf(),
                line: line_no,
                expected,
                found: values.len(),
            });
        }
        series.push(values);
        labels.push(label);
    }

    if series.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    LabeledSeriesSet::new(series, labels, class_names.unwrap().len())
}

/// Writes a set in `.ts` format. `class_names` must have one entry per class
/// (indexed by label); pass `None` to name classes "0", "1", ...
/// Values print with enough digits to parse back to the identical floats.
pub fn write_ts_file(
    set: &LabeledSeriesSet,
    path: impl AsRef<Path>,
    problem_name: &str,
    class_names: Option<&[String]>,
) -> Result<(), DataError> {
    let path = path.as_ref();
    let default_names: Vec<String> = (0..set.class_count()).map(|c| c.to_string()).collect();
    let names = class_names.unwrap_or(&default_names);
    assert_eq!(
        names.len(),
        set.class_count(),
        "one class name per class is required"
    );
    let mut out = String::new();
    let _ = writeln!(out, "@problemName {problem_name}");
    let _ = writeln!(out, "@univariate true");
    let _ = writeln!(out, "@equalLength true");
    let _ = writeln!(out, "@seriesLength {}", set.series_length());
    let _ = writeln!(out, "@classLabel true {}", names.join(" "));
    let _ = writeln!(out, "@data");
    for case in 0..set.case_count() {
        let values: Vec<String> = set.series(case).iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}:{}", values.join(","), names[set.label(case)]);
    }
    fs::write(path, out).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses headerless CSV with the class label in the last column. Distinct
/// label tokens are ordered numerically when they all parse as numbers and
/// lexicographically otherwise, and classes index into that order.
pub fn load_csv_file(path: impl AsRef<Path>) -> Result<LabeledSeriesSet, DataError> {
    let path = path.as_ref();
    let rows = read_csv_rows(path)?;
    let names = label_universe(rows.iter().map(|(_, l)| l.as_str()));
    build_from_csv_rows(rows, &names, path)
}

fn read_csv_rows(path: &Path) -> Result<Vec<(Vec<f64>, String)>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut expected: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() < 2 {
            return Err(DataError::MalformedHeader {
                path: path.to_path_buf(),
                line: line_no,
                message: "need at least one value and a trailing label".into(),
            });
        }
        let label = tokens.pop().unwrap().to_string();
        let m = tokens.len();
        if let Some(e) = expected {
            if m != e {
                return Err(DataError::RaggedSeries {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: e,
                    found: m,
                });
            }
        } else {
            expected = Some(m);
        }
        let mut values = Vec::with_capacity(m);
        for token in tokens {
            let v: f64 = token.parse().map_err(|_| DataError::BadValue {
                path: path.to_path_buf(),
                line: line_no,
                token: token.to_string(),
            })?;
            values.push(v);
        }
        rows.push((values, label));
    }
    if rows.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(rows)
}

fn label_universe<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut names: Vec<String> = labels.map(str::to_string).collect();
    names.sort();
    names.dedup();
    let all_numeric = names.iter().all(|n| n.parse::<f64>().is_ok());
    if all_numeric {
        names.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .total_cmp(&b.parse::<f64>().unwrap())
        });
    }
    names
}

fn build_from_csv_rows(
    rows: Vec<(Vec<f64>, String)>,
    names: &[String],
    path: &Path,
) -> Result<LabeledSeriesSet, DataError> {
    let mut series = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (values, label) in rows {
        let idx = names
            .iter()
            .position(|n| *n == label)
            .ok_or_else(|| DataError::UnknownLabel {
                path: path.to_path_buf(),
                line: 0,
                token: label.clone(),
            })?;
        series.push(values);
        labels.push(idx);
    }
    LabeledSeriesSet::new(series, labels, names.len())
}

/// Loads the `{name}_TRAIN` / `{name}_TEST` pair under `dir/name/`, trying
/// `.ts` then `.csv`. CSV pairs share a label universe built from the union
/// of both files so a class absent from one side still gets a stable index.
pub fn load_train_test(
    dir: impl AsRef<Path>,
    name: &str,
) -> Result<(LabeledSeriesSet, LabeledSeriesSet), DataError> {
    let base = dir.as_ref().join(name);
    let ts_train = base.join(format!("{name}_TRAIN.ts"));
    let ts_test = base.join(format!("{name}_TEST.ts"));
    if ts_train.exists() && ts_test.exists() {
        let train = load_ts_file(&ts_train)?;
        let test = load_ts_file(&ts_test)?;
        check_pair(&train, &test)?;
        return Ok((train, test));
    }
    let csv_train = base.join(format!("{name}_TRAIN.csv"));
    let csv_test = base.join(format!("{name}_TEST.csv"));
    if csv_train.exists() && csv_test.exists() {
        let train_rows = read_csv_rows(&csv_train)?;
        let test_rows = read_csv_rows(&csv_test)?;
        let names = label_universe(
            train_rows
                .iter()
                .chain(test_rows.iter())
                .map(|(_, l)| l.as_str()),
        );
        let train = build_from_csv_rows(train_rows, &names, &csv_train)?;
        let test = build_from_csv_rows(test_rows, &names, &csv_test)?;
        check_pair(&train, &test)?;
        return Ok((train, test));
    }
    Err(DataError::DatasetNotFound {
        dir: dir.as_ref().to_path_buf(),
        name: name.to_string(),
    })
}

fn check_pair(train: &LabeledSeriesSet, test: &LabeledSeriesSet) -> Result<(), DataError> {
    if train.series_length() != test.series_length() {
        return Err(DataError::Mismatch(format!(
            "series length {} in train vs {} in test",
            train.series_length(),
            test.series_length()
        )));
    }
    if train.class_count() != test.class_count() {
        return Err(DataError::Mismatch(format!(
            "{} classes in train vs {} in test",
            train.class_count(),
            test.class_count()
        )));
    }
    Ok(())
}

/// Deterministic fold resample. Fold 1 returns the inputs unchanged. Folds
/// >= 2 pool train and test, then redistribute each class with a generator
/// seeded by the fold number, keeping the per-class case counts of each side
/// exactly as they were.
pub fn resample(
    train: &LabeledSeriesSet,
    test: &LabeledSeriesSet,
    fold: usize,
) -> Result<(LabeledSeriesSet, LabeledSeriesSet), DataError> {
    if fold == 0 {
        return Err(DataError::InvalidFold(fold));
    }
    check_pair(train, test)?;
    if fold == 1 {
        return Ok((train.clone(), test.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fold as u64);
    let class_count = train.class_count();
    let mut new_train_series = Vec::with_capacity(train.case_count());
    let mut new_train_labels = Vec::with_capacity(train.case_count());
    let mut new_test_series = Vec::with_capacity(test.case_count());
    let mut new_test_labels = Vec::with_capacity(test.case_count());
    for class in 0..class_count {
        // pooled cases of this class: train cases first, then test cases
        let mut pooled: Vec<&[f64]> = Vec::new();
        for i in 0..train.case_count() {
            if train.label(i) == class {
                pooled.push(train.series(i));
            }
        }
        let train_share = pooled.len();
        for i in 0..test.case_count() {
            if test.label(i) == class {
                pooled.push(test.series(i));
            }
        }
        pooled.shuffle(&mut rng);
        for (k, s) in pooled.into_iter().enumerate() {
            if k < train_share {
                new_train_series.push(s.to_vec());
                new_train_labels.push(class);
            } else {
                new_test_series.push(s.to_vec());
                new_test_labels.push(class);
            }
        }
    }
    let new_train = LabeledSeriesSet::new(new_train_series, new_train_labels, class_count)?;
    let new_test = LabeledSeriesSet::new(new_test_series, new_test_labels, class_count)?;
    Ok((new_train, new_test))
}

/// Mean of a segment.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by n, not n-1).
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Z-normalizes a segment to mean 0 and population standard deviation 1.
/// Segments with standard deviation at or below [`SIGMA_FLOOR`] come back as
/// the zero vector.
pub fn z_normalize(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    z_normalize_into(values, &mut out);
    out
}

/// In-place variant of [`z_normalize`] for hot loops; `out` is resized to
/// match `values`.
pub fn z_normalize_into(values: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.resize(values.len(), 0.0);
    let m = mean(values);
    let sd = population_std(values);
    if sd <= SIGMA_FLOOR {
        return;
    }
    for (o, v) in out.iter_mut().zip(values) {
        *o = (v - m) / sd;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const SMALL_TS: &str = "\
@problemName toy
@univariate true
@equalLength true
@seriesLength 3
@classLabel true 0 1
@data
1.0,2.0,3.0:0
4.0,5.0,6.0:1
";

    #[test]
    fn loads_two_case_ts_file() {
        let f = write_temp(SMALL_TS);
        let set = load_ts_file(f.path()).unwrap();
        assert_eq!(set.case_count(), 2);
        assert_eq!(set.series_length(), 3);
        assert_eq!(set.class_count(), 2);
        assert_eq!(set.series(0), &[1.0, 2.0, 3.0]);
        assert_eq!(set.labels(), &[0, 1]);
    }

    #[test]
    fn ragged_ts_line_reports_line_number() {
        let f = write_temp(
            "@classLabel true a b\n@data\n1.0,2.0:a\n1.0:b\n",
        );
        match load_ts_file(f.path()) {
            Err(DataError::RaggedSeries { line, expected, found, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(expected, 2);
                assert_eq!(found, 1);
            }
            other => panic!("expected RaggedSeries, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_reports_token() {
        let f = write_temp("@classLabel true a b\n@data\n1.0,2.0:c\n");
        match load_ts_file(f.path()) {
            Err(DataError::UnknownLabel { token, line, .. }) => {
                assert_eq!(token, "c");
                assert_eq!(line, 3);
            }
            other => panic!("expected UnknownLabel, got {other:?}"),
        }
    }

    #[test]
    fn empty_data_section_is_an_error() {
        let f = write_temp("@classLabel true a\n@data\n");
        assert!(matches!(load_ts_file(f.path()), Err(DataError::Empty { .. })));
    }

    #[test]
    fn label_order_follows_the_declared_class_list() {
        let f = write_temp("@classLabel true pos neg\n@data\n1.0,2.0:neg\n3.0,4.0:pos\n");
        let set = load_ts_file(f.path()).unwrap();
        assert_eq!(set.labels(), &[1, 0]);
    }

    #[test]
    fn csv_labels_sort_numerically_when_numeric() {
        let f = write_temp("0.5,1.5,10\n0.1,0.2,2\n0.3,0.4,10\n");
        let set = load_csv_file(f.path()).unwrap();
        // numeric order: 2 -> class 0, 10 -> class 1
        assert_eq!(set.labels(), &[1, 0, 1]);
        assert_eq!(set.class_count(), 2);
    }

    #[test]
    fn resample_fold_one_is_identity() {
        let f = write_temp(SMALL_TS);
        let set = load_ts_file(f.path()).unwrap();
        let (tr, te) = resample(&set, &set, 1).unwrap();
        assert_eq!(tr, set);
        assert_eq!(te, set);
    }

    #[test]
    fn resample_fold_zero_is_rejected() {
        let f = write_temp(SMALL_TS);
        let set = load_ts_file(f.path()).unwrap();
        assert!(matches!(resample(&set, &set, 0), Err(DataError::InvalidFold(0))));
    }

    #[test]
    fn resample_is_deterministic_per_fold_and_stratified() {
        let train = LabeledSeriesSet::new(
            (0..12).map(|i| vec![i as f64, 0.0]).collect(),
            vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1],
            2,
        )
        .unwrap();
        let test = LabeledSeriesSet::new(
            (100..108).map(|i| vec![i as f64, 0.0]).collect(),
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            2,
        )
        .unwrap();
        let (tr2a, te2a) = resample(&train, &test, 2).unwrap();
        let (tr2b, te2b) = resample(&train, &test, 2).unwrap();
        assert_eq!(tr2a, tr2b);
        assert_eq!(te2a, te2b);
        let (tr3, _) = resample(&train, &test, 3).unwrap();
        assert_ne!(tr2a, tr3, "different folds should shuffle differently");
        // class counts on each side are preserved exactly
        assert_eq!(tr2a.class_counts(), vec![8, 4]);
        assert_eq!(te2a.class_counts(), vec![4, 4]);
        // the pooled universe of cases is unchanged
        let mut pooled_before: Vec<Vec<f64>> = (0..train.case_count())
            .map(|i| train.series(i).to_vec())
            .chain((0..test.case_count()).map(|i| test.series(i).to_vec()))
            .collect();
        let mut pooled_after: Vec<Vec<f64>> = (0..tr2a.case_count())
            .map(|i| tr2a.series(i).to_vec())
            .chain((0..te2a.case_count()).map(|i| te2a.series(i).to_vec()))
            .collect();
        let key = |v: &Vec<f64>| v[0].to_bits();
        pooled_before.sort_by_key(key);
        pooled_after.sort_by_key(key);
        assert_eq!(pooled_before, pooled_after);
    }

    #[test]
    fn z_normalize_matches_hand_computed_values() {
        let z = z_normalize(&[1.0, 2.0, 3.0, 4.0]);
        let expected = [-1.3416407864998738, -0.4472135954999579, 0.4472135954999579, 1.3416407864998738];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-4, "got {a}, wanted {b}");
        }
        // hand oracle: (x - mean) / population std
        let m = mean(&[1.0, 2.0, 3.0, 4.0]);
        let sd = population_std(&[1.0, 2.0, 3.0, 4.0]);
        for (i, v) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert!((z[i] - (v - m) / sd).abs() < 1e-15);
        }
    }

    #[test]
    fn z_normalize_constant_segment_is_zero_vector() {
        assert_eq!(z_normalize(&[7.0, 7.0, 7.0]), vec![0.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn ts_round_trip_preserves_values_and_labels(
            cases in proptest::collection::vec(
                proptest::collection::vec(-1e6f64..1e6, 4),
                1..12
            ),
            labels in proptest::collection::vec(0usize..3, 12)
        ) {
            let labels = labels[..cases.len()].to_vec();
            let set = LabeledSeriesSet::new(cases, labels, 3).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("round_trip.ts");
            write_ts_file(&set, &path, "round_trip", None).unwrap();
            let loaded = load_ts_file(&path).unwrap();
            prop_assert_eq!(loaded, set);
        }

        #[test]
        fn z_normalize_output_has_mean_zero_and_unit_std(
            values in proptest::collection::vec(-1e3f64..1e3, 2..40)
        ) {
            let z = z_normalize(&values);
            if population_std(&values) > SIGMA_FLOOR {
                prop_assert!(mean(&z).abs() < 1e-9);
                prop_assert!((population_std(&z) - 1.0).abs() < 1e-9);
                // idempotence on non-degenerate input
                let zz = z_normalize(&z);
                for (a, b) in zz.iter().zip(&z) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            } else {
                prop_assert!(z.iter().all(|v| *v == 0.0));
            }
        }
    }
}
