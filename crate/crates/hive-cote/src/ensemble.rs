//! The heterogeneous meta ensemble: four component classifiers are built
//! with train-accuracy estimates, and predictions combine component
//! probabilities weighted by estimate-to-the-alpha. Builds run as a
//! sequence of small resumable units so they can be checkpointed, time
//! contracts split evenly across components (threaded builds give each
//! component the whole budget), and every unit draws randomness from its
//! own seeded stream.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::boss::{CBossBuild, CBossConfig, CBossModel};
use crate::data::LabeledSeriesSet;
use crate::error::BuildError;
use crate::rise::{RiseBuild, RiseConfig, RiseModel};
use crate::rotation_forest::RotationForest;
use crate::stc::{StcBuild, StcConfig, StcModel};
use crate::trees::{stratified_fold_indices, FeatureMatrix};
use crate::tsf::{TsfBuild, TsfConfig, TsfModel};
use crate::util::{argmax_tie_low, seed_mix, stream_rng};

/// Raw combined scores: each component's probability row scaled by its
/// weight raised to `alpha` and summed per class. With `alpha` zero every
/// component counts equally (zero to the zeroth power is one).
pub fn weighted_scores(
    component_probs: &[Vec<f64>],
    weights: &[f64],
    alpha: f64,
) -> Result<Vec<f64>, BuildError> {
    assert_eq!(
        component_probs.len(),
        weights.len(),
        "one weight per component"
    );
    assert!(!component_probs.is_empty(), "need at least one component");
    let classes = component_probs[0].len();
    let powered: Vec<f64> = weights.iter().map(|w| w.powf(alpha)).collect();
    if powered.iter().sum::<f64>() <= 0.0 {
        return Err(BuildError::AllWeightsZero);
    }
    let mut scores = vec![0.0; classes];
    for (probs, w) in component_probs.iter().zip(&powered) {
        assert_eq!(probs.len(), classes, "ragged probability rows");
        for (s, p) in scores.iter_mut().zip(probs) {
            *s += w * p;
        }
    }
    Ok(scores)
}

/// Weighted scores normalized into a probability vector.
pub fn combine_probabilities(
    component_probs: &[Vec<f64>],
    weights: &[f64],
    alpha: f64,
) -> Result<Vec<f64>, BuildError> {
    let mut scores = weighted_scores(component_probs, weights, alpha)?;
    let total: f64 = scores.iter().sum();
    for s in &mut scores {
        *s /= total;
    }
    Ok(scores)
}

/// Configuration of one component slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ComponentConfig {
    Tsf(TsfConfig),
    Rise(RiseConfig),
    CBoss(CBossConfig),
    Stc(StcConfig),
}

impl ComponentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ComponentConfig::Tsf(_) => "TSF",
            ComponentConfig::Rise(_) => "RISE",
            ComponentConfig::CBoss(_) => "cBOSS",
            ComponentConfig::Stc(_) => "STC",
        }
    }
}

/// A fitted component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ComponentModel {
    Tsf(TsfModel),
    Rise(RiseModel),
    CBoss(CBossModel),
    Stc(StcModel),
}

impl ComponentModel {
    pub fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, BuildError> {
        match self {
            ComponentModel::Tsf(m) => m.predict_proba(series),
            ComponentModel::Rise(m) => m.predict_proba(series),
            ComponentModel::CBoss(m) => m.predict_proba(series),
            ComponentModel::Stc(m) => m.predict_proba(series),
        }
    }
}

/// A component together with its train-accuracy estimate and the per-case
/// probability estimates that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedComponent {
    pub name: String,
    pub model: ComponentModel,
    /// The weight the ensemble uses.
    pub train_accuracy: f64,
    /// How the estimate was obtained.
    pub estimate_method: String,
    /// Held-out probability estimates for each training case.
    pub train_probabilities: Vec<Vec<f64>>,
    /// Wall-clock seconds spent building, accumulated across resumes.
    pub build_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiveCoteConfig {
    pub components: Vec<ComponentConfig>,
    /// Weight exponent.
    pub alpha: f64,
    /// Folds for the cross-validated train estimates.
    pub cv_folds: usize,
    /// Total build budget. Sequential builds split it evenly across
    /// components; threaded builds give each component all of it.
    pub contract: Option<Duration>,
    pub threaded: bool,
    pub seed: u64,
}

impl Default for HiveCoteConfig {
    fn default() -> Self {
        Self {
            components: vec![
                ComponentConfig::Tsf(TsfConfig::default()),
                ComponentConfig::Rise(RiseConfig::default()),
                ComponentConfig::CBoss(CBossConfig::default()),
                ComponentConfig::Stc(StcConfig::default()),
            ],
            alpha: 4.0,
            cv_folds: 10,
            contract: None,
            threaded: false,
            seed: 0,
        }
    }
}

// seed tags for the derived generator streams inside one component
const FOLD_ASSIGNMENT_TAG: u64 = 11;
const FOLD_BUILD_TAG: u64 = 100;
const FOREST_FOLD_TAG: u64 = 200;

/// Cross-validation progress for components whose estimate refits them per
/// fold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvState<B> {
    assignment: Vec<usize>,
    fold: usize,
    fold_elapsed: f64,
    build: B,
    probs: Vec<Option<Vec<f64>>>,
}

impl<B> CvState<B> {
    fn new(train: &LabeledSeriesSet, seed: u64, folds: usize, build: B) -> Self {
        let mut rng = stream_rng(seed_mix(seed, FOLD_ASSIGNMENT_TAG), 0);
        let assignment =
            stratified_fold_indices(train.labels(), train.class_count(), folds, &mut rng);
        Self {
            assignment,
            fold: 0,
            fold_elapsed: 0.0,
            build,
            probs: vec![None; train.case_count()],
        }
    }

    fn fold_train_indices(&self) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != self.fold)
            .collect()
    }

    fn holdout_indices(&self) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == self.fold)
            .collect()
    }

    fn outcome(&self, labels: &[usize]) -> (f64, Vec<Vec<f64>>) {
        let probs: Vec<Vec<f64>> = self
            .probs
            .iter()
            .map(|p| p.clone().expect("every case was held out exactly once"))
            .collect();
        (accuracy_of(&probs, labels), probs)
    }
}

fn accuracy_of(probs: &[Vec<f64>], labels: &[usize]) -> f64 {
    let correct = probs
        .iter()
        .zip(labels)
        .filter(|(p, &l)| argmax_tie_low(p) == l)
        .count();
    correct as f64 / labels.len() as f64
}

/// Where one component stands in its build.
#[derive(Debug, Clone, Serialize, Deserialize)]
enum ComponentPhase {
    TsfCv(CvState<TsfBuild>),
    TsfFinal {
        accuracy: f64,
        probs: Vec<Vec<f64>>,
        build: TsfBuild,
    },
    RiseCv(CvState<RiseBuild>),
    RiseFinal {
        accuracy: f64,
        probs: Vec<Vec<f64>>,
        build: RiseBuild,
    },
    BossMain {
        build: CBossBuild,
    },
    BossEstimate {
        model: CBossModel,
    },
    StcSearch {
        build: StcBuild,
    },
    StcTransform {
        build: StcBuild,
    },
    StcForestCv {
        build: StcBuild,
        matrix: FeatureMatrix,
        assignment: Vec<usize>,
        fold: usize,
        probs: Vec<Option<Vec<f64>>>,
    },
    StcFinal {
        accuracy: f64,
        probs: Vec<Vec<f64>>,
        build: StcBuild,
        matrix: FeatureMatrix,
    },
    Done,
}

/// One component's resumable build: configuration, phase, and the seconds
/// already spent. Each [`ComponentBuild::advance`] call does one unit of
/// work (one tree, one parameter sample, one search round, one fold).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentBuild {
    pub name: String,
    config: ComponentConfig,
    seed: u64,
    /// Build budget for this component, in seconds.
    slice_seconds: Option<f64>,
    folds: usize,
    pub elapsed_seconds: f64,
    phase: ComponentPhase,
    finished: Option<TrainedComponent>,
}

impl ComponentBuild {
    /// Sets up the build. The component's own `seed` field is replaced by
    /// `seed`, and its own `contract` field is cleared: budgets are enforced
    /// here so that resumed builds keep a single consistent clock.
    pub fn new(
        mut config: ComponentConfig,
        seed: u64,
        slice_seconds: Option<f64>,
        folds: usize,
        train: &LabeledSeriesSet,
    ) -> Result<Self, BuildError> {
        let name = config.name().to_string();
        let phase = match &mut config {
            ComponentConfig::Tsf(cfg) => {
                cfg.seed = seed;
                cfg.contract = None;
                ComponentPhase::TsfCv(CvState::new(train, seed, folds, TsfBuild::new()))
            }
            ComponentConfig::Rise(cfg) => {
                cfg.seed = seed;
                cfg.contract = None;
                ComponentPhase::RiseCv(CvState::new(train, seed, folds, RiseBuild::new()))
            }
            ComponentConfig::CBoss(cfg) => {
                cfg.seed = seed;
                cfg.contract = None;
                ComponentPhase::BossMain {
                    build: CBossBuild::new(cfg),
                }
            }
            ComponentConfig::Stc(cfg) => {
                cfg.seed = seed;
                if let Some(slice) = slice_seconds {
                    // half the slice searches, the rest fits and estimates
                    let budget = Duration::from_secs_f64(slice / 2.0);
                    cfg.search_time = cfg.search_time.min(budget);
                }
                if matches!(&cfg.budget_schedule, Some(s) if s.is_empty()) {
                    return Err(component_error(
                        &name,
                        BuildError::InvalidConfig("the search schedule is empty".into()),
                    ));
                }
                ComponentPhase::StcSearch {
                    build: StcBuild::new(),
                }
            }
        };
        Ok(Self {
            name,
            config,
            seed,
            slice_seconds,
            folds,
            elapsed_seconds: 0.0,
            phase,
            finished: None,
        })
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, ComponentPhase::Done)
    }

    pub fn take_finished(&mut self) -> Option<TrainedComponent> {
        self.finished.take()
    }

    /// Runs one unit of work and charges its wall time.
    pub fn advance(&mut self, train: &LabeledSeriesSet) -> Result<(), BuildError> {
        let clock = Instant::now();
        let result = self.step(train);
        self.elapsed_seconds += clock.elapsed().as_secs_f64();
        result.map_err(|e| component_error(&self.name, e))
    }

    fn step(&mut self, train: &LabeledSeriesSet) -> Result<(), BuildError> {
        // each estimate fold gets an equal share of half the slice; the
        // final build keeps whatever the estimate left over
        let folds = self.folds;
        let fold_budget = self.slice_seconds.map(|s| s / (2.0 * folds as f64));
        match &mut self.phase {
            ComponentPhase::TsfCv(state) => {
                let cfg = match &self.config {
                    ComponentConfig::Tsf(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                if state.fold >= folds {
                    let (accuracy, probs) = state.outcome(train.labels());
                    self.phase = ComponentPhase::TsfFinal {
                        accuracy,
                        probs,
                        build: TsfBuild::new(),
                    };
                    return Ok(());
                }
                let mut fold_cfg = cfg;
                fold_cfg.seed = seed_mix(self.seed, FOLD_BUILD_TAG + state.fold as u64);
                let over_budget = fold_budget.map_or(false, |b| state.fold_elapsed >= b)
                    && !state.build.trees.is_empty();
                if state.build.is_complete(&fold_cfg) || over_budget {
                    let holdout = state.holdout_indices();
                    let fold_train = train.subset(&state.fold_train_indices());
                    let model = std::mem::take(&mut state.build).finish(&fold_train);
                    for case in holdout {
                        state.probs[case] = Some(model.predict_proba(train.series(case))?);
                    }
                    state.fold += 1;
                    state.fold_elapsed = 0.0;
                    return Ok(());
                }
                let fold_train = train.subset(&state.fold_train_indices());
                let clock = Instant::now();
                state.build.build_next(&fold_train, &fold_cfg);
                state.fold_elapsed += clock.elapsed().as_secs_f64();
                Ok(())
            }
            ComponentPhase::TsfFinal {
                accuracy,
                probs,
                build,
            } => {
                let cfg = match &self.config {
                    ComponentConfig::Tsf(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                let spent = self.slice_seconds.map_or(false, |s| self.elapsed_seconds >= s)
                    && !build.trees.is_empty();
                if build.is_complete(&cfg) || spent {
                    let model = std::mem::take(build).finish(train);
                    self.finished = Some(TrainedComponent {
                        name: self.name.clone(),
                        model: ComponentModel::Tsf(model),
                        train_accuracy: *accuracy,
                        estimate_method: "cross-validation".into(),
                        train_probabilities: std::mem::take(probs),
                        build_seconds: self.elapsed_seconds,
                    });
                    self.phase = ComponentPhase::Done;
                    return Ok(());
                }
                build.build_next(train, &cfg);
                Ok(())
            }
            ComponentPhase::RiseCv(state) => {
                let cfg = match &self.config {
                    ComponentConfig::Rise(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                if state.fold >= folds {
                    let (accuracy, probs) = state.outcome(train.labels());
                    self.phase = ComponentPhase::RiseFinal {
                        accuracy,
                        probs,
                        build: RiseBuild::new(),
                    };
                    return Ok(());
                }
                let mut fold_cfg = cfg;
                fold_cfg.seed = seed_mix(self.seed, FOLD_BUILD_TAG + state.fold as u64);
                let over_budget = fold_budget.map_or(false, |b| state.fold_elapsed >= b)
                    && !state.build.trees.is_empty();
                if state.build.is_complete(&fold_cfg) || over_budget {
                    let holdout = state.holdout_indices();
                    let fold_train = train.subset(&state.fold_train_indices());
                    let model = std::mem::take(&mut state.build).finish(&fold_train, &fold_cfg);
                    for case in holdout {
                        state.probs[case] = Some(model.predict_proba(train.series(case))?);
                    }
                    state.fold += 1;
                    state.fold_elapsed = 0.0;
                    return Ok(());
                }
                let remaining = fold_budget.map(|b| {
                    Duration::from_secs_f64((b - state.fold_elapsed).max(0.0))
                });
                let fold_train = train.subset(&state.fold_train_indices());
                let clock = Instant::now();
                state.build.build_next(&fold_train, &fold_cfg, remaining);
                state.fold_elapsed += clock.elapsed().as_secs_f64();
                Ok(())
            }
            ComponentPhase::RiseFinal {
                accuracy,
                probs,
                build,
            } => {
                let cfg = match &self.config {
                    ComponentConfig::Rise(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                let spent = self.slice_seconds.map_or(false, |s| self.elapsed_seconds >= s)
                    && !build.trees.is_empty();
                if build.is_complete(&cfg) || spent {
                    let model = std::mem::take(build).finish(train, &cfg);
                    self.finished = Some(TrainedComponent {
                        name: self.name.clone(),
                        model: ComponentModel::Rise(model),
                        train_accuracy: *accuracy,
                        estimate_method: "cross-validation".into(),
                        train_probabilities: std::mem::take(probs),
                        build_seconds: self.elapsed_seconds,
                    });
                    self.phase = ComponentPhase::Done;
                    return Ok(());
                }
                let remaining = self
                    .slice_seconds
                    .map(|s| Duration::from_secs_f64((s - self.elapsed_seconds).max(0.0)));
                build.build_next(train, &cfg, remaining);
                Ok(())
            }
            ComponentPhase::BossMain { build } => {
                let cfg = match &self.config {
                    ComponentConfig::CBoss(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                // the main build takes half the slice; the accuracy
                // estimate over the members runs uncontracted after it
                let budget = self.slice_seconds.map(|s| s / 2.0);
                let over_budget =
                    budget.map_or(false, |b| self.elapsed_seconds >= b) && build.next_sample > 0;
                if build.is_complete(&cfg, train.series_length()) || over_budget {
                    let model = build.clone().finish(train);
                    self.phase = ComponentPhase::BossEstimate { model };
                    return Ok(());
                }
                build.build_next(train, &cfg)
            }
            ComponentPhase::BossEstimate { model } => {
                let probs = model.train_probabilities(train);
                let accuracy = accuracy_of(&probs, train.labels());
                self.finished = Some(TrainedComponent {
                    name: self.name.clone(),
                    model: ComponentModel::CBoss(model.clone()),
                    train_accuracy: accuracy,
                    estimate_method: "subsample-votes".into(),
                    train_probabilities: probs,
                    build_seconds: self.elapsed_seconds,
                });
                self.phase = ComponentPhase::Done;
                Ok(())
            }
            ComponentPhase::StcSearch { build } => {
                let cfg = match &self.config {
                    ComponentConfig::Stc(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                if !build.search_step(train, &cfg)? {
                    let build = build.clone();
                    self.phase = ComponentPhase::StcTransform { build };
                }
                Ok(())
            }
            ComponentPhase::StcTransform { build } => {
                if build.pool.is_empty() {
                    return Err(BuildError::InvalidData(
                        "the shapelet search kept no candidates".into(),
                    ));
                }
                let matrix = build.transform_matrix(train);
                let mut rng = stream_rng(seed_mix(self.seed, FOLD_ASSIGNMENT_TAG), 0);
                let assignment =
                    stratified_fold_indices(train.labels(), train.class_count(), folds, &mut rng);
                self.phase = ComponentPhase::StcForestCv {
                    build: build.clone(),
                    matrix,
                    assignment,
                    fold: 0,
                    probs: vec![None; train.case_count()],
                };
                Ok(())
            }
            ComponentPhase::StcForestCv {
                build,
                matrix,
                assignment,
                fold,
                probs,
            } => {
                let cfg = match &self.config {
                    ComponentConfig::Stc(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                if *fold >= folds {
                    let collected: Vec<Vec<f64>> = probs
                        .iter()
                        .map(|p| p.clone().expect("every case was held out exactly once"))
                        .collect();
                    let accuracy = accuracy_of(&collected, train.labels());
                    self.phase = ComponentPhase::StcFinal {
                        accuracy,
                        probs: collected,
                        build: build.clone(),
                        matrix: matrix.clone(),
                    };
                    return Ok(());
                }
                let fold_train: Vec<usize> = (0..assignment.len())
                    .filter(|&i| assignment[i] != *fold)
                    .collect();
                let holdout: Vec<usize> = (0..assignment.len())
                    .filter(|&i| assignment[i] == *fold)
                    .collect();
                let sub = matrix.subset(&fold_train);
                let forest = RotationForest::fit(
                    &sub,
                    &cfg.rotation,
                    seed_mix(self.seed, FOREST_FOLD_TAG + *fold as u64),
                );
                for case in holdout {
                    probs[case] = Some(forest.predict_proba(&matrix.rows[case]));
                }
                *fold += 1;
                Ok(())
            }
            ComponentPhase::StcFinal {
                accuracy,
                probs,
                build,
                matrix,
            } => {
                let cfg = match &self.config {
                    ComponentConfig::Stc(c) => c.clone(),
                    _ => unreachable!("phase matches the configuration kind"),
                };
                let model = build.clone().finish_with_matrix(matrix, train, &cfg)?;
                self.finished = Some(TrainedComponent {
                    name: self.name.clone(),
                    model: ComponentModel::Stc(model),
                    train_accuracy: *accuracy,
                    estimate_method: "transform-cross-validation".into(),
                    train_probabilities: std::mem::take(probs),
                    build_seconds: self.elapsed_seconds,
                });
                self.phase = ComponentPhase::Done;
                Ok(())
            }
            ComponentPhase::Done => Ok(()),
        }
    }
}

fn component_error(name: &str, source: BuildError) -> BuildError {
    match source {
        already @ BuildError::Component { .. } => already,
        other => BuildError::Component {
            name: name.to_string(),
            source: Box::new(other),
        },
    }
}

/// Builds one component to completion outside the ensemble, using the same
/// estimate machinery (experiment runs of single classifiers go through
/// this).
pub fn build_component(
    train: &LabeledSeriesSet,
    config: ComponentConfig,
    seed: u64,
    contract: Option<Duration>,
    cv_folds: usize,
) -> Result<TrainedComponent, BuildError> {
    validate_folds(train, cv_folds)?;
    let slice = contract.map(|c| c.as_secs_f64());
    let mut build = ComponentBuild::new(config, seed, slice, cv_folds, train)?;
    while !build.is_done() {
        build.advance(train)?;
    }
    Ok(build.take_finished().expect("finished build has a result"))
}

/// Resumable whole-ensemble build: components advance in order, one unit
/// per call, and the entire state serializes for checkpointing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiveCoteBuilder {
    pub config: HiveCoteConfig,
    components: Vec<ComponentBuild>,
}

impl HiveCoteBuilder {
    pub fn new(train: &LabeledSeriesSet, config: &HiveCoteConfig) -> Result<Self, BuildError> {
        validate(train, config)?;
        let slice = config
            .contract
            .map(|c| c.as_secs_f64() / config.components.len() as f64);
        let components = config
            .components
            .iter()
            .enumerate()
            .map(|(i, comp)| {
                ComponentBuild::new(
                    comp.clone(),
                    seed_mix(config.seed, i as u64),
                    slice,
                    config.cv_folds,
                    train,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            config: config.clone(),
            components,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.components.iter().all(|c| c.is_done())
    }

    /// One unit of work on the first unfinished component.
    pub fn advance(&mut self, train: &LabeledSeriesSet) -> Result<(), BuildError> {
        if let Some(component) = self.components.iter_mut().find(|c| !c.is_done()) {
            component.advance(train)?;
        }
        Ok(())
    }

    pub fn component_names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.name.clone()).collect()
    }

    /// Index of the component the next [`advance`](Self::advance) will work
    /// on, or `None` once the build is complete.
    pub fn active_component(&self) -> Option<usize> {
        self.components.iter().position(|c| !c.is_done())
    }

    pub fn finish(mut self, train: &LabeledSeriesSet) -> Result<HiveCote, BuildError> {
        assert!(self.is_complete(), "finish called before the build is done");
        let components: Vec<TrainedComponent> = self
            .components
            .iter_mut()
            .map(|c| c.take_finished().expect("done component has a result"))
            .collect();
        assemble(train, &self.config, components)
    }

    pub fn run(mut self, train: &LabeledSeriesSet) -> Result<HiveCote, BuildError> {
        while !self.is_complete() {
            self.advance(train)?;
        }
        self.finish(train)
    }
}

fn validate_folds(train: &LabeledSeriesSet, folds: usize) -> Result<(), BuildError> {
    if folds < 2 || folds > train.case_count() {
        return Err(BuildError::InvalidConfig(format!(
            "{} estimation folds need 2 to {} (the number of cases)",
            folds,
            train.case_count()
        )));
    }
    Ok(())
}

fn validate(train: &LabeledSeriesSet, config: &HiveCoteConfig) -> Result<(), BuildError> {
    if config.components.is_empty() {
        return Err(BuildError::InvalidConfig("no components configured".into()));
    }
    if !config.alpha.is_finite() || config.alpha < 0.0 {
        return Err(BuildError::InvalidConfig(format!(
            "weight exponent {} must be finite and non-negative",
            config.alpha
        )));
    }
    validate_folds(train, config.cv_folds)?;
    if let Some(missing) = train.class_counts().iter().position(|&c| c == 0) {
        return Err(BuildError::InvalidData(format!(
            "class {missing} has no training cases"
        )));
    }
    Ok(())
}

fn assemble(
    train: &LabeledSeriesSet,
    config: &HiveCoteConfig,
    components: Vec<TrainedComponent>,
) -> Result<HiveCote, BuildError> {
    let weights: Vec<f64> = components.iter().map(|c| c.train_accuracy).collect();
    let train_probabilities: Vec<Vec<f64>> = (0..train.case_count())
        .map(|i| {
            let rows: Vec<Vec<f64>> = components
                .iter()
                .map(|c| c.train_probabilities[i].clone())
                .collect();
            combine_probabilities(&rows, &weights, config.alpha)
        })
        .collect::<Result<_, _>>()?;
    let train_accuracy = accuracy_of(&train_probabilities, train.labels());
    Ok(HiveCote {
        components,
        alpha: config.alpha,
        class_count: train.class_count(),
        series_length: train.series_length(),
        train_probabilities,
        train_accuracy,
    })
}

/// The fitted meta ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiveCote {
    pub components: Vec<TrainedComponent>,
    pub alpha: f64,
    class_count: usize,
    series_length: usize,
    /// Combined held-out estimates for each training case.
    pub train_probabilities: Vec<Vec<f64>>,
    pub train_accuracy: f64,
}

impl HiveCote {
    pub fn fit(train: &LabeledSeriesSet, config: &HiveCoteConfig) -> Result<HiveCote, BuildError> {
        validate(train, config)?;
        if config.threaded && config.components.len() > 1 {
            fit_threaded(train, config)
        } else {
            HiveCoteBuilder::new(train, config)?.run(train)
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.train_accuracy).collect()
    }

    pub fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, BuildError> {
        let rows: Vec<Vec<f64>> = self
            .components
            .iter()
            .map(|c| c.model.predict_proba(series))
            .collect::<Result<_, _>>()?;
        combine_probabilities(&rows, &self.weights(), self.alpha)
    }

    /// Combined prediction; ties resolve to the lowest class index.
    pub fn predict(&self, series: &[f64]) -> Result<usize, BuildError> {
        Ok(argmax_tie_low(&self.predict_proba(series)?))
    }
}

/// Builds every component in its own thread. Each component receives the
/// whole contract rather than a share of it.
fn fit_threaded(
    train: &LabeledSeriesSet,
    config: &HiveCoteConfig,
) -> Result<HiveCote, BuildError> {
    let slice = config.contract.map(|c| c.as_secs_f64());
    let results: Vec<Result<TrainedComponent, BuildError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .components
            .iter()
            .enumerate()
            .map(|(i, comp)| {
                let comp = comp.clone();
                scope.spawn(move || {
                    let mut build = ComponentBuild::new(
                        comp,
                        seed_mix(config.seed, i as u64),
                        slice,
                        config.cv_folds,
                        train,
                    )?;
                    while !build.is_done() {
                        build.advance(train)?;
                    }
                    Ok(build.take_finished().expect("finished build has a result"))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("component thread panicked"))
            .collect()
    });
    let components = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    assemble(train, config, components)
}
