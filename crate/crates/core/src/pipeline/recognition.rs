//! Recognition: segment featurisation, trainers, noise augmentation and
//! leave-one-subject-out evaluation.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::{FeatureRegistry, Scaler};
use crate::forest::{forest_train, ForestConfig, RandomForest};
use crate::imu::{extract_segment, GestureClass, ImuStream, Label, LabeledInterval};
use crate::pipeline::importance::{permutation_importance, select_features, ImportanceOptions};
use crate::pipeline::metrics::{ConfusionMatrix, EvaluationReport, FoldResult};
use crate::rng::{derive_seed, task_rng};
use crate::svm::{ovo_train_scaled, OvoSvmModel, SvmParams};

pub trait Predictor: Send + Sync {
    /// Class index for a raw (unscaled) feature row.
    fn predict(&self, row: &[f64]) -> Result<usize>;
}

/// Fits a model on a training set. `seed` drives any randomness so a fold's
/// model depends only on its training rows and the seed.
pub trait Trainer: Sync {
    type Model: Predictor;

    fn train(&self, train: &LabeledDataset, seed: u64) -> Result<Self::Model>;
}

impl Predictor for OvoSvmModel<f64> {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        Ok(OvoSvmModel::predict(self, row)?.class)
    }
}

impl Predictor for RandomForest<f64> {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        Ok(RandomForest::predict(self, row))
    }
}

/// Confusion matrix of `model` on `test`.
pub fn confusion_on<P: Predictor + ?Sized>(
    model: &P,
    test: &LabeledDataset,
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(test.class_names().to_vec());
    for (row, &label) in test.rows().iter().zip(test.labels()) {
        cm.add(label, model.predict(row)?)?;
    }
    Ok(cm)
}

/// Adds, for every row, a copy perturbed by independent `N(0, sigma²)` noise
/// per feature. Labels and subjects of the copies match their originals.
pub fn noise_augment(train: &LabeledDataset, sigma: f64, seed: u64) -> Result<LabeledDataset> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let mut rng = task_rng(seed, &[]);
    let noisy: Vec<Vec<f64>> = train
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + sigma * z
                })
                .collect()
        })
        .collect();
    let mut out = train.clone();
    out.extend_from(&train.with_rows(noisy)?)?;
    Ok(out)
}

/// Standardise on the training rows, optionally augment the standardised rows,
/// then train a one-against-one SVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmTrainer {
    pub params: SvmParams<f64>,
    pub augment_sigma: Option<f64>,
}

impl SvmTrainer {
    pub fn new(params: SvmParams<f64>) -> Self {
        SvmTrainer {
            params,
            augment_sigma: None,
        }
    }

    pub fn recognition() -> Self {
        Self::new(SvmParams::recognition())
    }

    pub fn with_augmentation(mut self, sigma: f64) -> Self {
        self.augment_sigma = Some(sigma);
        self
    }
}

impl Trainer for SvmTrainer {
    type Model = OvoSvmModel<f64>;

    fn train(&self, train: &LabeledDataset, seed: u64) -> Result<Self::Model> {
        let scaler = Scaler::fit(train.rows())?;
        let mut scaled = train.with_rows(scaler.transform(train.rows())?)?;
        if let Some(sigma) = self.augment_sigma {
            scaled = noise_augment(&scaled, sigma, seed)?;
        }
        ovo_train_scaled(
            scaled.rows(),
            scaled.labels(),
            train.class_names().to_vec(),
            scaler,
            train.feature_names().to_vec(),
            &self.params,
        )
    }
}

/// Random forest; the per-call seed replaces `cfg.seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestTrainer {
    pub cfg: ForestConfig,
}

impl Trainer for ForestTrainer {
    type Model = RandomForest<f64>;

    fn train(&self, train: &LabeledDataset, seed: u64) -> Result<Self::Model> {
        let cfg = ForestConfig { seed, ..self.cfg };
        forest_train(train.rows(), train.labels(), train.n_classes(), &cfg)
    }
}

/// A model that reads only some columns of the full feature row.
#[derive(Debug, Clone)]
pub struct SelectedModel<M> {
    pub columns: Vec<usize>,
    pub feature_names: Vec<String>,
    pub inner: M,
}

impl<M: Predictor> Predictor for SelectedModel<M> {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        let picked: Vec<f64> = self
            .columns
            .iter()
            .map(|&c| {
                row.get(c)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("row lacks column {c}")))
            })
            .collect::<Result<_>>()?;
        self.inner.predict(&picked)
    }
}

/// Ranks the statistical features by permutation importance on the training
/// set, keeps the `k` most important plus every sample feature, and trains
/// the inner SVM on those columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectingTrainer {
    pub svm: SvmTrainer,
    pub k: usize,
    /// Repetitions per feature for the inner importance run.
    pub importance_reps: usize,
}

impl SelectingTrainer {
    pub const DEFAULT_K: usize = 43;

    pub fn new(svm: SvmTrainer, importance_reps: usize) -> Self {
        SelectingTrainer {
            svm,
            k: Self::DEFAULT_K,
            importance_reps,
        }
    }

    /// Column indices (in `train`'s order) chosen for this training set.
    pub fn select(&self, train: &LabeledDataset, seed: u64) -> Result<Vec<usize>> {
        let registry = FeatureRegistry::from_names(train.feature_names())?;
        let stats = registry.statistical_indices();
        if self.k >= stats.len() {
            return Ok((0..registry.len()).collect());
        }
        let stat_ds = train.select_columns(&stats)?;
        // Ranking uses untuned settings (gamma = 1/d), as the selection
        // precedes hyperparameter tuning.
        let ranker = SvmTrainer::new(SvmParams::exploratory(stats.len()));
        let opts = ImportanceOptions {
            n_reps: self.importance_reps,
            seed,
        };
        let report = permutation_importance(&stat_ds, &ranker, &opts)?;
        select_features(&registry, &report, self.k)
    }
}

impl Trainer for SelectingTrainer {
    type Model = SelectedModel<OvoSvmModel<f64>>;

    fn train(&self, train: &LabeledDataset, seed: u64) -> Result<Self::Model> {
        let columns = self.select(train, derive_seed(seed, &[1]))?;
        let sub = train.select_columns(&columns)?;
        let inner = self.svm.train(&sub, derive_seed(seed, &[2]))?;
        Ok(SelectedModel {
            columns,
            feature_names: sub.feature_names().to_vec(),
            inner,
        })
    }
}

/// One fold per subject (sorted by id): train on everyone else, test on the
/// held-out subject. Fold `f` trains with seed `derive_seed(seed, [f])`.
pub fn loso_evaluate<T: Trainer>(
    dataset: &LabeledDataset,
    trainer: &T,
    seed: u64,
) -> Result<EvaluationReport> {
    let subjects = dataset.subject_ids();
    if subjects.len() < 2 {
        return Err(Error::invalid(format!(
            "need ≥2 subjects for leave-one-subject-out evaluation, found {}",
            subjects.len()
        )));
    }
    let folds = subjects
        .par_iter()
        .enumerate()
        .map(|(f, subject)| {
            let (train, test) = dataset.split_by_subject(subject);
            let model = trainer.train(&train, derive_seed(seed, &[f as u64]))?;
            let cm = confusion_on(&model, &test)?;
            Ok((
                FoldResult {
                    subject: subject.clone(),
                    accuracy: cm.accuracy(),
                    balanced_accuracy: cm.mean_recall(),
                    n_test: test.len(),
                },
                cm,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = ConfusionMatrix::new(dataset.class_names().to_vec());
    for (_, cm) in &folds {
        confusion.merge(cm)?;
    }
    Ok(EvaluationReport {
        folds: folds.into_iter().map(|(f, _)| f).collect(),
        confusion,
    })
}

/// Featurises every gesture interval of every recording; classes are the
/// twelve gestures in canonical order.
pub fn segment_dataset(
    recordings: &[(ImuStream, Vec<LabeledInterval>)],
    registry: &FeatureRegistry,
) -> Result<LabeledDataset> {
    let per_recording = recordings
        .par_iter()
        .map(|(stream, intervals)| {
            intervals
                .iter()
                .filter_map(|iv| match iv.label {
                    Label::Gesture(g) => Some((g, iv)),
                    Label::Adl => None,
                })
                .map(|(g, iv)| Ok((registry.extract(&extract_segment(stream, iv)?)?, g)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ds = LabeledDataset::new(registry.names().to_vec(), GestureClass::names());
    for ((stream, _), rows) in recordings.iter().zip(per_recording) {
        for (row, g) in rows {
            ds.push(row, g.index(), stream.subject_id())?;
        }
    }
    Ok(ds)
}
