//! Permutation feature importance and importance-based feature selection.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::FeatureRegistry;
use crate::pipeline::recognition::{confusion_on, Trainer};
use crate::rng::{derive_seed, task_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceOptions {
    pub n_reps: usize,
    pub seed: u64,
}

impl Default for ImportanceOptions {
    fn default() -> Self {
        ImportanceOptions {
            n_reps: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub name: String,
    /// Held-out accuracy for each repetition.
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// `baseline - mean_accuracy`.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Held-out accuracy with no column permuted.
    pub baseline: f64,
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    /// `feature,mean_accuracy,drop`; the first data row is the unpermuted
    /// baseline under the name `baseline`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "feature,mean_accuracy,drop")?;
        writeln!(out, "baseline,{:.6},{:.6}", self.baseline, 0.0)?;
        for f in &self.features {
            writeln!(out, "{},{:.6},{:.6}", f.name, f.mean_accuracy, f.drop)?;
        }
        Ok(())
    }
}

/// Train/test split used for one importance run. With three or more subjects
/// every third subject (sorted by id, starting with the third) is held out; with
/// two, the second; with one, every third row.
pub fn holdout_split(dataset: &LabeledDataset) -> (LabeledDataset, LabeledDataset) {
    let ids = dataset.subject_ids();
    let held: Vec<&String> = match ids.len() {
        0 | 1 => {
            return (
                dataset.filter(|i| i % 3 != 2),
                dataset.filter(|i| i % 3 == 2),
            );
        }
        2 => vec![&ids[1]],
        _ => ids.iter().skip(2).step_by(3).collect(),
    };
    let is_test = |i: usize| held.iter().any(|s| **s == dataset.subjects()[i]);
    (dataset.filter(|i| !is_test(i)), dataset.filter(is_test))
}

fn holdout_accuracy<T: Trainer>(dataset: &LabeledDataset, trainer: &T, seed: u64) -> Result<f64> {
    let (train, test) = holdout_split(dataset);
    if test.is_empty() || train.is_empty() {
        return Err(Error::invalid("dataset too small for a held-out split"));
    }
    let model = trainer.train(&train, seed)?;
    Ok(confusion_on(&model, &test)?.accuracy())
}

/// For each feature and repetition, shuffles that column across all rows
/// (seeded by `(seed, feature, rep)`), retrains and scores on the held-out
/// split. The trainer seed is the same for every run, so differences come
/// from the permutation alone.
pub fn permutation_importance<T: Trainer>(
    dataset: &LabeledDataset,
    trainer: &T,
    opts: &ImportanceOptions,
) -> Result<ImportanceReport> {
    if opts.n_reps == 0 {
        return Err(Error::invalid("n_reps must be at least 1"));
    }
    let d = dataset.n_features();
    let varies = |c: usize| dataset.rows().iter().any(|r| r[c] != dataset.rows()[0][c]);
    if dataset.is_empty() || !(0..d).any(varies) {
        return Err(Error::invalid("every feature is constant; nothing to rank"));
    }
    let train_seed = derive_seed(opts.seed, &[u64::MAX]);
    let baseline = holdout_accuracy(dataset, trainer, train_seed)?;

    let tasks: Vec<(usize, usize)> = (0..d)
        .flat_map(|c| (0..opts.n_reps).map(move |r| (c, r)))
        .collect();
    let scores = tasks
        .par_iter()
        .map(|&(c, r)| {
            let mut column: Vec<f64> = dataset.rows().iter().map(|row| row[c]).collect();
            column.shuffle(&mut task_rng(opts.seed, &[c as u64, r as u64]));
            let rows = dataset
                .rows()
                .iter()
                .zip(column)
                .map(|(row, v)| {
                    let mut row = row.clone();
                    row[c] = v;
                    row
                })
                .collect();
            holdout_accuracy(&dataset.with_rows(rows)?, trainer, train_seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let features = dataset
        .feature_names()
        .iter()
        .zip(scores.chunks(opts.n_reps))
        .map(|(name, acc)| {
            let mean = acc.iter().sum::<f64>() / acc.len() as f64;
            FeatureImportance {
                name: name.clone(),
                accuracies: acc.to_vec(),
                mean_accuracy: mean,
                drop: baseline - mean,
            }
        })
        .collect();
    Ok(ImportanceReport { baseline, features })
}

/// Columns of `registry` to keep: the `k` statistical features with the
/// largest accuracy drop (ties broken by registry order) plus every sample
/// feature, returned in registry order.
pub fn select_features(
    registry: &FeatureRegistry,
    importance: &ImportanceReport,
    k: usize,
) -> Result<Vec<usize>> {
    let stats = registry.statistical_indices();
    if k > stats.len() {
        return Err(Error::invalid(format!(
            "cannot keep {k} of {} statistical features",
            stats.len()
        )));
    }
    let drops: Vec<f64> = stats
        .iter()
        .map(|&c| {
            let name = &registry.names()[c];
            importance
                .features
                .iter()
                .find(|f| &f.name == name)
                .map(|f| f.drop)
                .ok_or_else(|| Error::invalid(format!("importance missing for feature '{name}'")))
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| drops[b].total_cmp(&drops[a]).then(a.cmp(&b)));
    let mut keep: Vec<usize> = order[..k].iter().map(|&i| stats[i]).collect();
    keep.extend(registry.sample_indices());
    keep.sort_unstable();
    Ok(keep)
}
