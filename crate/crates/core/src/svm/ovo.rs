use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::scalar::Real;

use super::kernel::SvmParams;
use super::smo::{fit_indexed, validate_rows, BinarySvmModel, SmoSettings};

/// One pairwise machine; positive decisions vote for `a`, negative for `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel<T> {
    pub a: usize,
    pub b: usize,
    /// Indices into the model's support-vector pool.
    pub sv: Vec<usize>,
    pub coef: Vec<T>,
    pub bias: T,
}

/// One-against-one ensemble with the scaler and feature names it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct OvoSvmModel<T> {
    pub(crate) classes: Vec<String>,
    pub(crate) params: SvmParams<T>,
    pub(crate) scaler: Scaler<T>,
    pub(crate) feature_names: Vec<String>,
    pub(crate) pool: Vec<Vec<T>>,
    pub(crate) pairs: Vec<PairModel<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvoPrediction<T> {
    pub class: usize,
    pub votes: Vec<usize>,
    /// Decision value of every pair, in model order.
    pub decisions: Vec<T>,
}

impl<T: Real> OvoSvmModel<T> {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn params(&self) -> &SvmParams<T> {
        &self.params
    }

    pub fn scaler(&self) -> &Scaler<T> {
        &self.scaler
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn pairs(&self) -> &[PairModel<T>] {
        &self.pairs
    }

    pub fn num_models(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Materialises the pairwise machine for classes `(a, b)`, `a < b`.
    pub fn binary(&self, a: usize, b: usize) -> Option<BinarySvmModel<T>> {
        let p = self.pairs.iter().find(|p| p.a == a && p.b == b)?;
        Some(BinarySvmModel {
            support: p.sv.iter().map(|&k| self.pool[k].clone()).collect(),
            coef: p.coef.clone(),
            bias: p.bias,
            params: self.params,
        })
    }

    /// Predicts from an unscaled feature row.
    pub fn predict(&self, x: &[T]) -> Result<OvoPrediction<T>> {
        let scaled = self.scaler.transform_row(x)?;
        self.predict_scaled(&scaled)
    }

    pub fn predict_scaled(&self, x: &[T]) -> Result<OvoPrediction<T>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let kernel = &self.params.kernel;
        let kv: Vec<T> = self
            .pool
            .iter()
            .map(|s| kernel.eval_unchecked(s, x))
            .collect();
        let decisions: Vec<T> = self
            .pairs
            .iter()
            .map(|p| {
                p.sv.iter()
                    .zip(&p.coef)
                    .fold(p.bias, |acc, (&k, &c)| acc + c * kv[k])
            })
            .collect();
        Ok(tally(self.classes.len(), &self.pairs, decisions))
    }
}

/// Majority vote; ties go to the largest summed |decision| over won contests,
/// then to the earliest class.
pub(crate) fn tally<T: Real>(
    k: usize,
    pairs: &[PairModel<T>],
    decisions: Vec<T>,
) -> OvoPrediction<T> {
    let mut votes = vec![0usize; k];
    let mut strength = vec![T::zero(); k];
    for (p, &f) in pairs.iter().zip(&decisions) {
        let winner = if f >= T::zero() { p.a } else { p.b };
        votes[winner] += 1;
        strength[winner] = strength[winner] + f.abs();
    }
    let top = votes.iter().copied().max().unwrap_or(0);
    let mut class = usize::MAX;
    for c in (0..k).filter(|&c| votes[c] == top) {
        if class == usize::MAX || strength[c] > strength[class] {
            class = c;
        }
    }
    OvoPrediction {
        class,
        votes,
        decisions,
    }
}

/// Trains one machine per class pair on already-scaled rows.
pub fn ovo_train_scaled<T: Real>(
    rows: &[Vec<T>],
    labels: &[usize],
    classes: Vec<String>,
    scaler: Scaler<T>,
    feature_names: Vec<String>,
    params: &SvmParams<T>,
) -> Result<OvoSvmModel<T>> {
    let k = classes.len();
    if k < 2 {
        return Err(Error::invalid(
            "one-against-one training needs at least 2 classes",
        ));
    }
    if rows.len() != labels.len() {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    let d = validate_rows(rows)?;
    if d != feature_names.len() || d != scaler.dim() {
        return Err(Error::invalid(
            "feature names, scaler and rows disagree on dimension",
        ));
    }
    params.validate()?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        members
            .get_mut(l)
            .ok_or_else(|| Error::invalid(format!("label {l} out of range")))?
            .push(i);
    }
    if let Some(c) = (0..k).find(|&c| members[c].is_empty()) {
        return Err(Error::invalid(format!(
            "class '{}' has no training rows",
            classes[c]
        )));
    }

    let pair_ids: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
        .collect();
    let settings = SmoSettings::default();
    let fits = pair_ids
        .par_iter()
        .map(|&(a, b)| {
            let idx: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
            let sub: Vec<&[T]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
            let y: Vec<i8> = idx
                .iter()
                .map(|&i| if labels[i] == a { 1 } else { -1 })
                .collect();
            fit_indexed(&sub, &y, params, &settings).map(|f| (idx, f))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut used: Vec<usize> = fits
        .iter()
        .flat_map(|(idx, f)| f.support.iter().map(move |&s| idx[s]))
        .collect();
    used.sort_unstable();
    used.dedup();
    let slot = |row: usize| used.binary_search(&row).expect("support row pooled");
    let pairs = pair_ids
        .iter()
        .zip(&fits)
        .map(|(&(a, b), (idx, f))| PairModel {
            a,
            b,
            sv: f.support.iter().map(|&s| slot(idx[s])).collect(),
            coef: f.coef.clone(),
            bias: f.bias,
        })
        .collect();
    Ok(OvoSvmModel {
        classes,
        params: *params,
        scaler,
        feature_names,
        pool: used.iter().map(|&i| rows[i].clone()).collect(),
        pairs,
    })
}

/// Fits a scaler on the dataset and trains the ensemble on the scaled rows.
pub fn ovo_train(dataset: &LabeledDataset, params: &SvmParams<f64>) -> Result<OvoSvmModel<f64>> {
    let scaler = Scaler::fit(dataset.rows())?;
    let scaled = scaler.transform(dataset.rows())?;
    ovo_train_scaled(
        &scaled,
        dataset.labels(),
        dataset.class_names().to_vec(),
        scaler,
        dataset.feature_names().to_vec(),
        params,
    )
}
