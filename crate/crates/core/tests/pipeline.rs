use std::collections::BTreeSet;
use std::sync::Mutex;

use proptest::prelude::*;

use gesturekeeper::forest::{forest_train, ForestConfig};
use gesturekeeper::pipeline::{
    end_to_end_evaluate, loso_evaluate, segment_dataset, IdentificationConfig, Predictor,
    SelectedModel, SelectingTrainer, SvmTrainer, Trainer,
};
use gesturekeeper::svm::{write_model, OvoSvmModel, SvmParams};
use gesturekeeper::synthgen::{generate_dataset, SynthConfig, SynthCorpus};
use gesturekeeper::{FeatureRegistry, LabeledDataset};

fn corpus(subjects: usize, reps: usize, id_subjects: usize, seed: u64) -> SynthCorpus {
    generate_dataset(&SynthConfig {
        n_subjects: subjects,
        reps,
        identification_subjects: id_subjects,
        adl_minutes: 6.0,
        gesture_fraction: 0.02,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn segments(c: &SynthCorpus) -> LabeledDataset {
    let recs: Vec<_> = c
        .recognition
        .iter()
        .map(|r| (r.stream.clone(), r.intervals.clone()))
        .collect();
    segment_dataset(&recs, &FeatureRegistry::standard(10)).unwrap()
}

/// Wraps a trainer and keeps, per call, the training subjects and the model bytes.
struct Recording<'a> {
    inner: &'a SelectingTrainer,
    seen: Mutex<Vec<(BTreeSet<String>, Vec<u8>)>>,
}

impl Trainer for Recording<'_> {
    type Model = SelectedModel<OvoSvmModel<f64>>;

    fn train(&self, train: &LabeledDataset, seed: u64) -> gesturekeeper::Result<Self::Model> {
        let model = self.inner.train(train, seed)?;
        let mut bytes = format!("{:?}\n", model.columns).into_bytes();
        write_model(&model.inner, &mut bytes)?;
        let subjects = train.subject_ids().into_iter().collect();
        self.seen.lock().unwrap().push((subjects, bytes));
        Ok(model)
    }
}

#[test]
fn folds_never_see_the_test_subject() {
    let ds = segments(&corpus(4, 2, 0, 3));
    let selecting = SelectingTrainer::new(SvmTrainer::recognition(), 1);
    let run = |data: &LabeledDataset| {
        let rec = Recording {
            inner: &selecting,
            seen: Mutex::new(Vec::new()),
        };
        let report = loso_evaluate(data, &rec, 17).unwrap();
        let mut seen = rec.seen.into_inner().unwrap();
        seen.sort();
        (report, seen)
    };
    let (report, seen) = run(&ds);
    let all: BTreeSet<String> = ds.subject_ids().into_iter().collect();
    assert_eq!(report.folds.len(), all.len());
    for fold in &report.folds {
        let expected: BTreeSet<String> = all
            .iter()
            .filter(|s| **s != fold.subject)
            .cloned()
            .collect();
        assert!(
            seen.iter().any(|(s, _)| *s == expected),
            "no fold trained without {}",
            fold.subject
        );
    }

    // Scramble the held-out subject of one fold; that fold's model must not move.
    let victim = "S03";
    let mut altered = ds.clone();
    for (i, row) in altered.rows_mut().iter_mut().enumerate() {
        if ds.subjects()[i] == victim {
            row.iter_mut().for_each(|v| *v = *v * 3.0 + 1.0);
        }
    }
    let (_, seen_altered) = run(&altered);
    let without: BTreeSet<String> = all.iter().filter(|s| *s != victim).cloned().collect();
    let pick = |v: &[(BTreeSet<String>, Vec<u8>)]| {
        v.iter().find(|(s, _)| *s == without).unwrap().1.clone()
    };
    assert_eq!(pick(&seen), pick(&seen_altered));
    assert_ne!(seen, seen_altered);
}

#[test]
fn selected_recogniser_is_reproducible() {
    let ds = segments(&corpus(3, 2, 0, 8));
    let t = SelectingTrainer::new(SvmTrainer::recognition(), 1);
    let a = loso_evaluate(&ds, &t, 99).unwrap();
    let b = loso_evaluate(&ds, &t, 99).unwrap();
    assert_eq!(a.confusion, b.confusion);
    assert_eq!(a.folds, b.folds);
}

#[test]
fn forest_fits_training_data_at_least_as_well_as_one_tree() {
    let ds = segments(&corpus(4, 2, 0, 12));
    let fit = |n_trees: usize, seed: u64| {
        let cfg = ForestConfig {
            n_trees,
            seed,
            ..ForestConfig::default()
        };
        let f = forest_train(ds.rows(), ds.labels(), ds.n_classes(), &cfg).unwrap();
        let hits = ds
            .rows()
            .iter()
            .zip(ds.labels())
            .filter(|(r, &l)| f.predict(r) == l)
            .count();
        hits as f64 / ds.len() as f64
    };
    for seed in 0..5 {
        let (one, many) = (fit(1, seed), fit(15, seed));
        assert!(many >= one, "seed {seed}: forest {many} < tree {one}");
    }
}

#[test]
fn end_to_end_runs_on_synthetic_streams() {
    let c = corpus(3, 2, 2, 21);
    let ds = segments(&c);
    let recs: Vec<_> = c
        .identification
        .iter()
        .map(|r| (r.stream.clone(), r.intervals.clone()))
        .collect();
    let cfg = IdentificationConfig {
        n_balance_iters: 3,
        ..IdentificationConfig::default()
    };
    let report = end_to_end_evaluate(
        &recs,
        &ds,
        &SvmTrainer::new(SvmParams::recognition()),
        &cfg,
        4,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 2);
    for (row, rec) in report.rows.iter().zip(&recs) {
        assert_eq!(row.gestures, rec.1.len());
        assert!(row.detected <= row.gestures && row.recognised <= row.detected);
    }
    let detected: usize = report.rows.iter().map(|r| r.detected).sum();
    assert_eq!(report.confusion.total() as usize, detected);
}

fn toy(n_subjects: usize, per: usize) -> LabeledDataset {
    let mut d = LabeledDataset::new(vec!["a".into(), "b".into()], vec!["x".into(), "y".into()]);
    for s in 0..n_subjects {
        for i in 0..per {
            let v = i as f64;
            d.push(vec![v, s as f64], i % 2, format!("P{s:02}"))
                .unwrap();
        }
    }
    d
}

struct Constant;

impl Predictor for Constant {
    fn predict(&self, _: &[f64]) -> gesturekeeper::Result<usize> {
        Ok(0)
    }
}

struct ConstantTrainer;

impl Trainer for ConstantTrainer {
    type Model = Constant;

    fn train(&self, _: &LabeledDataset, _: u64) -> gesturekeeper::Result<Constant> {
        Ok(Constant)
    }
}

proptest! {
    #[test]
    fn one_fold_per_subject(n in 2usize..12, per in 1usize..6) {
        let r = loso_evaluate(&toy(n, per), &ConstantTrainer, 0).unwrap();
        prop_assert_eq!(r.folds.len(), n);
        prop_assert_eq!(r.confusion.total() as usize, n * per);
    }
}
