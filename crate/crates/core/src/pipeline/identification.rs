//! Gesture-window identification: RQA window features, window labelling,
//! class-balanced training with leave-one-subject-out evaluation, and
//! assembly of positive windows into candidate segments.

use std::ops::Range;

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::imu::{Channel, ImuStream, LabeledInterval};
use crate::pipeline::metrics::{ConfusionMatrix, EvaluationReport, FoldResult};
use crate::rng::task_rng;
use crate::rqa::{windowed_rqa, EmbeddingConfig, RpConfig, RqaWindowConfig};
use crate::svm::{ovo_train_scaled, OvoSvmModel, SvmParams};

pub const ADL_CLASS: &str = "ADL";
pub const GESTURE_CLASS: &str = "Gesture";
pub const IDENTIFICATION_FEATURES: [&str; 2] = ["rr", "tra"];

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationConfig {
    pub window: RqaWindowConfig,
    pub embedding: EmbeddingConfig,
    pub rp: RpConfig<f64>,
    /// Share of a gesture's duration a window must cover to count as a gesture window.
    pub overlap_fraction: f64,
    pub n_balance_iters: usize,
    pub params: SvmParams<f64>,
    /// Series the recurrence features are computed on.
    pub channel: Channel,
}

impl Default for IdentificationConfig {
    fn default() -> Self {
        IdentificationConfig {
            window: RqaWindowConfig::default(),
            embedding: EmbeddingConfig::default(),
            rp: RpConfig::default(),
            overlap_fraction: 0.5,
            n_balance_iters: 100,
            params: SvmParams::identification(),
            channel: Channel::ACC_Y,
        }
    }
}

impl IdentificationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_fraction > 0.0 && self.overlap_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "overlap_fraction must be in (0, 1], got {}",
                self.overlap_fraction
            )));
        }
        if self.n_balance_iters == 0 {
            return Err(Error::invalid("n_balance_iters must be at least 1"));
        }
        self.window.validate_for(self.embedding)?;
        self.params.validate()
    }
}

/// Gesture flag per window: true when at least `overlap_fraction` of some
/// gesture interval's duration lies inside the window.
pub fn label_windows(
    stream_len: usize,
    intervals: &[LabeledInterval],
    win: RqaWindowConfig,
    overlap_fraction: f64,
) -> Result<Vec<bool>> {
    if let Some(iv) = intervals
        .iter()
        .find(|iv| iv.start >= iv.end || iv.end > stream_len)
    {
        return Err(Error::invalid(format!(
            "interval [{}, {}) out of bounds for stream of length {stream_len}",
            iv.start, iv.end
        )));
    }
    let gestures: Vec<&LabeledInterval> = intervals
        .iter()
        .filter(|iv| iv.label.is_gesture())
        .collect();
    Ok(win
        .window_starts(stream_len)
        .map(|s| {
            let e = s + win.window_len;
            gestures.iter().any(|iv| {
                let inside = iv.end.min(e).saturating_sub(iv.start.max(s));
                inside as f64 >= overlap_fraction * iv.len() as f64
            })
        })
        .collect())
}

/// `[rr, tra]` per window of the configured channel.
pub fn window_features(stream: &ImuStream, cfg: &IdentificationConfig) -> Result<Vec<Vec<f64>>> {
    let series = stream.channel(cfg.channel);
    Ok(windowed_rqa(&series, cfg.embedding, &cfg.rp, cfg.window)?
        .into_iter()
        .map(|r| vec![r.rr, r.tra])
        .collect())
}

/// Windows of one recording with their gesture flags.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub subject: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl WindowSet {
    pub fn build(
        stream: &ImuStream,
        intervals: &[LabeledInterval],
        cfg: &IdentificationConfig,
    ) -> Result<Self> {
        Ok(WindowSet {
            subject: stream.subject_id().to_string(),
            features: window_features(stream, cfg)?,
            labels: label_windows(stream.len(), intervals, cfg.window, cfg.overlap_fraction)?,
        })
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

fn class_names() -> Vec<String> {
    vec![ADL_CLASS.to_string(), GESTURE_CLASS.to_string()]
}

/// One training draw: every gesture window plus an equal number of ADL windows
/// drawn without replacement (or all ADL windows with an equal gesture draw
/// when ADL is the smaller class).
pub(crate) fn balanced_fit(
    sets: &[&WindowSet],
    cfg: &IdentificationConfig,
    seed: u64,
    path: &[u64],
) -> Result<OvoSvmModel<f64>> {
    let mut pos: Vec<&[f64]> = Vec::new();
    let mut neg: Vec<&[f64]> = Vec::new();
    for s in sets {
        for (row, &l) in s.features.iter().zip(&s.labels) {
            if l {
                pos.push(row);
            } else {
                neg.push(row);
            }
        }
    }
    if pos.is_empty() {
        return Err(Error::invalid("no gesture windows in training data"));
    }
    if neg.is_empty() {
        return Err(Error::invalid("no ADL windows in training data"));
    }
    let n = pos.len().min(neg.len());
    let mut rng = task_rng(seed, path);
    let take = |rows: &[&[f64]], rng: &mut _| -> Vec<Vec<f64>> {
        let mut idx = sample(rng, rows.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| rows[i].to_vec()).collect()
    };
    let mut rows = take(&neg, &mut rng);
    rows.extend(take(&pos, &mut rng));
    let labels: Vec<usize> = (0..2 * n).map(|i| usize::from(i >= n)).collect();
    let scaler = Scaler::fit(&rows)?;
    let scaled = scaler.transform(&rows)?;
    let names = IDENTIFICATION_FEATURES
        .iter()
        .map(|s| s.to_string())
        .collect();
    ovo_train_scaled(&scaled, &labels, class_names(), scaler, names, &cfg.params)
}

pub(crate) fn predict_windows(model: &OvoSvmModel<f64>, rows: &[Vec<f64>]) -> Result<Vec<bool>> {
    rows.iter()
        .map(|r| Ok(model.predict(r)?.class == 1))
        .collect()
}

#[derive(Debug, Clone)]
pub struct IdentificationOutcome {
    /// Trained on one balanced draw over every subject.
    pub model: OvoSvmModel<f64>,
    /// One fold per held-out subject; fold metrics are means over balance
    /// iterations and the confusion matrix sums every iteration of every fold.
    pub report: EvaluationReport,
}

/// Leave-one-subject-out evaluation with `n_balance_iters` balanced draws per
/// fold, then a final model from one balanced draw over all recordings.
pub fn train_identifier(
    recordings: &[(ImuStream, Vec<LabeledInterval>)],
    cfg: &IdentificationConfig,
    seed: u64,
) -> Result<IdentificationOutcome> {
    cfg.validate()?;
    if recordings.is_empty() {
        return Err(Error::invalid("no recordings"));
    }
    let sets = recordings
        .par_iter()
        .map(|(s, iv)| WindowSet::build(s, iv, cfg))
        .collect::<Result<Vec<_>>>()?;
    train_identifier_on_windows(&sets, cfg, seed)
}

pub fn train_identifier_on_windows(
    sets: &[WindowSet],
    cfg: &IdentificationConfig,
    seed: u64,
) -> Result<IdentificationOutcome> {
    cfg.validate()?;
    if sets.iter().all(|s| s.positives() == 0) {
        return Err(Error::invalid("no gesture windows in training data"));
    }
    let mut subjects: Vec<&str> = sets.iter().map(|s| s.subject.as_str()).collect();
    subjects.sort_unstable();
    subjects.dedup();

    let folds: Vec<usize> = if subjects.len() >= 2 {
        (0..subjects.len()).collect()
    } else {
        Vec::new()
    };
    let tasks: Vec<(usize, usize)> = folds
        .iter()
        .flat_map(|&f| (0..cfg.n_balance_iters).map(move |it| (f, it)))
        .collect();
    let outcomes = tasks
        .par_iter()
        .map(|&(f, it)| {
            let held = subjects[f];
            let train: Vec<&WindowSet> = sets.iter().filter(|s| s.subject != held).collect();
            let model = balanced_fit(&train, cfg, seed, &[f as u64, it as u64])?;
            let mut cm = ConfusionMatrix::new(class_names());
            for s in sets.iter().filter(|s| s.subject == held) {
                for (p, &t) in predict_windows(&model, &s.features)?
                    .into_iter()
                    .zip(&s.labels)
                {
                    cm.add(usize::from(t), usize::from(p))?;
                }
            }
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = ConfusionMatrix::new(class_names());
    let mut fold_results = Vec::with_capacity(folds.len());
    for (f, chunk) in outcomes.chunks(cfg.n_balance_iters.max(1)).enumerate() {
        let mut acc = 0.0;
        let mut bal = 0.0;
        for cm in chunk {
            acc += cm.accuracy();
            bal += cm.mean_recall();
            confusion.merge(cm)?;
        }
        let k = chunk.len() as f64;
        fold_results.push(FoldResult {
            subject: subjects[f].to_string(),
            accuracy: acc / k,
            balanced_accuracy: bal / k,
            n_test: (chunk[0].total()) as usize,
        });
    }

    let all: Vec<&WindowSet> = sets.iter().collect();
    let model = balanced_fit(&all, cfg, seed, &[u64::MAX])?;
    Ok(IdentificationOutcome {
        model,
        report: EvaluationReport {
            folds: fold_results,
            confusion,
        },
    })
}

/// Merges runs of consecutive positive windows; each run yields one
/// window-length interval centred on the run's span. An interval that
/// overlaps the previously emitted one is dropped.
pub fn assemble_segments(positive: &[bool], win: RqaWindowConfig) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    let mut k = 0;
    while k < positive.len() {
        if !positive[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k + 1 < positive.len() && positive[k + 1] {
            k += 1;
        }
        let start = (first * win.step + k * win.step) / 2;
        let iv = start..start + win.window_len;
        if out.last().is_none_or(|prev| prev.end <= iv.start) {
            out.push(iv);
        }
        k += 1;
    }
    out
}

/// Candidate gesture intervals in a continuous stream.
pub fn identify_segments(
    stream: &ImuStream,
    model: &OvoSvmModel<f64>,
    cfg: &IdentificationConfig,
) -> Result<Vec<Range<usize>>> {
    if stream.len() < cfg.window.window_len {
        return Err(Error::invalid(format!(
            "stream of length {} shorter than one window ({})",
            stream.len(),
            cfg.window.window_len
        )));
    }
    let positive = predict_windows(model, &window_features(stream, cfg)?)?;
    Ok(assemble_segments(&positive, cfg.window))
}
