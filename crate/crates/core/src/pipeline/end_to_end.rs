//! Identification followed by recognition on continuous recordings.

use std::io::Write;

use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::FeatureRegistry;
use crate::imu::{extract_segment, ImuStream, Label, LabeledInterval};
use crate::pipeline::identification::{
    assemble_segments, balanced_fit, predict_windows, IdentificationConfig, WindowSet,
};
use crate::pipeline::metrics::ConfusionMatrix;
use crate::pipeline::recognition::{Predictor, Trainer};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndRow {
    pub subject: String,
    /// Ground-truth gestures in the recording.
    pub gestures: usize,
    /// Intervals emitted by the identifier.
    pub candidates: usize,
    /// Gestures covered by a candidate (same overlap rule as window labelling).
    pub detected: usize,
    /// Detected gestures whose candidate segment was recognised correctly.
    pub recognised: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub rows: Vec<EndToEndRow>,
    /// Recognition of detected gestures, summed over subjects.
    pub confusion: ConfusionMatrix,
}

impl EndToEndReport {
    /// `subject,gestures,candidates,detected,recognised`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "subject,gestures,candidates,detected,recognised")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.subject, r.gestures, r.candidates, r.detected, r.recognised
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let sum = |f: fn(&EndToEndRow) -> usize| self.rows.iter().map(f).sum::<usize>();
        let (g, c, d, r) = (
            sum(|r| r.gestures),
            sum(|r| r.candidates),
            sum(|r| r.detected),
            sum(|r| r.recognised),
        );
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        format!(
            "{g} gestures, {c} candidates: detection recall {:.4}, candidate precision {:.4}, recognition of detected {:.4}",
            ratio(d, g),
            ratio(d, c),
            ratio(r, d)
        )
    }
}

/// The recogniser is trained once on `segments` (subjects disjoint from the
/// recordings). Each recording's identifier is trained on one balanced draw
/// from the other recordings, so no recording is scored by a model that saw it.
pub fn end_to_end_evaluate<T: Trainer>(
    recordings: &[(ImuStream, Vec<LabeledInterval>)],
    segments: &LabeledDataset,
    trainer: &T,
    cfg: &IdentificationConfig,
    seed: u64,
) -> Result<EndToEndReport> {
    cfg.validate()?;
    if recordings.len() < 2 {
        return Err(Error::invalid(
            "need ≥2 recordings for held-out identification",
        ));
    }
    let registry = FeatureRegistry::from_names(segments.feature_names())?;
    let recogniser = trainer.train(segments, derive_seed(seed, &[0]))?;
    let sets = recordings
        .par_iter()
        .map(|(s, iv)| WindowSet::build(s, iv, cfg))
        .collect::<Result<Vec<_>>>()?;

    let per = recordings
        .par_iter()
        .enumerate()
        .map(|(f, (stream, intervals))| {
            let others: Vec<&WindowSet> = sets
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != f)
                .map(|(_, s)| s)
                .collect();
            let identifier = balanced_fit(&others, cfg, seed, &[1, f as u64])?;
            let positive = predict_windows(&identifier, &sets[f].features)?;
            let candidates = assemble_segments(&positive, cfg.window);
            let mut cm = ConfusionMatrix::new(segments.class_names().to_vec());
            let mut row = EndToEndRow {
                subject: stream.subject_id().to_string(),
                gestures: 0,
                candidates: candidates.len(),
                detected: 0,
                recognised: 0,
            };
            for iv in intervals {
                let Label::Gesture(g) = iv.label else {
                    continue;
                };
                row.gestures += 1;
                let hit = candidates.iter().find(|c| {
                    let inside = iv.end.min(c.end).saturating_sub(iv.start.max(c.start));
                    inside as f64 >= cfg.overlap_fraction * iv.len() as f64
                });
                let Some(c) = hit else { continue };
                row.detected += 1;
                let cut = LabeledInterval {
                    start: c.start,
                    end: c.end.min(stream.len()),
                    label: iv.label,
                    subject_id: iv.subject_id.clone(),
                };
                let predicted =
                    recogniser.predict(&registry.extract(&extract_segment(stream, &cut)?)?)?;
                cm.add(g.index(), predicted)?;
                if predicted == g.index() {
                    row.recognised += 1;
                }
            }
            Ok((row, cm))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = ConfusionMatrix::new(segments.class_names().to_vec());
    for (_, cm) in &per {
        confusion.merge(cm)?;
    }
    Ok(EndToEndReport {
        rows: per.into_iter().map(|(r, _)| r).collect(),
        confusion,
    })
}
