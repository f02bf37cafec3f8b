//! Confusion matrices, accuracy metrics and evaluation reports.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_pairs(classes: Vec<String>, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::invalid("truth and predictions differ in length"));
        }
        let mut m = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.add(t, p)?;
        }
        Ok(m)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn add(&mut self, truth: usize, predicted: usize) -> Result<()> {
        let k = self.classes.len();
        if truth >= k || predicted >= k {
            return Err(Error::invalid(format!(
                "class index out of range for {k} classes"
            )));
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            return Err(Error::invalid("confusion matrices differ in classes"));
        }
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in row.iter_mut().zip(o) {
                *c += v;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Number of test items per true class.
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Share of correct predictions; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let hits: u64 = (0..self.classes.len()).map(|c| self.counts[c][c]).sum();
        hits as f64 / total as f64
    }

    /// Mean recall over the classes that occur in the truth.
    pub fn mean_recall(&self) -> f64 {
        let recalls: Vec<f64> = self
            .counts
            .iter()
            .enumerate()
            .filter_map(|(c, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| row[c] as f64 / n as f64)
            })
            .collect();
        if recalls.is_empty() {
            0.0
        } else {
            recalls.iter().sum::<f64>() / recalls.len() as f64
        }
    }

    /// Header `label,<classes>`, then one row per true class.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "label,{}", self.classes.join(","))?;
        for (name, row) in self.classes.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "{name},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `(TPR + TNR) / 2` for counts indexed `[truth][predicted]`, class 1 positive.
pub fn balanced_accuracy(confusion: [[u64; 2]; 2]) -> Result<f64> {
    let neg = confusion[0][0] + confusion[0][1];
    let pos = confusion[1][0] + confusion[1][1];
    if neg == 0 || pos == 0 {
        return Err(Error::invalid(
            "balanced accuracy needs both true classes present",
        ));
    }
    let tpr = confusion[1][1] as f64 / pos as f64;
    let tnr = confusion[0][0] as f64 / neg as f64;
    Ok((tpr + tnr) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub subject: String,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub folds: Vec<FoldResult>,
    /// Summed over folds (and over balance iterations for identification).
    pub confusion: ConfusionMatrix,
}

fn stats(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

impl EvaluationReport {
    /// `(mean, min, max)` of per-fold accuracy.
    pub fn accuracy(&self) -> (f64, f64, f64) {
        stats(self.folds.iter().map(|f| f.accuracy))
    }

    /// `(mean, min, max)` of per-fold balanced accuracy.
    pub fn balanced_accuracy(&self) -> (f64, f64, f64) {
        stats(self.folds.iter().map(|f| f.balanced_accuracy))
    }

    pub fn mean_accuracy(&self) -> f64 {
        self.accuracy().0
    }

    pub fn mean_balanced_accuracy(&self) -> f64 {
        self.balanced_accuracy().0
    }

    /// `fold,subject,accuracy,balanced_accuracy`.
    pub fn write_report_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "fold,subject,accuracy,balanced_accuracy")?;
        for (i, f) in self.folds.iter().enumerate() {
            writeln!(
                out,
                "{},{},{:.6},{:.6}",
                i + 1,
                f.subject,
                f.accuracy,
                f.balanced_accuracy
            )?;
        }
        Ok(())
    }

    /// Writes `report.csv` and `confusion.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut report = Vec::new();
        self.write_report_csv(&mut report)?;
        std::fs::write(dir.join("report.csv"), report)?;
        let mut confusion = Vec::new();
        self.confusion.write_csv(&mut confusion)?;
        std::fs::write(dir.join("confusion.csv"), confusion)?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let (a, amin, amax) = self.accuracy();
        let (b, bmin, bmax) = self.balanced_accuracy();
        format!(
            "{} folds: accuracy {a:.4} [{amin:.4}, {amax:.4}], balanced accuracy {b:.4} [{bmin:.4}, {bmax:.4}]",
            self.folds.len()
        )
    }
}
