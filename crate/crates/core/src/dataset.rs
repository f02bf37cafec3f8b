//! Labelled feature matrices, the unit of training and evaluation.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imu::GestureClass;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_names: Vec<String>,
    class_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    subjects: Vec<String>,
}

impl LabeledDataset {
    pub fn new(feature_names: Vec<String>, class_names: Vec<String>) -> Self {
        LabeledDataset {
            feature_names,
            class_names,
            rows: Vec::new(),
            labels: Vec::new(),
            subjects: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>, label: usize, subject: impl Into<String>) -> Result<()> {
        if row.len() != self.feature_names.len() {
            return Err(Error::invalid(format!(
                "row has {} features, registry has {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        if label >= self.class_names.len() {
            return Err(Error::invalid(format!("label index {label} out of range")));
        }
        self.rows.push(row);
        self.labels.push(label);
        self.subjects.push(subject.into());
        Ok(())
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Distinct subject ids, sorted.
    pub fn subject_ids(&self) -> Vec<String> {
        self.subjects
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Rows whose index satisfies `keep`, in original order.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut out = LabeledDataset::new(self.feature_names.clone(), self.class_names.clone());
        for i in 0..self.len() {
            if keep(i) {
                out.rows.push(self.rows[i].clone());
                out.labels.push(self.labels[i]);
                out.subjects.push(self.subjects[i].clone());
            }
        }
        out
    }

    /// `(everyone else, subject)`.
    pub fn split_by_subject(&self, subject: &str) -> (Self, Self) {
        (
            self.filter(|i| self.subjects[i] != subject),
            self.filter(|i| self.subjects[i] == subject),
        )
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::invalid(format!("column {c} out of range")));
        }
        Ok(LabeledDataset {
            feature_names: cols
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            class_names: self.class_names.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            subjects: self.subjects.clone(),
        })
    }

    /// Same labels and subjects with replaced feature rows.
    pub fn with_rows(&self, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != self.len() {
            return Err(Error::invalid("replacement rows differ in count"));
        }
        let d = rows.first().map_or(self.n_features(), Vec::len);
        if d != self.n_features() || rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("replacement rows differ in width"));
        }
        Ok(LabeledDataset {
            rows,
            ..self.clone()
        })
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.rows
    }

    /// Appends all rows of `other`, which must share registry and classes.
    pub fn extend_from(&mut self, other: &LabeledDataset) -> Result<()> {
        if other.feature_names != self.feature_names || other.class_names != self.class_names {
            return Err(Error::invalid("datasets differ in features or classes"));
        }
        self.rows.extend(other.rows.iter().cloned());
        self.labels.extend_from_slice(&other.labels);
        self.subjects.extend(other.subjects.iter().cloned());
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        for n in &self.feature_names {
            write!(w, "{n},")?;
        }
        writeln!(w, "label,subject")?;
        for ((r, &l), s) in self.rows.iter().zip(&self.labels).zip(&self.subjects) {
            for v in r {
                write!(w, "{v},")?;
            }
            writeln!(w, "{},{s}", self.class_names[l])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    /// Reads a feature matrix. Classes are the labels present, gesture names in
    /// dictionary order first, any other labels after them in lexical order.
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        const CTX: &str = "feature csv";
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let d = headers.len().checked_sub(2).filter(|_| {
            headers.len() >= 2
                && headers[headers.len() - 2] == "label"
                && headers[headers.len() - 1] == "subject"
        });
        let d = d.ok_or_else(|| Error::parse(CTX, 1, "header must end with label,subject"))?;
        let mut raw = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != d + 2 {
                return Err(Error::parse(
                    CTX,
                    line,
                    format!("expected {} fields, found {}", d + 2, rec.len()),
                ));
            }
            let row = (0..d)
                .map(|k| {
                    rec[k]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            Error::parse(
                                CTX,
                                line,
                                format!("bad value '{}' in {}", &rec[k], headers[k]),
                            )
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            raw.push((row, rec[d].to_string(), rec[d + 1].to_string()));
        }
        let present: BTreeSet<&str> = raw.iter().map(|(_, l, _)| l.as_str()).collect();
        let mut classes: Vec<String> = GestureClass::ALL
            .iter()
            .map(|g| g.name())
            .filter(|n| present.contains(n))
            .map(str::to_string)
            .collect();
        classes.extend(
            present
                .iter()
                .filter(|n| n.parse::<GestureClass>().is_err())
                .map(|n| n.to_string()),
        );
        let mut ds = LabeledDataset::new(headers[..d].to_vec(), classes);
        for (row, label, subject) in raw {
            let l = ds
                .class_names
                .iter()
                .position(|c| *c == label)
                .expect("present");
            ds.push(row, l, subject)?;
        }
        Ok(ds)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }
}
