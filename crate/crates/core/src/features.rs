//! Recognition features: per-channel statistics, resampled acceleration
//! samples, the canonical feature registry, and z-score scaling.

use crate::error::{Error, Result};
use crate::imu::{Axis, Channel, ImuStream, Sensor};
use crate::scalar::Real;

/// Samples per acceleration axis used by the recognizer.
pub const DEFAULT_SAMPLES: usize = 10;
/// Number of statistical features (9 channels x 7 statistics).
pub const N_STATISTICAL: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Mean,
    Median,
    Rms,
    Std,
    Var,
    Skew,
    Kurt,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Statistic::Mean,
        Statistic::Median,
        Statistic::Rms,
        Statistic::Std,
        Statistic::Var,
        Statistic::Skew,
        Statistic::Kurt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
            Statistic::Rms => "rms",
            Statistic::Std => "std",
            Statistic::Var => "var",
            Statistic::Skew => "skew",
            Statistic::Kurt => "kurt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Statistical(Channel, Statistic),
    /// 1-based position of a resampled acceleration value.
    Sample(Axis, usize),
}

impl FeatureKind {
    pub fn name(&self) -> String {
        match self {
            FeatureKind::Statistical(ch, st) => format!("{}_{}", ch.name(), st.name()),
            FeatureKind::Sample(axis, k) => format!("acc_{}_s{k}", axis.name()),
        }
    }

    pub fn parse(name: &str) -> Option<FeatureKind> {
        for ch in Channel::all() {
            for st in Statistic::ALL {
                if name == format!("{}_{}", ch.name(), st.name()) {
                    return Some(FeatureKind::Statistical(ch, st));
                }
            }
        }
        let rest = name.strip_prefix("acc_")?;
        let (axis, k) = rest.split_once("_s")?;
        let axis = Axis::ALL.into_iter().find(|a| a.name() == axis)?;
        let k: usize = k.parse().ok().filter(|&k| k >= 1)?;
        Some(FeatureKind::Sample(axis, k))
    }

    pub fn is_statistical(&self) -> bool {
        matches!(self, FeatureKind::Statistical(..))
    }
}

/// Ordered, uniquely named feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    kinds: Vec<FeatureKind>,
    names: Vec<String>,
    sample_count: usize,
}

impl FeatureRegistry {
    fn from_kinds(kinds: Vec<FeatureKind>, sample_count: usize) -> Self {
        let names = kinds.iter().map(FeatureKind::name).collect();
        FeatureRegistry {
            kinds,
            names,
            sample_count,
        }
    }

    /// 63 statistics (sensor x axis x statistic) followed by `3 * samples` acceleration samples.
    pub fn standard(samples: usize) -> Self {
        let mut kinds: Vec<FeatureKind> = Self::statistical_kinds();
        for axis in Axis::ALL {
            kinds.extend((1..=samples).map(|k| FeatureKind::Sample(axis, k)));
        }
        Self::from_kinds(kinds, samples)
    }

    pub fn statistical() -> Self {
        Self::from_kinds(Self::statistical_kinds(), 0)
    }

    pub fn samples_only(samples: usize) -> Self {
        let full = Self::standard(samples);
        full.select(&full.sample_indices())
    }

    fn statistical_kinds() -> Vec<FeatureKind> {
        Channel::all()
            .flat_map(|ch| {
                Statistic::ALL
                    .into_iter()
                    .map(move |st| FeatureKind::Statistical(ch, st))
            })
            .collect()
    }

    /// Rebuilds a registry from column names; every name must be recognised and
    /// unique. The resampling length is the largest sample position present.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut kinds = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let kind = FeatureKind::parse(n)
                .ok_or_else(|| Error::invalid(format!("unknown feature '{n}'")))?;
            if kinds.contains(&kind) {
                return Err(Error::invalid(format!("duplicate feature '{n}'")));
            }
            kinds.push(kind);
        }
        let samples = kinds
            .iter()
            .filter_map(|k| match k {
                FeatureKind::Sample(_, s) => Some(*s),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        if samples == 1 {
            return Err(Error::invalid(
                "sample features need at least 2 samples per axis",
            ));
        }
        Ok(Self::from_kinds(kinds, samples))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn statistical_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.kinds[i].is_statistical())
            .collect()
    }

    pub fn sample_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.kinds[i].is_statistical())
            .collect()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let kinds: Vec<FeatureKind> = indices.iter().map(|&i| self.kinds[i]).collect();
        let samples = if kinds.iter().any(|k| !k.is_statistical()) {
            self.sample_count
        } else {
            0
        };
        Self::from_kinds(kinds, samples)
    }

    /// Column indices of `other`'s features within `self`.
    pub fn locate(&self, other: &FeatureRegistry) -> Result<Vec<usize>> {
        other
            .names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| Error::invalid(format!("feature '{n}' not available")))
            })
            .collect()
    }

    /// Resampling length behind the sample features (0 when there are none).
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Computes this registry's features for one segment.
    pub fn extract(&self, segment: &ImuStream) -> Result<Vec<f64>> {
        let stats = statistical_features(segment)?;
        let resampled = if self.sample_count > 0 {
            sample_features(segment, self.sample_count)?
        } else {
            Vec::new()
        };
        Ok(self
            .kinds
            .iter()
            .map(|k| match *k {
                FeatureKind::Statistical(ch, st) => {
                    let ci = Channel::all().position(|c| c == ch).expect("channel");
                    let si = Statistic::ALL
                        .iter()
                        .position(|&x| x == st)
                        .expect("statistic");
                    stats[ci * Statistic::ALL.len() + si]
                }
                FeatureKind::Sample(axis, pos) => {
                    resampled[axis as usize * self.sample_count + pos - 1]
                }
            })
            .collect())
    }
}

/// Population moment summary of one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub median: T,
    pub rms: T,
    pub std: T,
    pub var: T,
    pub skew: T,
    pub kurt: T,
}

impl<T: Real> Moments<T> {
    /// Population moments; skewness `m3/m2^1.5`, non-excess kurtosis `m4/m2^2`,
    /// both 0 for a constant series.
    pub fn of(series: &[T]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("moments of an empty series"));
        }
        let n = T::of_usize(series.len());
        let mean = series.iter().copied().sum::<T>() / n;
        let (mut m2, mut m3, mut m4, mut sq) = (T::zero(), T::zero(), T::zero(), T::zero());
        for &v in series {
            let d = v - mean;
            let d2 = d * d;
            m2 = m2 + d2;
            m3 = m3 + d2 * d;
            m4 = m4 + d2 * d2;
            sq = sq + v * v;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        let (skew, kurt) = if m2 > T::zero() {
            (m3 / m2.powf(T::of(1.5)), m4 / (m2 * m2))
        } else {
            (T::zero(), T::zero())
        };
        Ok(Moments {
            mean,
            median: median(series),
            rms: (sq / n).sqrt(),
            std: m2.sqrt(),
            var: m2,
            skew,
            kurt,
        })
    }

    pub fn get(&self, stat: Statistic) -> T {
        match stat {
            Statistic::Mean => self.mean,
            Statistic::Median => self.median,
            Statistic::Rms => self.rms,
            Statistic::Std => self.std,
            Statistic::Var => self.var,
            Statistic::Skew => self.skew,
            Statistic::Kurt => self.kurt,
        }
    }
}

fn median<T: Real>(series: &[T]) -> T {
    let mut v = series.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

/// The 63 statistics in registry order.
pub fn statistical_features(segment: &ImuStream) -> Result<Vec<f64>> {
    if segment.len() < 2 {
        return Err(Error::invalid(format!(
            "segment of length {} too short for statistics",
            segment.len()
        )));
    }
    let mut out = Vec::with_capacity(N_STATISTICAL);
    for ch in Channel::all() {
        let m = Moments::of(&segment.channel(ch))?;
        out.extend(Statistic::ALL.iter().map(|&s| m.get(s)));
    }
    Ok(out)
}

/// Linear interpolation at positions `i·(n-1)/(s-1)`, endpoints exact.
pub fn resample_linear<T: Real>(series: &[T], s: usize) -> Result<Vec<T>> {
    if s < 2 {
        return Err(Error::invalid(format!(
            "resample target must be >= 2, got {s}"
        )));
    }
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "cannot resample a series of length {n}"
        )));
    }
    let scale = T::of_usize(n - 1) / T::of_usize(s - 1);
    Ok((0..s)
        .map(|i| {
            if i == s - 1 {
                return series[n - 1];
            }
            let pos = T::of_usize(i) * scale;
            let k = pos.floor().to_usize().unwrap_or(0).min(n - 2);
            let frac = pos - T::of_usize(k);
            if frac == T::zero() {
                series[k]
            } else {
                series[k] + (series[k + 1] - series[k]) * frac
            }
        })
        .collect())
}

/// `[x_1..x_S, y_1..y_S, z_1..z_S]` of resampled acceleration.
pub fn sample_features(segment: &ImuStream, s: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * s);
    for axis in Axis::ALL {
        out.extend(resample_linear(
            &segment.channel(Channel::new(Sensor::Acc, axis)),
            s,
        )?);
    }
    Ok(out)
}

/// Statistical followed by sample features, matching [`FeatureRegistry::standard`].
pub fn segment_features(segment: &ImuStream, s: usize) -> Result<Vec<f64>> {
    let mut v = statistical_features(segment)?;
    v.extend(sample_features(segment, s)?);
    Ok(v)
}

/// Per-column z-score parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> Scaler<T> {
    pub fn fit<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on zero rows"))?;
        let d = first.as_ref().len();
        let n = T::of_usize(rows.len());
        let mut mean = vec![T::zero(); d];
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::invalid(format!(
                    "row has {} columns, expected {d}",
                    r.len()
                )));
            }
            for (m, &v) in mean.iter_mut().zip(r) {
                *m = *m + v;
            }
        }
        mean.iter_mut().for_each(|m| *m = *m / n);
        let mut var = vec![T::zero(); d];
        for r in rows {
            for ((s, &v), &m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                *s = *s + (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Ok(Scaler { mean, std })
    }

    pub fn identity(d: usize) -> Self {
        Scaler {
            mean: vec![T::zero(); d],
            std: vec![T::one(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.dim() {
            return Err(Error::invalid(format!(
                "row has {} columns, scaler expects {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s > T::zero() { (v - m) / s } else { v - m })
            .collect())
    }

    pub fn transform<R: AsRef<[T]>>(&self, rows: &[R]) -> Result<Vec<Vec<T>>> {
        rows.iter()
            .map(|r| self.transform_row(r.as_ref()))
            .collect()
    }
}

pub type ScaledSplit<T> = (Scaler<T>, Vec<Vec<T>>, Vec<Vec<T>>);

/// Fits on `train` and scales both `train` and `other` with the train statistics.
pub fn standardize<T: Real, R: AsRef<[T]>>(train: &[R], other: &[R]) -> Result<ScaledSplit<T>> {
    let scaler = Scaler::fit(train)?;
    let a = scaler.transform(train)?;
    let b = scaler.transform(other)?;
    Ok((scaler, a, b))
}
