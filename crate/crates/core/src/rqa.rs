//! Recurrence quantification: delay embedding, recurrence plots, recurrence
//! rate and transitivity, AMI/FNN parameter estimation and windowed features.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of AMI histogram bins used when none is given.
pub const DEFAULT_AMI_BINS: usize = 16;
/// FNN distance-ratio threshold.
pub const FNN_RTOL: f64 = 10.0;
/// FNN attractor-size threshold.
pub const FNN_ATOL: f64 = 2.0;
/// FNN fraction below which a dimension is accepted.
pub const FNN_ACCEPT: f64 = 0.01;
/// Largest embedding dimension tried by [`estimate_dimension`].
pub const MAX_EMBEDDING_DIM: usize = 10;
/// Threshold tuned on the collected data; preferred over the rule of thumb.
pub const TUNED_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingConfig {
    pub m: usize,
    pub tau: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig { m: 4, tau: 1 }
    }
}

impl EmbeddingConfig {
    pub fn new(m: usize, tau: usize) -> Result<Self> {
        if m == 0 || tau == 0 {
            return Err(Error::invalid(format!(
                "embedding needs m >= 1 and tau >= 1 (got m={m}, tau={tau})"
            )));
        }
        Ok(EmbeddingConfig { m, tau })
    }

    /// Samples spanned by one state beyond its first: `(m-1)·tau`.
    pub fn span(&self) -> usize {
        (self.m - 1) * self.tau
    }

    /// Number of states for a series of length `n`, if at least two.
    pub fn num_states(&self, n: usize) -> Option<usize> {
        n.checked_sub(self.span()).filter(|&ns| ns >= 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    L1,
    #[default]
    L2,
    LInf,
}

impl Norm {
    pub fn distance<T: Real>(self, a: &[T], b: &[T]) -> T {
        let diffs = a.iter().zip(b).map(|(&x, &y)| (x - y).abs());
        match self {
            Norm::L1 => diffs.fold(T::zero(), |acc, d| acc + d),
            Norm::L2 => diffs.fold(T::zero(), |acc, d| acc + d * d).sqrt(),
            Norm::LInf => diffs.fold(T::zero(), |acc, d| acc.max(d)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "manhattan" => Ok(Norm::L1),
            "l2" | "euclidean" => Ok(Norm::L2),
            "linf" | "max" | "chebyshev" => Ok(Norm::LInf),
            _ => Err(Error::invalid(format!("unknown norm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpConfig<T> {
    pub epsilon: T,
    pub norm: Norm,
}

impl<T: Real> RpConfig<T> {
    pub fn new(epsilon: T, norm: Norm) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(RpConfig { epsilon, norm })
    }

    /// `0.2·sqrt(m)`.
    pub fn rule_of_thumb_epsilon(m: usize) -> T {
        T::of(0.2) * T::of_usize(m).sqrt()
    }

    /// Picks the threshold: explicit value, else the tuned 0.1.
    pub fn resolve_epsilon(explicit: Option<T>) -> T {
        explicit.unwrap_or_else(|| T::of(TUNED_EPSILON))
    }
}

impl<T: Real> Default for RpConfig<T> {
    fn default() -> Self {
        RpConfig {
            epsilon: T::of(TUNED_EPSILON),
            norm: Norm::L2,
        }
    }
}

/// Delay-embedded states stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Embedding<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<T>> {
        self.states().map(|s| s.to_vec()).collect()
    }
}

/// Reconstructs phase-space states `[r_i, r_{i+tau}, ..., r_{i+(m-1)tau}]`.
pub fn time_delay_embed<T: Real>(series: &[T], cfg: EmbeddingConfig) -> Result<Embedding<T>> {
    let ns = cfg.num_states(series.len()).ok_or_else(|| {
        Error::invalid(format!(
            "series of length {} too short for m={}, tau={} (needs at least {})",
            series.len(),
            cfg.m,
            cfg.tau,
            cfg.span() + 2
        ))
    })?;
    let mut data = Vec::with_capacity(ns * cfg.m);
    for i in 0..ns {
        data.extend((0..cfg.m).map(|k| series[i + k * cfg.tau]));
    }
    Ok(Embedding { dim: cfg.m, data })
}

/// Binary, symmetric recurrence matrix stored as packed bit rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrencePlot<T> {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    rp: Option<RpConfig<T>>,
    embedding: Option<EmbeddingConfig>,
}

impl<T: Real> RecurrencePlot<T> {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        RecurrencePlot {
            n,
            words,
            bits: vec![0; n * words],
            rp: None,
            embedding: None,
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    /// Builds a plot from an explicit 0/1 matrix; it must be symmetric with a unit diagonal.
    pub fn from_matrix(m: &[Vec<bool>]) -> Result<Self> {
        let n = m.len();
        let mut rp = Self::empty(n);
        for (i, row) in m.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("recurrence matrix must be square"));
            }
            if !row[i] {
                return Err(Error::invalid(format!("diagonal entry {i} is zero")));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != m[j][i] {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
                if v {
                    rp.set(i, j);
                }
            }
        }
        Ok(rp)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn row_bits(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn config(&self) -> Option<&RpConfig<T>> {
        self.rp.as_ref()
    }

    pub fn embedding(&self) -> Option<EmbeddingConfig> {
        self.embedding
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Writes the plot as a binary PGM; recurrent cells are black.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.n, self.n)?;
        let mut row = vec![0u8; self.n];
        for i in 0..self.n {
            for (j, px) in row.iter_mut().enumerate() {
                *px = if self.get(i, j) { 0 } else { 255 };
            }
            out.write_all(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn rp_from_flat<T: Real>(data: &[T], dim: usize, cfg: &RpConfig<T>) -> RecurrencePlot<T> {
    let n = data.len() / dim;
    let mut rp = RecurrencePlot::empty(n);
    let eps = cfg.epsilon;
    for i in 0..n {
        rp.set(i, i);
        let xi = &data[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let xj = &data[j * dim..(j + 1) * dim];
            if cfg.norm.distance(xi, xj) <= eps {
                rp.set(i, j);
                rp.set(j, i);
            }
        }
    }
    rp.rp = Some(*cfg);
    rp
}

/// `R[i][j] = 1` iff `||x_i - x_j|| <= epsilon`.
pub fn recurrence_plot<T: Real, S: AsRef<[T]>>(
    states: &[S],
    cfg: &RpConfig<T>,
) -> Result<RecurrencePlot<T>> {
    if states.len() < 2 {
        return Err(Error::invalid("recurrence plot needs at least two states"));
    }
    let dim = states[0].as_ref().len();
    if dim == 0 {
        return Err(Error::invalid("states must have positive dimension"));
    }
    let mut data = Vec::with_capacity(states.len() * dim);
    for (k, s) in states.iter().enumerate() {
        let s = s.as_ref();
        if s.len() != dim {
            return Err(Error::invalid(format!(
                "state {k} has dimension {}, expected {dim}",
                s.len()
            )));
        }
        data.extend_from_slice(s);
    }
    Ok(rp_from_flat(&data, dim, cfg))
}

/// Recurrence plot of an existing embedding, tagged with its embedding config.
pub fn embedded_recurrence_plot<T: Real>(
    embedding: &Embedding<T>,
    emb: EmbeddingConfig,
    cfg: &RpConfig<T>,
) -> RecurrencePlot<T> {
    let mut rp = rp_from_flat(&embedding.data, embedding.dim, cfg);
    rp.embedding = Some(emb);
    rp
}

/// Fraction of recurrent cells, main diagonal included.
pub fn recurrence_rate<T: Real>(rp: &RecurrencePlot<T>) -> T {
    let n = T::of_usize(rp.size());
    T::from_u64(rp.count_ones()).expect("count fits") / (n * n)
}

/// Transitivity of the recurrence network `A = R - I`: closed triples over
/// connected triples, 0 when there are no connected triples.
pub fn transitivity<T: Real>(rp: &RecurrencePlot<T>) -> T {
    let n = rp.size();
    let words = rp.words;
    // Neighbourhoods without the self-loop.
    let mut adj = rp.bits.clone();
    for i in 0..n {
        adj[i * words + i / 64] &= !(1u64 << (i % 64));
    }
    let row = |i: usize| &adj[i * words..(i + 1) * words];
    let mut closed: u64 = 0;
    let mut connected: u64 = 0;
    for i in 0..n {
        let ri = row(i);
        let deg: u64 = ri.iter().map(|w| u64::from(w.count_ones())).sum();
        connected += deg * deg.saturating_sub(1);
        for (w, &word) in ri.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let j = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                closed += ri
                    .iter()
                    .zip(row(j))
                    .map(|(a, b)| u64::from((a & b).count_ones()))
                    .sum::<u64>();
            }
        }
    }
    if connected == 0 {
        T::zero()
    } else {
        T::from_u64(closed).expect("fits") / T::from_u64(connected).expect("fits")
    }
}

/// Average mutual information `I(0..=max_lag)` in bits, equal-width bins over `[min, max]`.
pub fn ami_curve<T: Real>(series: &[T], max_lag: usize, bins: usize) -> Result<Vec<T>> {
    if bins < 2 {
        return Err(Error::invalid("AMI needs at least 2 bins"));
    }
    if series.len() < max_lag + 2 {
        return Err(Error::invalid(format!(
            "series of length {} too short for max_lag {max_lag}",
            series.len()
        )));
    }
    let (lo, hi) = series
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    let nb = T::of_usize(bins);
    let idx: Vec<usize> = series
        .iter()
        .map(|&v| {
            if range > T::zero() {
                ((v - lo) / range * nb)
                    .to_usize()
                    .unwrap_or(0)
                    .min(bins - 1)
            } else {
                0
            }
        })
        .collect();

    let mut joint = vec![0u32; bins * bins];
    let mut pa = vec![0u32; bins];
    let mut pb = vec![0u32; bins];
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        joint.iter_mut().for_each(|c| *c = 0);
        pa.iter_mut().for_each(|c| *c = 0);
        pb.iter_mut().for_each(|c| *c = 0);
        let pairs = series.len() - lag;
        for i in 0..pairs {
            let (a, b) = (idx[i], idx[i + lag]);
            joint[a * bins + b] += 1;
            pa[a] += 1;
            pb[b] += 1;
        }
        let total = pairs as f64;
        let mut mi = 0.0f64;
        for a in 0..bins {
            if pa[a] == 0 {
                continue;
            }
            for b in 0..bins {
                let c = joint[a * bins + b];
                if c == 0 {
                    continue;
                }
                let pab = f64::from(c) / total;
                mi += pab * (f64::from(c) * total / (f64::from(pa[a]) * f64::from(pb[b]))).log2();
            }
        }
        out.push(T::of(mi.max(0.0)));
    }
    Ok(out)
}

/// First local minimum of an AMI curve (`tau >= 1`), or 1 when there is none.
pub fn estimate_delay<T: Real>(ami: &[T]) -> usize {
    (1..ami.len().saturating_sub(1))
        .find(|&t| ami[t - 1] > ami[t] && ami[t] <= ami[t + 1])
        .unwrap_or(1)
}

fn nearest_neighbour<T: Real>(emb: &Embedding<T>, i: usize, limit: usize) -> (usize, T) {
    let xi = emb.state(i);
    let mut best = (usize::MAX, T::infinity());
    for j in (0..limit).filter(|&j| j != i) {
        let d = Norm::L2.distance(xi, emb.state(j));
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Fraction of false nearest neighbours when going from dimension `m` to `m + 1`
/// (Kennel criteria with `R_tol = 10`, `A_tol = 2`).
pub fn fnn_fraction<T: Real>(series: &[T], m: usize, tau: usize) -> Result<T> {
    let hi = EmbeddingConfig::new(m + 1, tau)?;
    let ns = hi.num_states(series.len()).ok_or_else(|| {
        Error::invalid(format!(
            "series of length {} too short to test m={m} against m+1 with tau={tau}",
            series.len()
        ))
    })?;
    let emb = time_delay_embed(series, EmbeddingConfig::new(m, tau)?)?;
    let n = T::of_usize(series.len());
    let mean = series.iter().copied().sum::<T>() / n;
    let attractor = (series.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n).sqrt();
    let rtol = T::of(FNN_RTOL);
    let atol = T::of(FNN_ATOL);
    let lift = m * tau;
    // Distances at round-off scale count as exact repeats (periodic series).
    let floor = attractor * T::epsilon().sqrt();

    let false_count = (0..ns)
        .into_par_iter()
        .filter(|&i| {
            let (j, rm) = nearest_neighbour(&emb, i, ns);
            let extra = (series[i + lift] - series[j + lift]).abs();
            let ratio_fails = if rm > floor {
                extra / rm > rtol
            } else {
                extra > floor
            };
            let rm1 = (rm * rm + extra * extra).sqrt();
            let size_fails = attractor > T::zero() && rm1 / attractor > atol;
            ratio_fails || size_fails
        })
        .count();
    Ok(T::of_usize(false_count) / T::of_usize(ns))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionEstimate {
    pub m: usize,
    /// False when no dimension up to the cap reached the FNN acceptance level.
    pub converged: bool,
}

/// Smallest `m` in `1..=10` whose FNN fraction drops below 1%.
pub fn estimate_dimension<T: Real>(series: &[T], tau: usize) -> Result<DimensionEstimate> {
    let accept = T::of(FNN_ACCEPT);
    let mut last = 1;
    for m in 1..=MAX_EMBEDDING_DIM {
        let frac = match fnn_fraction(series, m, tau) {
            Ok(f) => f,
            Err(e) if m == 1 => return Err(e),
            Err(_) => break,
        };
        last = m;
        if frac < accept {
            return Ok(DimensionEstimate { m, converged: true });
        }
    }
    Ok(DimensionEstimate {
        m: last,
        converged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RqaWindowConfig {
    pub window_len: usize,
    pub step: usize,
}

impl Default for RqaWindowConfig {
    fn default() -> Self {
        RqaWindowConfig {
            window_len: 125,
            step: 25,
        }
    }
}

impl RqaWindowConfig {
    pub fn new(window_len: usize, step: usize) -> Result<Self> {
        if step == 0 || step > window_len {
            return Err(Error::invalid(format!(
                "window step must satisfy 0 < step <= window_len (got {step}, {window_len})"
            )));
        }
        Ok(RqaWindowConfig { window_len, step })
    }

    pub fn validate_for(&self, emb: EmbeddingConfig) -> Result<()> {
        if self.step == 0 || self.step > self.window_len {
            return Err(Error::invalid(
                "window step must satisfy 0 < step <= window_len",
            ));
        }
        if self.window_len < emb.span() + 2 {
            return Err(Error::invalid(format!(
                "window of {} samples too short for m={}, tau={}",
                self.window_len, emb.m, emb.tau
            )));
        }
        Ok(())
    }

    /// `floor((n - window_len) / step) + 1`, or 0 when the series is shorter than a window.
    pub fn num_windows(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            (n - self.window_len) / self.step + 1
        }
    }

    pub fn window_starts(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_windows(n)).map(move |k| k * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqaFeatureRow<T> {
    pub window_start: usize,
    pub rr: T,
    pub tra: T,
}

/// RR and TRA for every sliding window, ordered by window start.
pub fn windowed_rqa<T: Real>(
    series: &[T],
    emb: EmbeddingConfig,
    rp: &RpConfig<T>,
    win: RqaWindowConfig,
) -> Result<Vec<RqaFeatureRow<T>>> {
    win.validate_for(emb)?;
    if series.len() < win.window_len {
        return Err(Error::invalid(format!(
            "series of length {} shorter than one window ({})",
            series.len(),
            win.window_len
        )));
    }
    let starts: Vec<usize> = win.window_starts(series.len()).collect();
    starts
        .into_par_iter()
        .map(|start| {
            let window = &series[start..start + win.window_len];
            let states = time_delay_embed(window, emb)?;
            let plot = embedded_recurrence_plot(&states, emb, rp);
            Ok(RqaFeatureRow {
                window_start: start,
                rr: recurrence_rate(&plot),
                tra: transitivity(&plot),
            })
        })
        .collect()
}

pub fn write_rqa_csv<T: Real, W: Write>(rows: &[RqaFeatureRow<T>], out: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "window_start,rr,tra")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.window_start, r.rr, r.tra)?;
    }
    w.flush()?;
    Ok(())
}
