//! IMU data model, gesture dictionary, and the CSV formats for streams and labels.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default sampling rate of the wearable sensor.
pub const DEFAULT_RATE_HZ: f64 = 50.0;

/// Canonical IMU CSV header, in column order.
pub const IMU_COLUMNS: [&str; 10] = [
    "t", "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z", "mag_x", "mag_y", "mag_z",
];

pub const LABEL_COLUMNS: [&str; 4] = ["start", "end", "label", "subject"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sensor {
    Acc,
    Gyro,
    Mag,
}

impl Sensor {
    pub const ALL: [Sensor; 3] = [Sensor::Acc, Sensor::Gyro, Sensor::Mag];

    pub fn name(self) -> &'static str {
        match self {
            Sensor::Acc => "acc",
            Sensor::Gyro => "gyro",
            Sensor::Mag => "mag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One of the nine sensor channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channel {
    pub sensor: Sensor,
    pub axis: Axis,
}

impl Channel {
    pub const fn new(sensor: Sensor, axis: Axis) -> Self {
        Channel { sensor, axis }
    }

    /// Y-axis acceleration, the series the identification features are computed on.
    pub const ACC_Y: Channel = Channel::new(Sensor::Acc, Axis::Y);

    /// All nine channels in canonical (sensor, axis) order.
    pub fn all() -> impl Iterator<Item = Channel> {
        Sensor::ALL
            .into_iter()
            .flat_map(|s| Axis::ALL.into_iter().map(move |a| Channel::new(s, a)))
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.sensor.name(), self.axis.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::all()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown channel '{s}'")))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Sample index on the sensor clock.
    pub t: u64,
    pub acc: [f64; 3],
    pub gyro: [f64; 3],
    pub mag: [f64; 3],
}

impl ImuSample {
    pub fn value(&self, ch: Channel) -> f64 {
        let v = match ch.sensor {
            Sensor::Acc => &self.acc,
            Sensor::Gyro => &self.gyro,
            Sensor::Mag => &self.mag,
        };
        v[ch.axis.index()]
    }

    fn is_finite(&self) -> bool {
        self.acc
            .iter()
            .chain(&self.gyro)
            .chain(&self.mag)
            .all(|v| v.is_finite())
    }
}

/// A validated, gap-free sequence of IMU samples from one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuStream {
    subject_id: String,
    rate_hz: f64,
    samples: Vec<ImuSample>,
}

impl ImuStream {
    pub fn new(
        subject_id: impl Into<String>,
        rate_hz: f64,
        samples: Vec<ImuSample>,
    ) -> Result<Self> {
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::invalid(format!(
                "rate_hz must be positive, got {rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::invalid("empty stream"));
        }
        for (k, pair) in samples.windows(2).enumerate() {
            if pair[1].t != pair[0].t + 1 {
                return Err(Error::invalid(format!(
                    "sample indices not contiguous at position {} ({} -> {})",
                    k + 1,
                    pair[0].t,
                    pair[1].t
                )));
            }
        }
        if let Some(k) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite channel value at position {k}"
            )));
        }
        Ok(ImuStream {
            subject_id: subject_id.into(),
            rate_hz,
            samples,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn channel(&self, ch: Channel) -> Vec<f64> {
        self.samples.iter().map(|s| s.value(ch)).collect()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }
}

/// The twelve-gesture dictionary in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GestureClass {
    Up,
    Down,
    Left,
    Right,
    Cw,
    Ccw,
    Z,
    Az,
    S,
    As,
    Push,
    Pull,
}

impl GestureClass {
    pub const ALL: [GestureClass; 12] = [
        GestureClass::Up,
        GestureClass::Down,
        GestureClass::Left,
        GestureClass::Right,
        GestureClass::Cw,
        GestureClass::Ccw,
        GestureClass::Z,
        GestureClass::Az,
        GestureClass::S,
        GestureClass::As,
        GestureClass::Push,
        GestureClass::Pull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GestureClass::Up => "Up",
            GestureClass::Down => "Down",
            GestureClass::Left => "Left",
            GestureClass::Right => "Right",
            GestureClass::Cw => "CW",
            GestureClass::Ccw => "CCW",
            GestureClass::Z => "Z",
            GestureClass::Az => "AZ",
            GestureClass::S => "S",
            GestureClass::As => "AS",
            GestureClass::Push => "Push",
            GestureClass::Pull => "Pull",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|g| g.name().to_string()).collect()
    }
}

impl FromStr for GestureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GestureClass::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown gesture '{s}'")))
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ground-truth label of an interval: a dictionary gesture or background activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Gesture(GestureClass),
    Adl,
}

impl Label {
    pub fn is_gesture(&self) -> bool {
        matches!(self, Label::Gesture(_))
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ADL" {
            Ok(Label::Adl)
        } else {
            s.parse().map(Label::Gesture)
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Gesture(g) => g.fmt(f),
            Label::Adl => f.write_str("ADL"),
        }
    }
}

/// Half-open interval `[start, end)` of sample positions within a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInterval {
    pub start: usize,
    pub end: usize,
    pub label: Label,
    pub subject_id: String,
}

impl LabeledInterval {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Copies the samples covered by `interval` into a new stream.
pub fn extract_segment(stream: &ImuStream, interval: &LabeledInterval) -> Result<ImuStream> {
    if interval.start >= interval.end || interval.end > stream.len() {
        return Err(Error::invalid(format!(
            "interval [{}, {}) out of bounds for stream of length {}",
            interval.start,
            interval.end,
            stream.len()
        )));
    }
    Ok(ImuStream {
        subject_id: stream.subject_id.clone(),
        rate_hz: stream.rate_hz,
        samples: stream.samples[interval.start..interval.end].to_vec(),
    })
}

fn header_map<const N: usize>(
    headers: &csv::StringRecord,
    expected: &[&str; N],
    context: &str,
) -> Result<[usize; N]> {
    let mut map = [usize::MAX; N];
    for (pos, h) in headers.iter().enumerate() {
        let h = h.trim();
        match expected.iter().position(|e| *e == h) {
            Some(k) if map[k] != usize::MAX => {
                return Err(Error::parse(context, 1, format!("duplicate column '{h}'")))
            }
            Some(k) => map[k] = pos,
            None => return Err(Error::parse(context, 1, format!("unexpected column '{h}'"))),
        }
    }
    if let Some(k) = map.iter().position(|&m| m == usize::MAX) {
        return Err(Error::parse(
            context,
            1,
            format!("missing column '{}'", expected[k]),
        ));
    }
    Ok(map)
}

fn csv_reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(rdr)
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, context: &str, line: u64) -> Result<&'r str> {
    rec.get(idx)
        .ok_or_else(|| Error::parse(context, line, "missing field"))
}

/// Reads an IMU stream from CSV; the subject id is taken from the file stem.
pub fn parse_imu_csv(path: impl AsRef<Path>) -> Result<ImuStream> {
    let path = path.as_ref();
    let subject = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .unwrap_or_default();
    read_imu_csv(File::open(path)?, &subject, DEFAULT_RATE_HZ)
}

/// Reads an IMU stream from any CSV source.
pub fn read_imu_csv<R: Read>(source: R, subject_id: &str, rate_hz: f64) -> Result<ImuStream> {
    const CTX: &str = "imu csv";
    let mut rdr = csv_reader(source);
    let map = header_map(rdr.headers()?, &IMU_COLUMNS, CTX)?;
    let mut samples: Vec<ImuSample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t_str = field(&rec, map[0], CTX, line)?;
        let t: u64 = t_str
            .parse()
            .map_err(|_| Error::parse(CTX, line, format!("non-numeric sample index '{t_str}'")))?;
        let mut vals = [0.0f64; 9];
        for (k, v) in vals.iter_mut().enumerate() {
            let s = field(&rec, map[k + 1], CTX, line)?;
            *v = s.parse().map_err(|_| {
                Error::parse(
                    CTX,
                    line,
                    format!("non-numeric value '{s}' in {}", IMU_COLUMNS[k + 1]),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    CTX,
                    line,
                    format!("non-finite value in {}", IMU_COLUMNS[k + 1]),
                ));
            }
        }
        if let Some(prev) = samples.last() {
            if t <= prev.t {
                return Err(Error::parse(CTX, line, "non-monotonic index"));
            }
            if t != prev.t + 1 {
                return Err(Error::parse(
                    CTX,
                    line,
                    format!("missing samples between {} and {t}", prev.t),
                ));
            }
        }
        samples.push(ImuSample {
            t,
            acc: [vals[0], vals[1], vals[2]],
            gyro: [vals[3], vals[4], vals[5]],
            mag: [vals[6], vals[7], vals[8]],
        });
    }
    if samples.is_empty() {
        return Err(Error::Format("empty stream".into()));
    }
    ImuStream::new(subject_id, rate_hz, samples)
}

pub fn write_imu_csv<W: Write>(stream: &ImuStream, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", IMU_COLUMNS.join(","))?;
    for s in &stream.samples {
        write!(w, "{}", s.t)?;
        for v in s.acc.iter().chain(&s.gyro).chain(&s.mag) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_imu_csv(stream: &ImuStream, path: impl AsRef<Path>) -> Result<()> {
    write_imu_csv(stream, File::create(path)?)
}

/// A stream together with its labelled intervals.
pub type Recording = (ImuStream, Vec<LabeledInterval>);

/// Loads every `<subject>.imu.csv` in `dir` (sorted by name) with its
/// `<subject>.labels.csv`; a missing label file means no intervals.
pub fn load_recordings(dir: impl AsRef<Path>) -> Result<Vec<Recording>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".imu.csv"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!(
            "no *.imu.csv files in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let stream = parse_imu_csv(p)?;
            let labels = dir.join(format!("{}.labels.csv", stream.subject_id()));
            let intervals = if labels.exists() {
                parse_label_csv(&labels)?
            } else {
                Vec::new()
            };
            if let Some(iv) = intervals.iter().find(|iv| iv.end > stream.len()) {
                return Err(Error::invalid(format!(
                    "{}: interval [{}, {}) beyond stream of length {}",
                    labels.display(),
                    iv.start,
                    iv.end,
                    stream.len()
                )));
            }
            Ok((stream, intervals))
        })
        .collect()
}

/// Reads a label file; intervals are returned sorted by start.
pub fn parse_label_csv(path: impl AsRef<Path>) -> Result<Vec<LabeledInterval>> {
    read_label_csv(File::open(path)?)
}

pub fn read_label_csv<R: Read>(source: R) -> Result<Vec<LabeledInterval>> {
    const CTX: &str = "label csv";
    let mut rdr = csv_reader(source);
    let map = header_map(rdr.headers()?, &LABEL_COLUMNS, CTX)?;
    let mut out: Vec<(u64, LabeledInterval)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<usize> {
            let s = field(&rec, map[k], CTX, line)?;
            s.parse().map_err(|_| {
                Error::parse(CTX, line, format!("non-numeric {} '{s}'", LABEL_COLUMNS[k]))
            })
        };
        let start = num(0)?;
        let end = num(1)?;
        let label_str = field(&rec, map[2], CTX, line)?;
        let label: Label = label_str
            .parse()
            .map_err(|_| Error::parse(CTX, line, format!("unknown label '{label_str}'")))?;
        if start >= end {
            return Err(Error::parse(
                CTX,
                line,
                format!("empty interval [{start}, {end})"),
            ));
        }
        let subject_id = field(&rec, map[3], CTX, line)?.to_string();
        out.push((
            line,
            LabeledInterval {
                start,
                end,
                label,
                subject_id,
            },
        ));
    }
    out.sort_by_key(|(_, iv)| iv.start);
    for pair in out.windows(2) {
        if pair[1].1.start < pair[0].1.end {
            return Err(Error::parse(
                CTX,
                pair[1].0,
                format!(
                    "interval [{}, {}) overlaps [{}, {})",
                    pair[1].1.start, pair[1].1.end, pair[0].1.start, pair[0].1.end
                ),
            ));
        }
    }
    Ok(out.into_iter().map(|(_, iv)| iv).collect())
}

pub fn write_label_csv<W: Write>(intervals: &[LabeledInterval], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", LABEL_COLUMNS.join(","))?;
    for iv in intervals {
        writeln!(w, "{},{},{},{}", iv.start, iv.end, iv.label, iv.subject_id)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_label_csv(intervals: &[LabeledInterval], path: impl AsRef<Path>) -> Result<()> {
    write_label_csv(intervals, File::create(path)?)
}
