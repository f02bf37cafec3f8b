//! Synthetic IMU corpora: parametric gesture trajectories, per-subject
//! variation, background activity and labelled recordings.
//!
//! Sensor frame: x to the right, y up (gravity reads +g on y when upright),
//! z forward, away from the body.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imu::{
    save_imu_csv, save_label_csv, GestureClass, ImuSample, ImuStream, Label, LabeledInterval,
};
use crate::rng::{derive_seed, task_rng, TaskRng};

pub const GRAVITY: f64 = 9.81;
/// Largest tilt a subject profile may carry, in degrees.
pub const MAX_TILT_DEG: f64 = 15.0;
/// Output values are rounded to this step, like a digitised sensor.
pub const SENSOR_RESOLUTION: f64 = 1e-4;

/// Earth field in the upright sensor frame, normalised units.
const MAG_FIELD: [f64; 3] = [0.0, -0.42, 0.91];
/// Radians of wrist rotation per metre of hand displacement.
const ORIENTATION_GAIN: f64 = 4.0;
/// Spread of a subject's wrist-coupling entries around the nominal coupling.
const WRIST_SUBJECT_SPREAD: f64 = 0.8;
/// Spread of the per-repetition change to the wrist coupling.
const WRIST_REP_SPREAD: f64 = 0.6;

/// Log-scale spread of per-repetition amplitude and speed.
const REP_SCALE_SPREAD: f64 = 0.1;
/// Per-axis spread of the per-repetition path deviation, in workspace units.
const REP_WOBBLE: f64 = 0.15;
/// Standard deviation (m/s²) and time constant (s) of in-gesture acceleration jitter.
const JITTER_ACC: f64 = 0.6;
const JITTER_TIME: f64 = 0.06;

type Vec3 = [f64; 3];

/// Pitch/yaw/roll follow the hand's y/z/x displacement.
fn nominal_wrist() -> [[f64; 3]; 3] {
    let g = ORIENTATION_GAIN;
    [[0.0, g, 0.0], [0.0, 0.0, g], [g, 0.0, 0.0]]
}

fn jitter_wrist(w: &mut [[f64; 3]; 3], spread: f64, rng: &mut TaskRng) {
    let unit = Normal::new(0.0, 1.0).expect("valid");
    for v in w.iter_mut().flatten() {
        *v += spread * unit.sample(rng);
    }
}

fn smootherstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (u * 6.0 - 15.0) + 10.0)
}

fn lerp(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    [
        a[0] + (b[0] - a[0]) * s,
        a[1] + (b[1] - a[1]) * s,
        a[2] + (b[2] - a[2]) * s,
    ]
}

/// Piecewise-linear path where each leg gets an equal share of time and its own easing.
fn polyline(points: &[Vec3], u: f64) -> Vec3 {
    let legs = points.len() - 1;
    let x = u.clamp(0.0, 1.0) * legs as f64;
    let leg = (x.floor() as usize).min(legs - 1);
    lerp(points[leg], points[leg + 1], smootherstep(x - leg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureTemplate {
    pub class: GestureClass,
    /// Nominal duration in seconds.
    pub duration: f64,
}

impl GestureTemplate {
    pub const DEFAULT_DURATION: f64 = 1.2;

    pub fn new(class: GestureClass) -> Self {
        GestureTemplate {
            class,
            duration: Self::DEFAULT_DURATION,
        }
    }

    /// Hand position at phase `u ∈ [0, 1]` in unit workspace coordinates.
    pub fn position(&self, u: f64) -> Vec3 {
        use GestureClass::*;
        let s = smootherstep(u);
        match self.class {
            Up => [0.0, s, 0.0],
            Down => [0.0, -s, 0.0],
            Left => [-s, 0.0, 0.0],
            Right => [s, 0.0, 0.0],
            Push => [0.0, 0.0, s],
            Pull => [0.0, 0.0, -s],
            Cw | Ccw => {
                // Starts at the top of the circle; clockwise as seen by the wearer.
                let th = TAU * s;
                let x = 0.5 * th.sin();
                [
                    if self.class == Cw { x } else { -x },
                    0.5 * (th.cos() - 1.0),
                    0.0,
                ]
            }
            Z | Az => {
                let m = if self.class == Z { 1.0 } else { -1.0 };
                polyline(
                    &[
                        [-0.5 * m, 0.5, 0.0],
                        [0.5 * m, 0.5, 0.0],
                        [-0.5 * m, -0.5, 0.0],
                        [0.5 * m, -0.5, 0.0],
                    ],
                    u,
                )
            }
            S | As => {
                let m = if self.class == S { 1.0 } else { -1.0 };
                [m * (s - 0.5), 0.3 * (TAU * s).sin(), 0.0]
            }
        }
    }
}

/// Per-subject variation.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub amplitude: f64,
    pub speed: f64,
    /// Unit rotation axis of the sensor tilt.
    pub tilt_axis: Vec3,
    /// Tilt angle in radians, at most 15°.
    pub tilt_angle: f64,
    pub acc_noise: f64,
    pub gyro_noise: f64,
    pub mag_noise: f64,
    /// Linear map from hand displacement (m) to wrist orientation (rad).
    pub wrist: [[f64; 3]; 3],
    pub seed: u64,
}

impl SubjectProfile {
    /// Upright, unit-scale, noise-free profile.
    pub fn neutral(subject_id: impl Into<String>) -> Self {
        SubjectProfile {
            subject_id: subject_id.into(),
            amplitude: 1.0,
            speed: 1.0,
            tilt_axis: [1.0, 0.0, 0.0],
            tilt_angle: 0.0,
            acc_noise: 0.0,
            gyro_noise: 0.0,
            mag_noise: 0.0,
            wrist: nominal_wrist(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.tilt_axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(self.amplitude > 0.0 && self.speed > 0.0) {
            return Err(Error::invalid("profile scales must be positive"));
        }
        if !(self.tilt_angle.abs() <= MAX_TILT_DEG.to_radians() + 1e-12)
            || (norm - 1.0).abs() > 1e-9
        {
            return Err(Error::invalid(
                "profile tilt must be a unit axis and at most 15 degrees",
            ));
        }
        if [self.acc_noise, self.gyro_noise, self.mag_noise]
            .iter()
            .any(|&s| !(s >= 0.0))
        {
            return Err(Error::invalid("noise levels must be non-negative"));
        }
        Ok(())
    }

    /// Draws a profile from the population model.
    pub fn sample(subject_id: impl Into<String>, seed: u64) -> Self {
        let mut rng = task_rng(seed, &[]);
        let amplitude = LogNormal::new(0.0, 0.15).expect("valid").sample(&mut rng);
        let speed = LogNormal::new(0.0, 0.12).expect("valid").sample(&mut rng);
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let r = (1.0 - z * z).sqrt();
        let mut wrist = nominal_wrist();
        jitter_wrist(&mut wrist, WRIST_SUBJECT_SPREAD, &mut rng);
        SubjectProfile {
            subject_id: subject_id.into(),
            amplitude,
            speed,
            tilt_axis: [r * phi.cos(), r * phi.sin(), z],
            tilt_angle: rng.gen_range(0.0..10.0f64).to_radians(),
            acc_noise: rng.gen_range(0.01..0.03),
            gyro_noise: rng.gen_range(0.02..0.06),
            mag_noise: rng.gen_range(0.005..0.015),
            wrist,
            seed,
        }
    }

    fn rotation(&self) -> [[f64; 3]; 3] {
        rodrigues(self.tilt_axis, self.tilt_angle)
    }
}

fn rodrigues(k: Vec3, angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let [x, y, z] = k;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

fn rotate(r: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [
        r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
        r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
        r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub reps: usize,
    pub rate_hz: f64,
    /// Subjects in the continuous identification corpus.
    pub identification_subjects: usize,
    /// Length of each identification recording, in minutes.
    pub adl_minutes: f64,
    /// Target share of identification samples that belong to gestures.
    pub gesture_fraction: f64,
    /// Workspace edge in metres: the unit template maps to this length.
    pub workspace: f64,
    pub gravity: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 15,
            reps: 5,
            rate_hz: 50.0,
            identification_subjects: 4,
            adl_minutes: 56.25,
            gesture_fraction: 0.005,
            workspace: 0.25,
            gravity: GRAVITY,
            seed: 2024,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects < 2 {
            return Err(Error::invalid("need at least 2 subjects"));
        }
        if self.reps < 1 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if !(self.rate_hz > 0.0
            && self.workspace > 0.0
            && self.adl_minutes >= 0.0
            && self.gravity >= 0.0)
        {
            return Err(Error::invalid("rate, workspace, adl_minutes and gravity must be non-negative (rate and workspace positive)"));
        }
        if !(0.0..0.5).contains(&self.gesture_fraction) {
            return Err(Error::invalid("gesture_fraction must be in [0, 0.5)"));
        }
        Ok(())
    }
}

/// Positions in metres. Sample count is `round(duration·speed·rate)`; the first
/// and last two samples coincide so the path starts and ends at rest.
pub fn gesture_trajectory(
    template: &GestureTemplate,
    profile: &SubjectProfile,
    rate: f64,
    workspace: f64,
) -> Vec<Vec3> {
    let n = ((template.duration * profile.speed * rate).round() as usize).max(4);
    let r = profile.rotation();
    let scale = workspace * profile.amplitude;
    (0..n)
        .map(|k| {
            let u = (k as f64 - 1.0) / (n - 3) as f64;
            let p = template.position(u);
            rotate(&r, [p[0] * scale, p[1] * scale, p[2] * scale])
        })
        .collect()
}

/// Noise-free sensor readings for a position path; `ImuSample::t` counts from 0.
fn clean_imu(
    positions: &[Vec3],
    profile: &SubjectProfile,
    rate: f64,
    gravity: f64,
) -> Vec<ImuSample> {
    let n = positions.len();
    let r = profile.rotation();
    let g = rotate(&r, [0.0, gravity, 0.0]);
    let mag = rotate(&r, MAG_FIELD);
    let second = |k: usize| -> Vec3 {
        let k = k.clamp(1, n - 2);
        let (a, b, c) = (positions[k - 1], positions[k], positions[k + 1]);
        std::array::from_fn(|i| (c[i] - 2.0 * b[i] + a[i]) * rate * rate)
    };
    let orient = |k: usize| -> Vec3 { rotate(&profile.wrist, positions[k]) };
    (0..n)
        .map(|k| {
            let dyn_acc = second(k);
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let (o0, o1) = (orient(lo), orient(hi));
            let span = (hi - lo) as f64;
            ImuSample {
                t: k as u64,
                acc: std::array::from_fn(|i| dyn_acc[i] + g[i]),
                gyro: std::array::from_fn(|i| (o1[i] - o0[i]) * rate / span),
                mag,
            }
        })
        .collect()
}

fn add_noise(samples: &mut [ImuSample], profile: &SubjectProfile, rng: &mut TaskRng) {
    let unit = Normal::new(0.0, 1.0).expect("valid");
    for s in samples {
        for v in &mut s.acc {
            *v += profile.acc_noise * unit.sample(rng);
        }
        for v in &mut s.gyro {
            *v += profile.gyro_noise * unit.sample(rng);
        }
        for v in &mut s.mag {
            *v += profile.mag_noise * unit.sample(rng);
        }
    }
}

/// Inverse sensor model: acceleration from the second central difference of
/// position (endpoints copy their neighbour) plus tilted gravity, angular rate
/// from the difference of an orientation proxy, and a tilted fixed magnetic field.
pub fn trajectory_to_imu(
    positions: &[Vec3],
    profile: &SubjectProfile,
    rate: f64,
    rng: &mut TaskRng,
) -> Result<ImuStream> {
    trajectory_to_imu_with(positions, profile, rate, GRAVITY, rng)
}

pub fn trajectory_to_imu_with(
    positions: &[Vec3],
    profile: &SubjectProfile,
    rate: f64,
    gravity: f64,
    rng: &mut TaskRng,
) -> Result<ImuStream> {
    if positions.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 positions, got {}",
            positions.len()
        )));
    }
    profile.validate()?;
    let mut samples = clean_imu(positions, profile, rate, gravity);
    add_noise(&mut samples, profile, rng);
    ImuStream::new(profile.subject_id.clone(), rate, samples)
}

/// A continuous stream with its gesture intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub stream: ImuStream,
    pub intervals: Vec<LabeledInterval>,
    pub profile: SubjectProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    /// One recording per subject holding `12·reps` gestures separated by rest.
    pub recognition: Vec<Recording>,
    /// Long recordings of background activity with sparse embedded gestures.
    pub identification: Vec<Recording>,
}

/// Builds a recording block by block; the hand position persists across blocks.
struct Builder<'a> {
    profile: &'a SubjectProfile,
    cfg: &'a SynthConfig,
    rot: [[f64; 3]; 3],
    samples: Vec<ImuSample>,
    intervals: Vec<LabeledInterval>,
}

impl<'a> Builder<'a> {
    fn new(profile: &'a SubjectProfile, cfg: &'a SynthConfig) -> Self {
        Builder {
            profile,
            cfg,
            rot: profile.rotation(),
            samples: Vec::new(),
            intervals: Vec::new(),
        }
    }

    fn append(&mut self, block: Vec<ImuSample>) {
        let t0 = self.samples.len() as u64;
        self.samples.extend(block.into_iter().map(|mut s| {
            s.t += t0;
            s
        }));
    }

    fn rest(&mut self, secs: f64) {
        let n = (secs * self.cfg.rate_hz).round() as usize;
        if n < 3 {
            return;
        }
        let still = vec![[0.0; 3]; n];
        self.append(clean_imu(
            &still,
            self.profile,
            self.cfg.rate_hz,
            self.cfg.gravity,
        ));
    }

    fn gesture(&mut self, class: GestureClass, rng: &mut TaskRng) {
        let mut p = self.profile.clone();
        p.amplitude *= LogNormal::new(0.0, REP_SCALE_SPREAD)
            .expect("valid")
            .sample(rng);
        p.speed *= LogNormal::new(0.0, REP_SCALE_SPREAD)
            .expect("valid")
            .sample(rng);
        jitter_wrist(&mut p.wrist, WRIST_REP_SPREAD, rng);
        let mut path = gesture_trajectory(
            &GestureTemplate::new(class),
            &p,
            self.cfg.rate_hz,
            self.cfg.workspace,
        );
        // Repetitions wander off the ideal path by a smooth mid-gesture bump.
        let unit = Normal::new(0.0, 1.0).expect("valid");
        let reach = REP_WOBBLE * self.cfg.workspace * p.amplitude;
        let dir: Vec3 = std::array::from_fn(|_| reach * unit.sample(rng));
        let n = path.len();
        for (k, q) in path.iter_mut().enumerate() {
            let u = ((k as f64 - 1.0) / (n - 3) as f64).clamp(0.0, 1.0);
            let w = (PI * u).sin().powi(2);
            for i in 0..3 {
                q[i] += w * dir[i];
            }
        }
        let start = self.samples.len();
        let mut block = clean_imu(&path, &p, self.cfg.rate_hz, self.cfg.gravity);
        // Muscle jitter: band-limited acceleration noise that fades in and out with the movement.
        let decay = (-1.0 / (JITTER_TIME * self.cfg.rate_hz)).exp();
        let kick = JITTER_ACC * (1.0 - decay * decay).sqrt();
        let mut j = [0.0f64; 3];
        for (k, s) in block.iter_mut().enumerate() {
            let env = (PI * (k as f64 + 0.5) / n as f64).sin();
            for i in 0..3 {
                j[i] = decay * j[i] + kick * unit.sample(rng);
                s.acc[i] += env * j[i];
            }
        }
        self.append(block);
        self.intervals.push(LabeledInterval {
            start,
            end: self.samples.len(),
            label: Label::Gesture(class),
            subject_id: self.profile.subject_id.clone(),
        });
    }

    /// Everyday movement: Ornstein–Uhlenbeck hand acceleration and angular rate.
    fn activity(&mut self, secs: f64, rng: &mut TaskRng) {
        let rate = self.cfg.rate_hz;
        let n = (secs * rate).round() as usize;
        let unit = Normal::new(0.0, 1.0).expect("valid");
        let theta = rng.gen_range(0.3..1.5);
        let sigma_acc = rng.gen_range(0.4..1.6);
        let sigma_gyro = rng.gen_range(0.2..0.8);
        let decay = (-1.0 / (theta * rate)).exp();
        let kick = (1.0 - decay * decay).sqrt();
        let g = rotate(&self.rot, [0.0, self.cfg.gravity, 0.0]);
        let mag = rotate(&self.rot, MAG_FIELD);
        let (mut a, mut w) = ([0.0f64; 3], [0.0f64; 3]);
        let mut block = Vec::with_capacity(n);
        for k in 0..n {
            // Fade in and out so the block joins rest without a step.
            let env = (PI * (k as f64 + 0.5) / n as f64).sin().min(1.0);
            for i in 0..3 {
                a[i] = decay * a[i] + sigma_acc * kick * unit.sample(rng);
                w[i] = decay * w[i] + sigma_gyro * kick * unit.sample(rng);
            }
            block.push(ImuSample {
                t: k as u64,
                acc: std::array::from_fn(|i| g[i] + env * a[i]),
                gyro: std::array::from_fn(|i| env * w[i]),
                mag,
            });
        }
        self.append(block);
    }

    fn finish(mut self, rng: &mut TaskRng) -> Result<Recording> {
        add_noise(&mut self.samples, self.profile, rng);
        for s in &mut self.samples {
            for v in s
                .acc
                .iter_mut()
                .chain(s.gyro.iter_mut())
                .chain(s.mag.iter_mut())
            {
                *v = quantize(*v);
            }
        }
        Ok(Recording {
            stream: ImuStream::new(
                self.profile.subject_id.clone(),
                self.cfg.rate_hz,
                self.samples,
            )?,
            intervals: self.intervals,
            profile: self.profile.clone(),
        })
    }
}

fn quantize(v: f64) -> f64 {
    let q = (v / SENSOR_RESOLUTION).round() / SENSOR_RESOLUTION.recip();
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

fn recognition_recording(cfg: &SynthConfig, profile: &SubjectProfile) -> Result<Recording> {
    let mut rng = task_rng(profile.seed, &[1]);
    let mut order: Vec<GestureClass> = GestureClass::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, cfg.reps))
        .collect();
    order.shuffle(&mut rng);
    let mut b = Builder::new(profile, cfg);
    b.rest(rng.gen_range(1.0..2.0));
    for class in order {
        b.gesture(class, &mut rng);
        b.rest(rng.gen_range(1.0..2.0));
    }
    b.finish(&mut rng)
}

fn identification_recording(cfg: &SynthConfig, profile: &SubjectProfile) -> Result<Recording> {
    let mut rng = task_rng(profile.seed, &[2]);
    let rate = cfg.rate_hz;
    let target = (cfg.adl_minutes * 60.0 * rate).round() as usize;
    let nominal = GestureTemplate::DEFAULT_DURATION * profile.speed * rate;
    let n_gestures = (cfg.gesture_fraction * target as f64 / nominal).round() as usize;

    // Plan the background as alternating rest gaps and activity bouts, then
    // place gestures in randomly chosen gaps.
    let mut plan: Vec<(f64, f64)> = Vec::new();
    let mut planned = 0.0;
    while planned < target as f64 || plan.len() < n_gestures {
        let gap = rng.gen_range(2.0..12.0);
        let bout = rng.gen_range(5.0..40.0);
        planned += (gap + bout) * rate;
        plan.push((gap, bout));
    }
    let mut slots: Vec<usize> = (0..plan.len()).collect();
    slots.shuffle(&mut rng);
    let mut hosts = vec![None; plan.len()];
    for &slot in &slots[..n_gestures] {
        hosts[slot] = Some(*GestureClass::ALL.choose(&mut rng).expect("non-empty"));
    }

    let mut b = Builder::new(profile, cfg);
    for ((gap, bout), host) in plan.into_iter().zip(hosts) {
        match host {
            Some(class) => {
                b.rest(gap.max(1.5) / 2.0);
                b.gesture(class, &mut rng);
                b.rest(gap.max(1.5) / 2.0);
            }
            None => b.rest(gap),
        }
        b.activity(bout, &mut rng);
    }
    b.rest(2.0);
    b.finish(&mut rng)
}

/// Deterministic under `cfg.seed`; subjects are generated in parallel from derived seeds.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let recognition = (0..cfg.n_subjects)
        .into_par_iter()
        .map(|s| {
            let profile = SubjectProfile::sample(
                format!("S{:02}", s + 1),
                derive_seed(cfg.seed, &[1, s as u64]),
            );
            recognition_recording(cfg, &profile)
        })
        .collect::<Result<Vec<_>>>()?;
    let identification = (0..cfg.identification_subjects)
        .into_par_iter()
        .map(|s| {
            let profile = SubjectProfile::sample(
                format!("I{:02}", s + 1),
                derive_seed(cfg.seed, &[2, s as u64]),
            );
            identification_recording(cfg, &profile)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthCorpus {
        config: cfg.clone(),
        recognition,
        identification,
    })
}

impl SynthCorpus {
    /// Total gesture segments per class over the recognition corpus.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; GestureClass::ALL.len()];
        for iv in self.recognition.iter().flat_map(|r| &r.intervals) {
            if let Label::Gesture(g) = iv.label {
                counts[g.index()] += 1;
            }
        }
        counts
    }

    pub fn manifest(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", c.seed);
        let _ = writeln!(out, "rate_hz = {}", c.rate_hz);
        let _ = writeln!(out, "subjects = {}", c.n_subjects);
        let _ = writeln!(out, "reps = {}", c.reps);
        let _ = writeln!(
            out,
            "identification_subjects = {}",
            c.identification_subjects
        );
        let _ = writeln!(out, "adl_minutes = {}", c.adl_minutes);
        let _ = writeln!(out, "gesture_fraction = {}", c.gesture_fraction);
        let segments: usize = self.recognition.iter().map(|r| r.intervals.len()).sum();
        let _ = writeln!(out, "segments = {segments}");
        let _ = writeln!(out, "\n[classes]");
        for (g, n) in GestureClass::ALL.iter().zip(self.class_counts()) {
            let _ = writeln!(out, "{g} = {n}");
        }
        for (dir, recs) in [
            ("recognition", &self.recognition),
            ("identification", &self.identification),
        ] {
            for r in recs.iter() {
                let p = &r.profile;
                let gesture_samples: usize = r.intervals.iter().map(|i| i.len()).sum();
                let _ = writeln!(out, "\n[{dir} {}]", p.subject_id);
                let _ = writeln!(out, "seed = {}", p.seed);
                let _ = writeln!(out, "samples = {}", r.stream.len());
                let _ = writeln!(out, "gestures = {}", r.intervals.len());
                let _ = writeln!(out, "gesture_samples = {gesture_samples}");
                let _ = writeln!(out, "amplitude = {:.6}", p.amplitude);
                let _ = writeln!(out, "speed = {:.6}", p.speed);
                let _ = writeln!(out, "tilt_deg = {:.6}", p.tilt_angle.to_degrees());
            }
        }
        out
    }

    /// Writes `manifest.txt` plus `<dir>/<subject>.imu.csv` and `.labels.csv`
    /// for the `recognition` and `identification` corpora.
    pub fn save(&self, out: impl AsRef<Path>) -> Result<()> {
        let out = out.as_ref();
        for (dir, recs) in [
            ("recognition", &self.recognition),
            ("identification", &self.identification),
        ] {
            let d = out.join(dir);
            std::fs::create_dir_all(&d)?;
            recs.par_iter().try_for_each(|r| -> Result<()> {
                let id = r.stream.subject_id();
                save_imu_csv(&r.stream, d.join(format!("{id}.imu.csv")))?;
                save_label_csv(&r.intervals, d.join(format!("{id}.labels.csv")))
            })?;
        }
        std::fs::write(out.join("manifest.txt"), self.manifest())?;
        Ok(())
    }
}
