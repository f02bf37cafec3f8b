//! Run parameters with defaults and a flat `key = value` override file.

use std::path::Path;

use gesturekeeper::forest::ForestConfig;
use gesturekeeper::pipeline::IdentificationConfig;
use gesturekeeper::rqa::{EmbeddingConfig, Norm, RpConfig, RqaWindowConfig};
use gesturekeeper::svm::{KernelConfig, KernelKind, SvmParams};
use gesturekeeper::{Error, Result};

pub const DEFAULTS_HELP: &str = "\
Parameter defaults (override with --params FILE holding `key = value` lines):
  RQA
    rqa.metric      = l2      distance metric (Euclidean norm)
    rqa.window      = 125     window size
    rqa.step        = 25      window step
    rqa.tau         = 1       delay
    rqa.m           = 4       embedding dimension
    rqa.epsilon     = 0.1     threshold
  SVM identification
    id.kernel       = poly
    id.gamma        = 0.95
    id.cost         = 3
    id.degree       = 3
    id.coef0        = 2
    id.overlap      = 0.5     share of a gesture a window must cover
    id.iterations   = 100     class-balancing iterations
  SVM recognition
    rec.kernel      = radial
    rec.gamma       = 0.005
    rec.cost        = 1
    rec.samples     = 10      resampled points per acceleration axis
    rec.k           = 43      statistical features kept by selection
    rec.selection_reps = 1    permutation repetitions inside each fold
  Other
    forest.trees    = 100
    forest.depth    = 10
    importance.reps = 100";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub metric: Norm,
    pub window: usize,
    pub step: usize,
    pub tau: usize,
    pub m: usize,
    pub epsilon: f64,
    pub id_kernel: KernelKind,
    pub id_gamma: f64,
    pub id_cost: f64,
    pub id_degree: u32,
    pub id_coef0: f64,
    pub overlap: f64,
    pub iterations: usize,
    pub rec_kernel: KernelKind,
    pub rec_gamma: f64,
    pub rec_cost: f64,
    pub rec_degree: u32,
    pub rec_coef0: f64,
    pub samples: usize,
    pub k: usize,
    pub selection_reps: usize,
    pub trees: usize,
    pub depth: usize,
    pub importance_reps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let id = SvmParams::<f64>::identification();
        let rec = SvmParams::<f64>::recognition();
        let forest = ForestConfig::default();
        Settings {
            metric: Norm::L2,
            window: 125,
            step: 25,
            tau: 1,
            m: 4,
            epsilon: 0.1,
            id_kernel: id.kernel.kind,
            id_gamma: id.kernel.gamma,
            id_cost: id.cost,
            id_degree: id.kernel.degree,
            id_coef0: id.kernel.coef0,
            overlap: 0.5,
            iterations: 100,
            rec_kernel: rec.kernel.kind,
            rec_gamma: rec.kernel.gamma,
            rec_cost: rec.cost,
            rec_degree: rec.kernel.degree,
            rec_coef0: rec.kernel.coef0,
            samples: 10,
            k: 43,
            selection_reps: 1,
            trees: forest.n_trees,
            depth: forest.max_depth,
            importance_reps: 100,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("parameter {key}: cannot parse '{value}'")))
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(p) = path {
            s.apply_text(&std::fs::read_to_string(p).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", p.display()),
                ))
            })?)?;
        }
        Ok(s)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(
                    "params",
                    i as u64 + 1,
                    format!("expected `key = value`, got '{line}'"),
                )
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::parse("params", i as u64 + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let kernel = |v: &str| -> Result<KernelKind> {
            v.parse()
                .map_err(|_| Error::Format(format!("parameter {key}: unknown kernel '{v}'")))
        };
        match key {
            "rqa.metric" => {
                self.metric = v
                    .parse()
                    .map_err(|_| Error::Format(format!("parameter {key}: unknown metric '{v}'")))?
            }
            "rqa.window" => self.window = num(key, v)?,
            "rqa.step" => self.step = num(key, v)?,
            "rqa.tau" => self.tau = num(key, v)?,
            "rqa.m" => self.m = num(key, v)?,
            "rqa.epsilon" => self.epsilon = num(key, v)?,
            "id.kernel" => self.id_kernel = kernel(v)?,
            "id.gamma" => self.id_gamma = num(key, v)?,
            "id.cost" => self.id_cost = num(key, v)?,
            "id.degree" => self.id_degree = num(key, v)?,
            "id.coef0" => self.id_coef0 = num(key, v)?,
            "id.overlap" => self.overlap = num(key, v)?,
            "id.iterations" => self.iterations = num(key, v)?,
            "rec.kernel" => self.rec_kernel = kernel(v)?,
            "rec.gamma" => self.rec_gamma = num(key, v)?,
            "rec.cost" => self.rec_cost = num(key, v)?,
            "rec.degree" => self.rec_degree = num(key, v)?,
            "rec.coef0" => self.rec_coef0 = num(key, v)?,
            "rec.samples" => self.samples = num(key, v)?,
            "rec.k" => self.k = num(key, v)?,
            "rec.selection_reps" => self.selection_reps = num(key, v)?,
            "forest.trees" => self.trees = num(key, v)?,
            "forest.depth" => self.depth = num(key, v)?,
            "importance.reps" => self.importance_reps = num(key, v)?,
            _ => return Err(Error::Format(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    pub fn identification(&self) -> Result<IdentificationConfig> {
        let cfg = IdentificationConfig {
            window: RqaWindowConfig::new(self.window, self.step)?,
            embedding: EmbeddingConfig::new(self.m, self.tau)?,
            rp: RpConfig::new(self.epsilon, self.metric)?,
            overlap_fraction: self.overlap,
            n_balance_iters: self.iterations,
            params: SvmParams {
                kernel: KernelConfig::new(
                    self.id_kernel,
                    self.id_gamma,
                    self.id_coef0,
                    self.id_degree,
                )?,
                cost: self.id_cost,
            },
            ..IdentificationConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn recognition(&self) -> Result<SvmParams<f64>> {
        let p = SvmParams {
            kernel: KernelConfig::new(
                self.rec_kernel,
                self.rec_gamma,
                self.rec_coef0,
                self.rec_degree,
            )?,
            cost: self.rec_cost,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn forest(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            max_depth: self.depth,
            seed,
            ..ForestConfig::default()
        }
    }
}
