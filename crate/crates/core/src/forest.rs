//! CART trees with Gini splits and a bootstrap-aggregated random forest.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::{task_rng, TaskRng};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_split: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`, at least 1.
    pub features_per_split: Option<usize>,
    /// Draw a bootstrap sample per tree (disable only to compare against a single tree).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 10,
            min_split: 2,
            min_leaf: 1,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_split < 2 || self.min_leaf == 0 {
            return Err(Error::invalid(
                "forest config needs n_trees >= 1, max_depth >= 1, min_split >= 2, min_leaf >= 1",
            ));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::invalid("features_per_split must be >= 1"));
        }
        Ok(())
    }

    fn mtry(&self, d: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d.max(1))
    }
}

/// `1 - Σ (c_i / n)^2`.
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("Gini impurity of an empty node"));
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

fn gini_unchecked(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
enum Node<T> {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: T,
        /// Impurity decrease, weighted by the node's share of the training rows.
        gain: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    nodes: Vec<Node<T>>,
    n_classes: usize,
}

impl<T: Real> DecisionTree<T> {
    pub fn predict(&self, x: &[T]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Impurity decrease of every split node.
    pub fn split_gains(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { gain, .. } => Some(*gain),
                _ => None,
            })
            .collect()
    }
}

struct Builder<'a, T> {
    rows: &'a [Vec<T>],
    labels: &'a [usize],
    n_classes: usize,
    cfg: &'a ForestConfig,
    nodes: Vec<Node<T>>,
    n_total: usize,
}

struct BestSplit<T> {
    feature: usize,
    threshold: T,
    decrease: f64,
}

impl<T: Real> Builder<'_, T> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn best_split(
        &self,
        idx: &[usize],
        counts: &[usize],
        rng: &mut TaskRng,
    ) -> Option<BestSplit<T>> {
        let d = self.rows[0].len();
        let parent = gini_unchecked(counts, idx.len());
        let mut best: Option<BestSplit<T>> = None;
        let mut order = idx.to_vec();
        for f in sample(rng, d, self.cfg.mtry(d)).into_iter() {
            order.sort_by(|&a, &b| {
                self.rows[a][f]
                    .partial_cmp(&self.rows[b][f])
                    .expect("finite features")
            });
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.to_vec();
            let n = order.len();
            for k in 0..n - 1 {
                let l = self.labels[order[k]];
                left[l] += 1;
                right[l] -= 1;
                let (lo, hi) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                let nl = k + 1;
                if lo == hi || nl < self.cfg.min_leaf || n - nl < self.cfg.min_leaf {
                    continue;
                }
                let child = (nl as f64 * gini_unchecked(&left, nl)
                    + (n - nl) as f64 * gini_unchecked(&right, n - nl))
                    / n as f64;
                let decrease = parent - child;
                if decrease > 1e-12 && best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    let mut threshold = (lo + hi) / T::of(2.0);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        decrease,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut TaskRng) -> usize {
        let counts = self.counts(&idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || idx.len() < self.cfg.min_split {
            return at;
        }
        let Some(split) = self.best_split(&idx, &counts, rng) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        let gain = split.decrease * idx.len() as f64 / self.n_total as f64;
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            gain,
            left,
            right,
        };
        at
    }
}

fn check_training<T: Real>(rows: &[Vec<T>], labels: &[usize], n_classes: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot train a tree on zero rows"));
    }
    if rows.len() != labels.len() {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    let d = rows[0].len();
    if d == 0
        || rows
            .iter()
            .any(|r| r.len() != d || r.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::invalid(
            "rows must share a positive dimension and be finite",
        ));
    }
    if labels.iter().any(|&l| l >= n_classes) {
        return Err(Error::invalid("label out of range"));
    }
    Ok(())
}

/// Grows one tree on the rows selected by `idx` (repeats allowed).
pub fn tree_train_on<T: Real>(
    rows: &[Vec<T>],
    labels: &[usize],
    n_classes: usize,
    idx: Vec<usize>,
    cfg: &ForestConfig,
    rng: &mut TaskRng,
) -> Result<DecisionTree<T>> {
    cfg.validate()?;
    check_training(rows, labels, n_classes)?;
    let mut b = Builder {
        rows,
        labels,
        n_classes,
        cfg,
        nodes: Vec::new(),
        n_total: idx.len(),
    };
    b.grow(idx, 0, rng);
    Ok(DecisionTree {
        nodes: b.nodes,
        n_classes,
    })
}

pub fn tree_train<T: Real>(
    rows: &[Vec<T>],
    labels: &[usize],
    n_classes: usize,
    cfg: &ForestConfig,
    rng: &mut TaskRng,
) -> Result<DecisionTree<T>> {
    tree_train_on(rows, labels, n_classes, (0..rows.len()).collect(), cfg, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest<T> {
    trees: Vec<DecisionTree<T>>,
    n_classes: usize,
}

impl<T: Real> RandomForest<T> {
    pub fn trees(&self) -> &[DecisionTree<T>] {
        &self.trees
    }

    /// Majority over trees; ties go to the earliest class.
    pub fn predict(&self, x: &[T]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        majority(&votes)
    }
}

/// Tree `t` uses the generator derived from `(cfg.seed, t)`.
pub fn forest_train<T: Real>(
    rows: &[Vec<T>],
    labels: &[usize],
    n_classes: usize,
    cfg: &ForestConfig,
) -> Result<RandomForest<T>> {
    cfg.validate()?;
    check_training(rows, labels, n_classes)?;
    let n = rows.len();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = task_rng(cfg.seed, &[t as u64]);
            let idx = if cfg.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree_train_on(rows, labels, n_classes, idx, cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest { trees, n_classes })
}

pub fn forest_train_predict(
    train: &LabeledDataset,
    test: &[Vec<f64>],
    cfg: &ForestConfig,
) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let forest = forest_train(train.rows(), train.labels(), train.n_classes(), cfg)?;
    Ok(test.iter().map(|x| forest.predict(x)).collect())
}
