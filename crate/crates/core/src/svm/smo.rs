//! Sequential minimal optimisation for the soft-margin dual
//!
//! ```text
//! min ½ αᵀQα − Σα   s.t.  yᵀα = 0,  0 ≤ α ≤ C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! The first working index is the maximal violator; the second maximises the
//! second-order decrease of the objective among violating partners.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::kernel::{KernelConfig, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoSettings {
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    /// Floor for non-positive curvature along the working pair.
    pub curvature_floor: f64,
    /// Iteration budget in passes over the data (`passes · n` pair updates).
    pub max_passes: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        SmoSettings {
            tol: 1e-3,
            curvature_floor: 1e-8,
            max_passes: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    pub bias: T,
    pub iterations: usize,
}

fn check_labels(labels: &[i8]) -> Result<()> {
    if let Some(k) = labels.iter().position(|&y| y != 1 && y != -1) {
        return Err(Error::invalid(format!(
            "label {k} is {}, expected ±1",
            labels[k]
        )));
    }
    let pos = labels.contains(&1);
    let neg = labels.contains(&-1);
    if !(pos && neg) {
        return Err(Error::invalid(
            "single-class training set: need both +1 and -1 labels",
        ));
    }
    Ok(())
}

/// Solves the dual on a precomputed row-major `n × n` Gram matrix.
pub fn smo_solve<T: Real>(
    gram: &[T],
    labels: &[i8],
    cost: T,
    settings: &SmoSettings,
) -> Result<DualSolution<T>> {
    let n = labels.len();
    if gram.len() != n * n {
        return Err(Error::invalid(
            "Gram matrix size does not match label count",
        ));
    }
    check_labels(labels)?;
    if !(cost > T::zero()) {
        return Err(Error::invalid("cost must be positive"));
    }
    let y: Vec<T> = labels
        .iter()
        .map(|&v| if v > 0 { T::one() } else { -T::one() })
        .collect();
    let k = |i: usize, j: usize| gram[i * n + j];
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i * n + j];
    let floor = T::of(settings.curvature_floor);
    let tol = T::of(settings.tol);
    let c = cost;

    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let max_iter = settings
        .max_passes
        .saturating_mul(n)
        .saturating_mul(n)
        .max(10_000);
    let mut iter = 0usize;

    loop {
        // first choice: maximal violator in I_up
        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > T::zero() {
                alpha[t] < c
            } else {
                alpha[t] > T::zero()
            };
            if in_up {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // second choice: best second-order gain in I_low
        let mut gmin = T::infinity();
        let mut j_sel = None;
        let mut best_gain = T::infinity();
        if let Some(i) = i_sel {
            for t in 0..n {
                let in_low = if y[t] > T::zero() {
                    alpha[t] > T::zero()
                } else {
                    alpha[t] < c
                };
                if !in_low {
                    continue;
                }
                let v = -y[t] * grad[t];
                if v < gmin {
                    gmin = v;
                }
                let b = gmax - v;
                if b > T::zero() {
                    let mut a = k(i, i) + k(t, t) - T::of(2.0) * k(i, t);
                    if a <= T::zero() {
                        a = floor;
                    }
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if gmax - gmin >= tol => (i, j),
            _ => break,
        };
        if iter >= max_iter {
            return Err(Error::Convergence(format!(
                "SMO reached {max_iter} iterations with KKT gap {}",
                (gmax - gmin).as_f64()
            )));
        }
        iter += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + T::of(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = floor;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - T::of(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = floor;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] = grad[t] + q(i, t) * di + q(j, t) * dj;
        }
    }

    Ok(DualSolution {
        bias: bias_from_gradient(&alpha, &grad, &y, c),
        alpha,
        iterations: iter,
    })
}

fn bias_from_gradient<T: Real>(alpha: &[T], grad: &[T], y: &[T], c: T) -> T {
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut free_sum = T::zero();
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        let positive = y[t] > T::zero();
        if alpha[t] >= c {
            if positive {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if alpha[t] <= T::zero() {
            if positive {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum = free_sum + yg;
        }
    }
    let rho = if free > 0 {
        free_sum / T::of_usize(free)
    } else {
        (ub + lb) / T::of(2.0)
    };
    -rho
}

/// Dual objective `Σα − ½ αᵀQα` (the quantity SMO maximises).
pub fn dual_objective<T: Real>(gram: &[T], labels: &[i8], alpha: &[T]) -> T {
    let n = labels.len();
    let y = |i: usize| if labels[i] > 0 { T::one() } else { -T::one() };
    let mut quad = T::zero();
    for i in 0..n {
        if alpha[i] == T::zero() {
            continue;
        }
        for j in 0..n {
            quad = quad + alpha[i] * alpha[j] * y(i) * y(j) * gram[i * n + j];
        }
    }
    alpha.iter().copied().sum::<T>() - quad / T::of(2.0)
}

/// Largest violation of the per-point KKT conditions for `f(x_i) = Σ α_j y_j K_ij + b`.
pub fn kkt_violation<T: Real>(gram: &[T], labels: &[i8], alpha: &[T], bias: T, cost: T) -> T {
    let n = labels.len();
    let y = |i: usize| if labels[i] > 0 { T::one() } else { -T::one() };
    (0..n)
        .map(|i| {
            let f = (0..n).fold(bias, |acc, j| acc + alpha[j] * y(j) * gram[i * n + j]);
            let margin = y(i) * f;
            if alpha[i] <= T::zero() {
                (T::one() - margin).max(T::zero())
            } else if alpha[i] >= cost {
                (margin - T::one()).max(T::zero())
            } else {
                (margin - T::one()).abs()
            }
        })
        .fold(T::zero(), T::max)
}

/// A trained two-class machine: `f(x) = Σ coef_i K(s_i, x) + bias`, `coef_i = α_i y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel<T> {
    pub support: Vec<Vec<T>>,
    pub coef: Vec<T>,
    pub bias: T,
    pub params: SvmParams<T>,
}

impl<T: Real> BinarySvmModel<T> {
    pub fn kernel(&self) -> &KernelConfig<T> {
        &self.params.kernel
    }

    pub fn dim(&self) -> Option<usize> {
        self.support.first().map(Vec::len)
    }

    pub fn decision_value(&self, x: &[T]) -> Result<T> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::invalid(format!(
                    "input has dimension {}, model expects {d}",
                    x.len()
                )));
            }
        }
        Ok(self
            .support
            .iter()
            .zip(&self.coef)
            .fold(self.bias, |acc, (s, &c)| {
                acc + c * self.params.kernel.eval_unchecked(s, x)
            }))
    }

    /// `+1` when `f(x) >= 0`, else `-1`.
    pub fn predict(&self, x: &[T]) -> Result<i8> {
        Ok(if self.decision_value(x)? >= T::zero() {
            1
        } else {
            -1
        })
    }
}

/// Total order used to make training independent of input row order.
pub(crate) fn canonical_order<T: Real>(rows: &[&[T]], labels: &[i8]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        for (x, y) in rows[a].iter().zip(rows[b].iter()) {
            match x.as_f64().total_cmp(&y.as_f64()) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        labels[a].cmp(&labels[b])
    });
    idx
}

pub(crate) fn gram_matrix<T: Real>(rows: &[&[T]], kernel: &KernelConfig<T>) -> Vec<T> {
    let n = rows.len();
    let mut g = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(rows[i], rows[j]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

pub(crate) fn validate_rows<T: Real>(rows: &[Vec<T>]) -> Result<usize> {
    let d = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("no training rows"))?;
    for (k, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::invalid(format!(
                "row {k} has dimension {}, expected {d}",
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "row {k} contains non-finite features"
            )));
        }
    }
    Ok(d)
}

/// Trains a binary machine. Rows are put in a canonical order first, so the
/// result does not depend on the order they are supplied in.
pub fn smo_train<T: Real>(
    rows: &[Vec<T>],
    labels: &[i8],
    params: &SvmParams<T>,
) -> Result<BinarySvmModel<T>> {
    smo_train_with(rows, labels, params, &SmoSettings::default())
}

pub fn smo_train_with<T: Real>(
    rows: &[Vec<T>],
    labels: &[i8],
    params: &SvmParams<T>,
    settings: &SmoSettings,
) -> Result<BinarySvmModel<T>> {
    if rows.len() != labels.len() {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    validate_rows(rows)?;
    let refs: Vec<&[T]> = rows.iter().map(Vec::as_slice).collect();
    let fit = fit_indexed(&refs, labels, params, settings)?;
    Ok(BinarySvmModel {
        support: fit.support.iter().map(|&k| rows[k].clone()).collect(),
        coef: fit.coef,
        bias: fit.bias,
        params: *params,
    })
}

/// Support vectors as positions into the training rows.
pub(crate) struct IndexedFit<T> {
    pub support: Vec<usize>,
    pub coef: Vec<T>,
    pub bias: T,
}

pub(crate) fn fit_indexed<T: Real>(
    rows: &[&[T]],
    labels: &[i8],
    params: &SvmParams<T>,
    settings: &SmoSettings,
) -> Result<IndexedFit<T>> {
    params.validate()?;
    check_labels(labels)?;
    let order = canonical_order(rows, labels);
    let sorted: Vec<&[T]> = order.iter().map(|&i| rows[i]).collect();
    let y: Vec<i8> = order.iter().map(|&i| labels[i]).collect();
    let gram = gram_matrix(&sorted, &params.kernel);
    let sol = smo_solve(&gram, &y, params.cost, settings)?;
    let sv: Vec<(usize, T)> = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > T::zero())
        .map(|(k, &a)| (order[k], if y[k] > 0 { a } else { -a }))
        .collect();
    let (support, coef) = sv.into_iter().unzip();
    Ok(IndexedFit {
        support,
        coef,
        bias: sol.bias,
    })
}
