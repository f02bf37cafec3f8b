use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Radial,
    Sigmoid,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Radial => "radial",
            KernelKind::Sigmoid => "sigmoid",
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "polynomial" | "poly" => Ok(KernelKind::Polynomial),
            "radial" | "rbf" => Ok(KernelKind::Radial),
            "sigmoid" => Ok(KernelKind::Sigmoid),
            _ => Err(Error::invalid(format!("unknown kernel '{s}'"))),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig<T> {
    pub kind: KernelKind,
    pub gamma: T,
    pub coef0: T,
    pub degree: u32,
}

impl<T: Real> KernelConfig<T> {
    pub fn new(kind: KernelKind, gamma: T, coef0: T, degree: u32) -> Result<Self> {
        let cfg = KernelConfig {
            kind,
            gamma,
            coef0,
            degree,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn linear() -> Self {
        KernelConfig {
            kind: KernelKind::Linear,
            gamma: T::one(),
            coef0: T::zero(),
            degree: 1,
        }
    }

    pub fn radial(gamma: T) -> Self {
        KernelConfig {
            kind: KernelKind::Radial,
            gamma,
            coef0: T::zero(),
            degree: 3,
        }
    }

    pub fn polynomial(gamma: T, coef0: T, degree: u32) -> Self {
        KernelConfig {
            kind: KernelKind::Polynomial,
            gamma,
            coef0,
            degree,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::invalid("kernel degree must be >= 1"));
        }
        if self.kind != KernelKind::Linear && !(self.gamma > T::zero() && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "kernel gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !self.coef0.is_finite() {
            return Err(Error::invalid("kernel coef0 must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, u: &[T], v: &[T]) -> Result<T> {
        if u.len() != v.len() {
            return Err(Error::invalid(format!(
                "kernel arguments differ in dimension ({} vs {})",
                u.len(),
                v.len()
            )));
        }
        Ok(self.eval_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, u: &[T], v: &[T]) -> T {
        match self.kind {
            KernelKind::Linear => dot(u, v),
            KernelKind::Polynomial => {
                (self.gamma * dot(u, v) + self.coef0).powi(self.degree as i32)
            }
            KernelKind::Radial => {
                let d2 = u
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
                (-self.gamma * d2).exp()
            }
            KernelKind::Sigmoid => (self.gamma * dot(u, v) + self.coef0).tanh(),
        }
    }
}

#[inline]
fn dot<T: Real>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// Kernel plus soft-margin cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams<T> {
    pub kernel: KernelConfig<T>,
    pub cost: T,
}

impl<T: Real> SvmParams<T> {
    /// Polynomial kernel, degree 3, coef0 2, gamma 0.95, cost 3.
    pub fn identification() -> Self {
        SvmParams {
            kernel: KernelConfig::polynomial(T::of(0.95), T::of(2.0), 3),
            cost: T::of(3.0),
        }
    }

    /// Radial kernel, gamma 0.005, cost 1.
    pub fn recognition() -> Self {
        SvmParams {
            kernel: KernelConfig::radial(T::of(0.005)),
            cost: T::one(),
        }
    }

    /// Radial kernel with `gamma = 1/n_features` and cost 1.
    pub fn exploratory(n_features: usize) -> Self {
        SvmParams {
            kernel: KernelConfig::radial(T::one() / T::of_usize(n_features.max(1))),
            cost: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.cost > T::zero() && self.cost.is_finite()) {
            return Err(Error::invalid(format!(
                "cost must be positive, got {}",
                self.cost
            )));
        }
        Ok(())
    }
}
