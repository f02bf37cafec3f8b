//! Gesture identification and recognition for wearable IMU streams.
//!
//! Identification slides a window over y-axis acceleration, summarises each
//! window's recurrence plot by its recurrence rate and transitivity, and
//! classifies windows as gesture or background with a polynomial-kernel SVM.
//! Recognition classifies a gesture segment into one of twelve classes with a
//! one-against-one radial-kernel SVM on statistical and resampled features.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the pipeline uses.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dataset;
pub mod error;
pub mod features;
pub mod forest;
pub mod imu;
pub mod pipeline;
pub mod rng;
pub mod rqa;
pub mod scalar;
pub mod svm;
pub mod synthgen;

pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use features::FeatureRegistry;
pub use imu::{GestureClass, ImuSample, ImuStream, Label, LabeledInterval};
pub use scalar::Real;

pub type RecurrencePlot = rqa::RecurrencePlot<f64>;
pub type RecurrencePlot32 = rqa::RecurrencePlot<f32>;
pub type RpConfig = rqa::RpConfig<f64>;
pub type RpConfig32 = rqa::RpConfig<f32>;
pub type RqaFeatureRow = rqa::RqaFeatureRow<f64>;
pub type Scaler = features::Scaler<f64>;
pub type Scaler32 = features::Scaler<f32>;
pub type KernelConfig = svm::KernelConfig<f64>;
pub type KernelConfig32 = svm::KernelConfig<f32>;
pub type SvmParams = svm::SvmParams<f64>;
pub type SvmParams32 = svm::SvmParams<f32>;
pub type BinarySvmModel = svm::BinarySvmModel<f64>;
pub type BinarySvmModel32 = svm::BinarySvmModel<f32>;
pub type OvoSvmModel = svm::OvoSvmModel<f64>;
pub type OvoSvmModel32 = svm::OvoSvmModel<f32>;
pub type DecisionTree = forest::DecisionTree<f64>;
pub type RandomForest = forest::RandomForest<f64>;
