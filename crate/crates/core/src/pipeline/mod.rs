//! Orchestration: identification training and segment assembly, recognition
//! training and leave-one-subject-out evaluation, permutation importance,
//! feature selection, augmentation and metrics.

pub mod end_to_end;
pub mod identification;
pub mod importance;
pub mod metrics;
pub mod recognition;

pub use end_to_end::{end_to_end_evaluate, EndToEndReport, EndToEndRow};
pub use identification::{
    assemble_segments, identify_segments, label_windows, train_identifier,
    train_identifier_on_windows, window_features, IdentificationConfig, IdentificationOutcome,
    WindowSet,
};
pub use importance::{
    permutation_importance, select_features, FeatureImportance, ImportanceOptions, ImportanceReport,
};
pub use metrics::{balanced_accuracy, ConfusionMatrix, EvaluationReport, FoldResult};
pub use recognition::{
    confusion_on, loso_evaluate, noise_augment, segment_dataset, ForestTrainer, Predictor,
    SelectedModel, SelectingTrainer, SvmTrainer, Trainer,
};
