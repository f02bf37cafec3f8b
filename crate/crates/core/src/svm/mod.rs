//! Soft-margin kernel SVM: SMO solver, one-against-one multiclass voting and
//! the text model format.

mod kernel;
mod ovo;
mod persist;
mod smo;

pub use kernel::{KernelConfig, KernelKind, SvmParams};
pub use ovo::{ovo_train, ovo_train_scaled, OvoPrediction, OvoSvmModel, PairModel};
pub use persist::{load_model, read_model, save_model, write_model, MODEL_MAGIC};
pub use smo::{
    dual_objective, kkt_violation, smo_solve, smo_train, smo_train_with, BinarySvmModel,
    DualSolution, SmoSettings,
};
