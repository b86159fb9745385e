//! Adam, the training loop, evaluation and finite-difference gradient checks.

mod adam;
mod gradcheck;
mod train;

pub use adam::AdamState;
pub use gradcheck::{
    compare_gradients, gradcheck, GradcheckReport, TensorCheck, FD_STEP, REL_ERROR_FLOOR,
};
pub use train::{evaluate, evaluate_params, train, EpochMetrics, Evaluation, Metrics, TrainConfig};
