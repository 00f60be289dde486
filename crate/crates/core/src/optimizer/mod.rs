//! The training step: ensemble objective, exact gradient and clamped
//! gradient ascent.

mod check;
mod ensemble;
mod field;
mod train;

pub use check::{check_gradient, GradientCheck};
pub use ensemble::{evaluate_ensemble, evaluate_sample, gradient, objective, objective_and_gradient, SampleEvaluation};
pub use field::{clamp, ControlField};
pub use train::{train, OptimizationConfig, StopReason, TrainingResult};
