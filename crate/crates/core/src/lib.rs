//! Sampling-based learning control (SLC) for small superconducting-qubit
//! models with multiplicative parameter fluctuations.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: states, Hermitian operators, exact step propagators and
//!   state fidelity for 1- and 2-qubit systems.
//! - [`sampling`]: fluctuation parameters, training grids, uniform and
//!   truncated-Gaussian test draws, seeded random streams.
//! - [`models`]: the single charge qubit, coupled charge qubits and coupled
//!   phase qubits as drift terms plus bounded control channels.
//! - [`optimizer`]: ensemble objective, its exact gradient and the clamped
//!   gradient-ascent training loop.
//! - [`evaluation`]: Monte-Carlo testing of trained fields and parameter
//!   sweeps.
//!
//! All numerics are generic over the real scalar type (see [`Scalar`]);
//! the `f64` aliases below are what the CLI and the reproduction presets use.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evaluation;
pub mod models;
pub mod optimizer;
pub mod quantum;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Complex amplitude type used throughout.
pub type C<T> = num_complex::Complex<T>;

pub type State = quantum::QuantumState<f64>;
pub type Hamiltonian = quantum::HermitianOperator<f64>;
pub type Unitary = quantum::Propagator<f64>;
pub type Model = models::QubitModel<f64>;
pub type Field = optimizer::ControlField<f64>;
pub type Sample = sampling::FluctuationSample<f64>;
pub type Fluctuation = sampling::FluctuationParameter<f64>;
pub type TrainConfig = optimizer::OptimizationConfig<f64>;
pub type Training = optimizer::TrainingResult<f64>;
pub type Report = evaluation::TestReport<f64>;
