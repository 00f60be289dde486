use super::ensemble::{evaluate_ensemble, objective_and_gradient};
use super::ControlField;
use crate::error::{invalid, Error, Result};
use crate::models::QubitModel;
use crate::sampling::FluctuationSample;
use crate::Scalar;

/// Step-size and stopping parameters for [`train`].
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationConfig<T> {
    /// Initial step `η₀`. `None` picks it so that the first update moves the
    /// most-affected control by 1% of its channel range.
    pub initial_step: Option<T>,
    /// Multiplier applied to `η` after a rejected (J-decreasing) step.
    pub shrink: T,
    /// Multiplier applied to `η` after an accepted step.
    pub grow: T,
    /// Stop once `|J(u_{k+window}) - J(u_k)| < epsilon`.
    pub epsilon: T,
    pub window: usize,
    pub max_iterations: usize,
    /// Consecutive rejections after which the ascent is considered stalled.
    pub max_rejections: usize,
}

impl<T: Scalar> Default for OptimizationConfig<T> {
    fn default() -> Self {
        Self {
            initial_step: None,
            shrink: T::lit(0.5),
            grow: T::lit(1.1),
            epsilon: T::lit(1e-4),
            window: 100,
            max_iterations: 20_000,
            max_rejections: 40,
        }
    }
}

impl<T: Scalar> OptimizationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(invalid("epsilon must be positive"));
        }
        if self.window == 0 {
            return Err(invalid("window must be at least 1"));
        }
        if !(self.shrink > T::zero() && self.shrink < T::one() && self.grow > T::one()) {
            return Err(invalid("need 0 < shrink < 1 < grow"));
        }
        if let Some(eta) = self.initial_step {
            if !(eta > T::zero() && eta.is_finite()) {
                return Err(invalid("initial step must be positive"));
            }
        }
        if self.max_rejections == 0 {
            return Err(invalid("max_rejections must be at least 1"));
        }
        Ok(())
    }
}

/// Why [`train`] stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The windowed change in `J` fell below `epsilon`.
    Converged,
    /// No ascent step was accepted even after `max_rejections` shrinks
    /// (or the gradient vanished): the field is a fixed point of the update.
    Stalled,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct TrainingResult<T> {
    pub field: ControlField<T>,
    /// `J` before training followed by `J` after every iteration.
    pub j_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// `|⟨ψ_target|ψ_n(T)⟩|` per ensemble member for the final field.
    pub sample_fidelities: Vec<T>,
}

impl<T: Scalar> TrainingResult<T> {
    pub fn final_objective(&self) -> T {
        *self.j_history.last().expect("history is never empty")
    }
}

fn auto_step<T: Scalar>(field: &ControlField<T>, grad: &[Vec<T>]) -> Option<T> {
    let mut worst = T::zero();
    for (row, &(lo, hi)) in grad.iter().zip(field.bounds()) {
        let range = hi - lo;
        if range > T::zero() {
            for &g in row {
                worst = worst.max(g.abs() / range);
            }
        }
    }
    (worst > T::zero()).then(|| T::lit(0.01) / worst)
}

fn ensure_finite<T: Scalar>(j: T, grad: &[Vec<T>]) -> Result<()> {
    if !j.is_finite() || grad.iter().flatten().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite objective or gradient during training".into()));
    }
    Ok(())
}

/// Clamped gradient ascent `u ← clamp(u + η ∇J(u))` with accept/reject
/// step adaptation.
pub fn train<T: Scalar>(
    model: &QubitModel<T>,
    ensemble: &[FluctuationSample<T>],
    init: &ControlField<T>,
    config: &OptimizationConfig<T>,
) -> Result<TrainingResult<T>> {
    config.validate()?;
    model.check_field(init)?;
    if !init.is_within_bounds() {
        return Err(invalid("initial field violates channel bounds"));
    }

    let mut field = init.clone();
    let (mut j, mut grad) = objective_and_gradient(&field, model, ensemble)?;
    ensure_finite(j, &grad)?;
    let mut history = vec![j];
    let mut step = config.initial_step.or_else(|| auto_step(&field, &grad));
    let mut reason = StopReason::MaxIterations;

    let mut iterations = 0;
    while iterations < config.max_iterations {
        let Some(eta) = step.as_mut() else {
            reason = StopReason::Stalled;
            break;
        };
        let mut accepted = false;
        for _ in 0..=config.max_rejections {
            let trial = field.stepped(&grad, *eta);
            let (jt, gt) = objective_and_gradient(&trial, model, ensemble)?;
            ensure_finite(jt, &gt)?;
            if jt >= j {
                field = trial;
                j = jt;
                grad = gt;
                *eta = *eta * config.grow;
                accepted = true;
                break;
            }
            *eta = *eta * config.shrink;
        }
        if !accepted {
            reason = StopReason::Stalled;
            break;
        }
        iterations += 1;
        history.push(j);
        let n = history.len();
        if n > config.window && (history[n - 1] - history[n - 1 - config.window]).abs() < config.epsilon {
            reason = StopReason::Converged;
            break;
        }
    }

    let sample_fidelities = evaluate_ensemble(&field, model, ensemble, false)?
        .iter()
        .map(|e| e.fidelity())
        .collect();
    Ok(TrainingResult {
        field,
        j_history: history,
        iterations,
        converged: reason != StopReason::MaxIterations,
        stop_reason: reason,
        sample_fidelities,
    })
}
