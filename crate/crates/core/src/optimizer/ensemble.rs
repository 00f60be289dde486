//! Ensemble objective `J(u) = (1/N) Σ_n |⟨ψ_target|ψ_n(T)⟩|²` over the
//! augmented system and its exact gradient.
//!
//! For one sample the overlap is `o = ⟨χ_{k+1}| U_k |ψ_k⟩`, where `ψ_k` is
//! the forward state before step `k` and `χ_{k+1} = U_{k+1}† ⋯ U_{M-1}† ψ_target`
//! the backward costate. With `H_k = V diag(λ) V†` the step derivative is
//! `∂U_k = V (K ∘ (V† ∂H V)) V†`, `K_ij` the divided difference of
//! `λ ↦ e^{-iΔtλ}` (confluent value `-iΔt e^{-iΔtλ}`), and
//! `∂J_n = 2 Re[conj(o) ⟨χ_{k+1}|∂U_k|ψ_k⟩]`.

use rayon::prelude::*;

use super::ControlField;
use crate::error::{invalid, Error, Result};
use crate::models::QubitModel;
use crate::quantum::{inner, matvec, Propagator, Spectrum};
use crate::sampling::FluctuationSample;
use crate::{Scalar, C};

/// Objective and gradient contributions of one ensemble member.
#[derive(Clone, Debug)]
pub struct SampleEvaluation<T> {
    /// `⟨ψ_target|ψ(T)⟩`
    pub overlap: C<T>,
    /// `∂|o|²/∂u`, indexed `[channel][interval]`; empty when not requested.
    pub gradient: Vec<Vec<T>>,
}

impl<T: Scalar> SampleEvaluation<T> {
    pub fn fidelity(&self) -> T {
        self.overlap.norm().min(T::one())
    }

    /// `|o|²`, clipped at 1 against rounding in long propagations.
    pub fn objective(&self) -> T {
        self.overlap.norm_sqr().min(T::one())
    }
}

/// `(e^{-iΔtλ_i} - e^{-iΔtλ_j}) / (λ_i - λ_j)`, stable for close eigenvalues.
pub(crate) fn exp_divided_difference<T: Scalar>(li: T, lj: T, dt: T) -> C<T> {
    let base = C::new(T::zero(), -dt * lj).exp();
    let x = -dt * (li - lj);
    // (e^{ix} - 1) / x
    let ratio = if x.abs() < T::lit(1e-4) {
        let i = C::new(T::zero(), T::one());
        let ix = i * x;
        i * (C::new(T::one(), T::zero()) + ix / T::lit(2.0) + ix * ix / T::lit(6.0) + ix * ix * ix / T::lit(24.0))
    } else {
        let half = (x / T::lit(2.0)).sin();
        C::new(-T::lit(2.0) * half * half, x.sin()) / x
    };
    base * ratio * (-dt)
}

fn check_shapes<T: Scalar>(field: &ControlField<T>, model: &QubitModel<T>, ensemble: &[FluctuationSample<T>]) -> Result<()> {
    model.check_field(field)?;
    if ensemble.is_empty() {
        return Err(invalid("ensemble must contain at least one sample"));
    }
    for s in ensemble {
        if s.len() != model.fluctuations().len() {
            return Err(Error::DimensionMismatch { expected: model.fluctuations().len(), got: s.len() });
        }
    }
    Ok(())
}

/// Propagates one sample; with `want_gradient` also runs the backward pass.
pub fn evaluate_sample<T: Scalar>(
    field: &ControlField<T>,
    model: &QubitModel<T>,
    sample: &FluctuationSample<T>,
    want_gradient: bool,
) -> Result<SampleEvaluation<T>> {
    let dim = model.dim();
    let m = field.intervals();
    let dt = field.dt();
    let schedule = model.multiplier_schedule(sample)?;

    let mut spectra: Vec<Spectrum<T>> = Vec::with_capacity(if want_gradient { m } else { 0 });
    let mut forward: Vec<Vec<C<T>>> = Vec::with_capacity(if want_gradient { m } else { 0 });
    let mut props: Vec<Propagator<T>> = Vec::with_capacity(if want_gradient { m } else { 0 });
    let mut psi = model.initial_state().amplitudes().to_vec();
    for (k, mult) in schedule.iter().enumerate() {
        let h = model.assemble_with(&field.column(k), mult);
        let spec = h.eigh()?;
        let u = Propagator::from_spectrum(&spec, dt);
        let next = matvec(dim, u.entries(), &psi);
        if want_gradient {
            forward.push(std::mem::replace(&mut psi, next));
            spectra.push(spec);
            props.push(u);
        } else {
            psi = next;
        }
    }
    let target = model.target_state().amplitudes();
    let overlap = inner(target, &psi);
    if !(overlap.re.is_finite() && overlap.im.is_finite()) {
        return Err(Error::Numerical("non-finite overlap".into()));
    }
    if !want_gradient {
        return Ok(SampleEvaluation { overlap, gradient: Vec::new() });
    }

    let channels = model.channels().len();
    let mut gradient = vec![vec![T::zero(); m]; channels];
    let two = T::lit(2.0);
    let mut costate = target.to_vec();
    for k in (0..m).rev() {
        let spec = &spectra[k];
        let a = spec.to_eigenbasis(&forward[k]);
        let b = spec.to_eigenbasis(&costate);
        let mut kernel = vec![C::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                kernel[i * dim + j] = exp_divided_difference(spec.values[i], spec.values[j], dt);
            }
        }
        for (c, row) in gradient.iter_mut().enumerate() {
            let dh = model.channel_derivative(c, &schedule[k]);
            let rotated = spec.conjugate_into_eigenbasis(dh.entries());
            let mut d_overlap = C::new(T::zero(), T::zero());
            for i in 0..dim {
                for j in 0..dim {
                    d_overlap = d_overlap + b[i].conj() * kernel[i * dim + j] * rotated[i * dim + j] * a[j];
                }
            }
            row[k] = two * (overlap.conj() * d_overlap).re;
        }
        costate = matvec(dim, props[k].adjoint().entries(), &costate);
    }
    Ok(SampleEvaluation { overlap, gradient })
}

/// Per-sample evaluations in ensemble order (parallel over samples).
pub fn evaluate_ensemble<T: Scalar>(
    field: &ControlField<T>,
    model: &QubitModel<T>,
    ensemble: &[FluctuationSample<T>],
    want_gradient: bool,
) -> Result<Vec<SampleEvaluation<T>>> {
    check_shapes(field, model, ensemble)?;
    ensemble
        .par_iter()
        .map(|s| evaluate_sample(field, model, s, want_gradient))
        .collect()
}

/// `J(u)`: mean squared overlap over the ensemble, summed in index order.
pub fn objective<T: Scalar>(field: &ControlField<T>, model: &QubitModel<T>, ensemble: &[FluctuationSample<T>]) -> Result<T> {
    let evals = evaluate_ensemble(field, model, ensemble, false)?;
    Ok(mean_objective(&evals))
}

fn mean_objective<T: Scalar>(evals: &[SampleEvaluation<T>]) -> T {
    let mut sum = T::zero();
    for e in evals {
        sum = sum + e.objective();
    }
    sum / T::from_usize_lossy(evals.len())
}

/// `∇J(u)`, indexed `[channel][interval]`.
pub fn gradient<T: Scalar>(field: &ControlField<T>, model: &QubitModel<T>, ensemble: &[FluctuationSample<T>]) -> Result<Vec<Vec<T>>> {
    Ok(objective_and_gradient(field, model, ensemble)?.1)
}

/// `J(u)` and `∇J(u)` from one forward/backward sweep per sample.
pub fn objective_and_gradient<T: Scalar>(
    field: &ControlField<T>,
    model: &QubitModel<T>,
    ensemble: &[FluctuationSample<T>],
) -> Result<(T, Vec<Vec<T>>)> {
    let evals = evaluate_ensemble(field, model, ensemble, true)?;
    let n = T::from_usize_lossy(evals.len());
    let mut grad = vec![vec![T::zero(); field.intervals()]; field.channels()];
    for e in &evals {
        for (row, erow) in grad.iter_mut().zip(&e.gradient) {
            for (g, &d) in row.iter_mut().zip(erow) {
                *g = *g + d;
            }
        }
    }
    for row in grad.iter_mut() {
        for g in row.iter_mut() {
            *g = *g / n;
        }
    }
    Ok((mean_objective(&evals), grad))
}
