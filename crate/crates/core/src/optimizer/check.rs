//! Central finite-difference check of the analytic gradient.

use rayon::prelude::*;

use super::{gradient, objective, ControlField};
use crate::error::{invalid, Result};
use crate::models::QubitModel;
use crate::sampling::FluctuationSample;
use crate::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct GradientCheck<T> {
    /// Worst `|fd − g| / max(|fd|, |g|, max_c,k |g|)` over the checked entries.
    pub max_relative_error: T,
    /// Worst `|fd − g| / max(|fd|, |g|)`; dominated by difference roundoff
    /// on entries whose derivative is tiny.
    pub max_pointwise_error: T,
    pub max_absolute_error: T,
    pub entries: usize,
}

/// Compares the gradient at `entries` (`(channel, interval)`, all when
/// `None`) with `(J(u + h e) − J(u − h e)) / 2h`. Checked entries must sit at
/// least `h` inside their channel bounds.
pub fn check_gradient<T: Scalar>(
    field: &ControlField<T>,
    model: &QubitModel<T>,
    ensemble: &[FluctuationSample<T>],
    h: T,
    entries: Option<&[(usize, usize)]>,
) -> Result<GradientCheck<T>> {
    if !(h > T::zero()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let grad = gradient(field, model, ensemble)?;
    let all: Vec<(usize, usize)>;
    let entries = match entries {
        Some(e) => e,
        None => {
            all = (0..field.channels()).flat_map(|c| (0..field.intervals()).map(move |k| (c, k))).collect();
            &all
        }
    };
    let scale = grad.iter().flatten().fold(T::zero(), |m, g| m.max(g.abs()));
    let shifted = |c: usize, k: usize, delta: T| -> Result<T> {
        let mut values = field.values().to_vec();
        values[c][k] = values[c][k] + delta;
        objective(&ControlField::new(values, field.bounds().to_vec(), field.horizon())?, model, ensemble)
    };
    let errors = entries
        .par_iter()
        .map(|&(c, k)| {
            if c >= field.channels() || k >= field.intervals() {
                return Err(invalid(format!("entry ({c}, {k}) outside the field")));
            }
            let fd = (shifted(c, k, h)? - shifted(c, k, -h)?) / (h + h);
            let g = grad[c][k];
            let diff = (fd - g).abs();
            let local = fd.abs().max(g.abs());
            let pointwise = if local > T::zero() { diff / local } else { T::zero() };
            let relative = if local.max(scale) > T::zero() { diff / local.max(scale) } else { T::zero() };
            Ok((relative, pointwise, diff))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = GradientCheck {
        max_relative_error: T::zero(),
        max_pointwise_error: T::zero(),
        max_absolute_error: T::zero(),
        entries: errors.len(),
    };
    for (r, p, a) in errors {
        out.max_relative_error = out.max_relative_error.max(r);
        out.max_pointwise_error = out.max_pointwise_error.max(p);
        out.max_absolute_error = out.max_absolute_error.max(a);
    }
    Ok(out)
}
