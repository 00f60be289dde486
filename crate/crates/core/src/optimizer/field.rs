use crate::error::{check_dim, invalid, Result};
use crate::Scalar;

/// Piecewise-constant controls: `channels × intervals` values with
/// per-channel bounds `[V₋, V₊]` over a horizon split into equal steps.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlField<T> {
    values: Vec<Vec<T>>,
    bounds: Vec<(T, T)>,
    horizon: T,
}

impl<T: Scalar> ControlField<T> {
    /// `values[c][k]` must lie within `bounds[c]`.
    pub fn new(values: Vec<Vec<T>>, bounds: Vec<(T, T)>, horizon: T) -> Result<Self> {
        let field = Self::unchecked(values, bounds, horizon)?;
        for (c, (row, &(lo, hi))) in field.values.iter().zip(&field.bounds).enumerate() {
            if let Some(k) = row.iter().position(|&v| !(v >= lo && v <= hi)) {
                return Err(invalid(format!("value {} at channel {c}, interval {k} outside [{lo}, {hi}]", row[k])));
            }
        }
        Ok(field)
    }

    /// Like [`ControlField::new`] but clamps values into bounds instead of rejecting.
    pub fn clamped(values: Vec<Vec<T>>, bounds: Vec<(T, T)>, horizon: T) -> Result<Self> {
        let mut field = Self::unchecked(values, bounds, horizon)?;
        field.clamp_in_place();
        Ok(field)
    }

    fn unchecked(values: Vec<Vec<T>>, bounds: Vec<(T, T)>, horizon: T) -> Result<Self> {
        check_dim(bounds.len(), values.len())?;
        if values.is_empty() {
            return Err(invalid("field needs at least one channel"));
        }
        let m = values[0].len();
        if m == 0 {
            return Err(invalid("field needs at least one interval"));
        }
        for row in &values {
            check_dim(m, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(invalid("non-finite control value"));
            }
        }
        if let Some(&(lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo <= hi)) {
            return Err(invalid(format!("channel bounds [{lo}, {hi}] are inverted")));
        }
        if !(horizon > T::zero()) {
            return Err(invalid("horizon must be positive"));
        }
        Ok(Self { values, bounds, horizon })
    }

    /// Samples `f(channel, t)` at interval midpoints, then clamps.
    pub fn from_fn(bounds: Vec<(T, T)>, horizon: T, intervals: usize, mut f: impl FnMut(usize, T) -> T) -> Result<Self> {
        let dt = horizon / T::from_usize_lossy(intervals.max(1));
        let values = (0..bounds.len())
            .map(|c| (0..intervals).map(|k| f(c, (T::from_usize_lossy(k) + T::lit(0.5)) * dt)).collect())
            .collect();
        Self::clamped(values, bounds, horizon)
    }

    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn intervals(&self) -> usize {
        self.values[0].len()
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_usize_lossy(self.intervals())
    }

    #[inline]
    pub fn value(&self, channel: usize, interval: usize) -> T {
        self.values[channel][interval]
    }

    /// Values indexed `[channel][interval]`.
    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }

    /// Control vector applied during interval `k`.
    pub fn column(&self, k: usize) -> Vec<T> {
        self.values.iter().map(|row| row[k]).collect()
    }

    pub fn is_within_bounds(&self) -> bool {
        self.values
            .iter()
            .zip(&self.bounds)
            .all(|(row, &(lo, hi))| row.iter().all(|&v| v >= lo && v <= hi))
    }

    /// `clamp(self + step · direction)`.
    pub fn stepped(&self, direction: &[Vec<T>], step: T) -> Self {
        let mut out = self.clone();
        for (row, drow) in out.values.iter_mut().zip(direction) {
            for (v, &d) in row.iter_mut().zip(drow) {
                *v = *v + step * d;
            }
        }
        out.clamp_in_place();
        out
    }

    fn clamp_in_place(&mut self) {
        for (row, &(lo, hi)) in self.values.iter_mut().zip(&self.bounds) {
            for v in row.iter_mut() {
                if *v <= lo {
                    *v = lo;
                } else if *v >= hi {
                    *v = hi;
                }
            }
        }
    }
}

/// Projects every value onto its channel's `[V₋, V₊]`.
pub fn clamp<T: Scalar>(field: &ControlField<T>) -> ControlField<T> {
    let mut out = field.clone();
    out.clamp_in_place();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(values: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>) -> ControlField<f64> {
        ControlField::unchecked(values, bounds, 1.0).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let f = raw(vec![vec![41.0, 3.0], vec![-0.7, 0.2]], vec![(0.0, 40.0), (-0.5, 0.5)]);
        let c = clamp(&f);
        assert_eq!(c.values(), &[vec![40.0, 3.0], vec![-0.5, 0.2]]);
        let again = clamp(&c);
        assert_eq!(again, c);
        for (a, b) in again.values().iter().flatten().zip(c.values().iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn construction_validates() {
        assert!(ControlField::new(vec![vec![41.0]], vec![(0.0, 40.0)], 1.0).is_err());
        assert!(ControlField::new(vec![vec![1.0], vec![1.0, 2.0]], vec![(0.0, 4.0); 2], 1.0).is_err());
        assert!(ControlField::new(vec![vec![1.0]], vec![(2.0, 1.0)], 1.0).is_err());
        assert!(ControlField::new(vec![vec![1.0]], vec![(0.0, 4.0)], 0.0).is_err());
        assert!(ControlField::<f64>::new(vec![vec![]], vec![(0.0, 4.0)], 1.0).is_err());
    }

    #[test]
    fn horizon_and_step() {
        let f = ControlField::from_fn(vec![(0.0, 1.0)], 2.0, 200, |_, _| 0.5).unwrap();
        assert!((f.dt() * f.intervals() as f64 - f.horizon()).abs() < 1e-12);
        assert_eq!(f.column(3), vec![0.5]);
    }
}
