//! Complex linear algebra for 1- and 2-qubit systems.
//!
//! Conventions: `|g⟩ = (1, 0)`, `|e⟩ = (0, 1)` with `σ_z|g⟩ = +|g⟩`;
//! two-qubit kets are ordered `|q1 q2⟩` with qubit 1 the left tensor
//! factor. Operators hold `H/ħ` in 1/ns, so `exp(-i H dt)` takes `dt` in ns.

mod eigen;

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

pub use eigen::{eigh, Spectrum};

use crate::error::{check_dim, invalid, Error, Result};
use crate::{Scalar, C};

#[inline]
fn czero<T: Scalar>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// Tolerance for the unit-norm check on construction.
fn norm_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// Unit-norm ket of dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T> {
    amps: Vec<C<T>>,
}

impl<T: Scalar> QuantumState<T> {
    /// Wraps `amps`, which must already have unit norm.
    pub fn new(amps: Vec<C<T>>) -> Result<Self> {
        validate_dim(amps.len())?;
        let norm = norm_of(&amps);
        if (norm - T::one()).abs() > norm_tolerance() {
            return Err(invalid(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Vec<C<T>>) -> Result<Self> {
        validate_dim(amps.len())?;
        let norm = norm_of(&amps);
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(invalid("cannot normalise a zero or non-finite vector"));
        }
        Ok(Self { amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        validate_dim(dim)?;
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amps = vec![czero(); dim];
        amps[index] = C::new(T::one(), T::zero());
        Ok(Self { amps })
    }

    /// Internal constructor for vectors produced by unitary propagation.
    pub(crate) fn from_unitary_image(amps: Vec<C<T>>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        norm_of(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `e^{iα}|self⟩`.
    pub fn with_global_phase(&self, alpha: T) -> Self {
        let ph = C::new(alpha.cos(), alpha.sin());
        Self { amps: self.amps.iter().map(|&a| a * ph).collect() }
    }
}

fn validate_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(invalid(format!("unsupported dimension {dim}; expected 2 or 4")))
    }
}

fn norm_of<T: Scalar>(amps: &[C<T>]) -> T {
    amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

#[inline]
pub(crate) fn inner<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// `H/ħ` as a dense Hermitian matrix (1/ns).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Scalar> HermitianOperator<T> {
    /// Builds from row-major entries; Hermiticity is checked exactly.
    pub fn from_entries(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        for i in 0..dim {
            for j in 0..dim {
                if entries[i * dim + j] != entries[j * dim + i].conj() {
                    return Err(invalid(format!("entry ({i},{j}) breaks Hermiticity")));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn diagonal(values: &[T]) -> Self {
        let dim = values.len();
        let mut op = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            op.entries[i * dim + i] = C::new(v, T::zero());
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * factor).collect() }
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, other: &Self, factor: T) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = *a + b * factor;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, -T::one())?;
        Ok(out)
    }

    pub fn is_hermitian(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        matvec(self.dim, &self.entries, psi)
    }

    pub fn eigh(&self) -> Result<Spectrum<T>> {
        eigh(self.dim, &self.entries)
    }
}

impl<T: Scalar> fmt::Display for HermitianOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) fn matvec<T: Scalar>(dim: usize, m: &[C<T>], x: &[C<T>]) -> Vec<C<T>> {
    (0..dim)
        .map(|i| (0..dim).fold(czero(), |acc, j| acc + m[i * dim + j] * x[j]))
        .collect()
}

/// Unitary one-step solution `exp(-i H dt)` of the Schrödinger equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator<T> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Scalar> Propagator<T> {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![czero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C::new(T::one(), T::zero());
        }
        Self { dim, entries }
    }

    /// `V diag(e^{-i λ dt}) V†` from a precomputed spectrum.
    pub fn from_spectrum(spectrum: &Spectrum<T>, dt: T) -> Self {
        let d = spectrum.dim;
        let phases: Vec<C<T>> = spectrum.values.iter().map(|&l| C::new(T::zero(), -l * dt).exp()).collect();
        let mut entries = vec![czero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = czero::<T>();
                for k in 0..d {
                    s = s + spectrum.vector(i, k) * phases[k] * spectrum.vector(j, k).conj();
                }
                entries[i * d + j] = s;
            }
        }
        Self { dim: d, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn apply(&self, psi: &QuantumState<T>) -> Result<QuantumState<T>> {
        check_dim(self.dim, psi.dim())?;
        Ok(QuantumState::from_unitary_image(matvec(self.dim, &self.entries, &psi.amps)))
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![czero(); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.get(j, i).conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                let mut s = czero::<T>();
                for k in 0..d {
                    s = s + self.get(k, i).conj() * self.get(k, j);
                }
                let target = if i == j { T::one() } else { T::zero() };
                let dev: C<T> = s - C::new(target, T::zero());
                worst = worst.max(dev.norm());
            }
        }
        worst
    }
}

impl<T: Scalar> Mul for &Propagator<T> {
    type Output = Propagator<T>;

    fn mul(self, rhs: Self) -> Propagator<T> {
        assert_eq!(self.dim, rhs.dim, "propagator dimensions differ");
        let d = self.dim;
        let mut entries = vec![czero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = czero::<T>();
                for k in 0..d {
                    s = s + self.get(i, k) * rhs.get(k, j);
                }
                entries[i * d + j] = s;
            }
        }
        Propagator { dim: d, entries }
    }
}

/// Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(invalid(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

/// 2×2 Pauli matrix.
pub fn pauli<T: Scalar>(axis: Axis) -> HermitianOperator<T> {
    let o = T::zero();
    let l = T::one();
    let entries = match axis {
        Axis::X => vec![C::new(o, o), C::new(l, o), C::new(l, o), C::new(o, o)],
        Axis::Y => vec![C::new(o, o), C::new(o, -l), C::new(o, l), C::new(o, o)],
        Axis::Z => vec![C::new(l, o), C::new(o, o), C::new(o, o), C::new(-l, o)],
    };
    HermitianOperator { dim: 2, entries }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor<T: Scalar>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut entries = vec![czero(); d * d];
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            for k in 0..db {
                for l in 0..db {
                    entries[(i * db + k) * d + (j * db + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    HermitianOperator { dim: d, entries }
}

/// `exp(-i h dt)` via the spectral decomposition of `h`.
pub fn step_propagator<T: Scalar>(h: &HermitianOperator<T>, dt: T) -> Result<Propagator<T>> {
    if !(dt > T::zero()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let spectrum = h.eigh()?;
    Ok(Propagator::from_spectrum(&spectrum, dt))
}

/// States `ψ_0, ψ_1, …, ψ_M` visited by a piecewise-constant evolution.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub states: Vec<QuantumState<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &QuantumState<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Applies one step propagator per `(H, dt)` entry, in order.
pub fn evolve<T: Scalar>(psi0: &QuantumState<T>, schedule: &[(HermitianOperator<T>, T)]) -> Result<Trajectory<T>> {
    let mut states = Vec::with_capacity(schedule.len() + 1);
    states.push(psi0.clone());
    for (h, dt) in schedule {
        check_dim(psi0.dim(), h.dim())?;
        let u = step_propagator(h, *dt)?;
        let next = u.apply(states.last().unwrap())?;
        states.push(next);
    }
    Ok(Trajectory { states })
}

/// `F = |⟨a|b⟩|`.
pub fn fidelity<T: Scalar>(a: &QuantumState<T>, b: &QuantumState<T>) -> Result<T> {
    Ok(a.inner(b)?.norm().min(T::one()))
}
