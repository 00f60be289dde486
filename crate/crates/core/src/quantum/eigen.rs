//! Cyclic complex Jacobi eigensolver for small dense Hermitian matrices.

use crate::error::{Error, Result};
use crate::{Scalar, C};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `H = V diag(values) V†` of a Hermitian matrix.
///
/// `vectors` is row-major with the eigenvectors stored as columns, so
/// `vectors[i * dim + j]` is component `i` of eigenvector `j`.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub dim: usize,
    pub values: Vec<T>,
    pub vectors: Vec<C<T>>,
}

impl<T: Scalar> Spectrum<T> {
    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn vector(&self, i: usize, j: usize) -> C<T> {
        self.vectors[i * self.dim + j]
    }

    /// `V† x`: coordinates of `x` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).fold(C::new(T::zero(), T::zero()), |acc, i| acc + self.vector(i, j).conj() * x[i]))
            .collect()
    }

    /// `V y`: back from eigenbasis coordinates.
    pub fn from_eigenbasis(&self, y: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).fold(C::new(T::zero(), T::zero()), |acc, j| acc + self.vector(i, j) * y[j]))
            .collect()
    }

    /// `V† A V` for a dense row-major `A`.
    pub fn conjugate_into_eigenbasis(&self, a: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim;
        let zero = C::new(T::zero(), T::zero());
        // A V
        let mut av = vec![zero; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = zero;
                for k in 0..d {
                    s = s + a[i * d + k] * self.vector(k, j);
                }
                av[i * d + j] = s;
            }
        }
        let mut out = vec![zero; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = zero;
                for k in 0..d {
                    s = s + self.vector(k, i).conj() * av[k * d + j];
                }
                out[i * d + j] = s;
            }
        }
        out
    }
}

/// Diagonalises the Hermitian row-major matrix `a` of size `dim`.
///
/// Only the upper triangle's relationship with the lower one is assumed
/// (`a[j][i] = conj(a[i][j])`); the diagonal's imaginary part is ignored.
pub fn eigh<T: Scalar>(dim: usize, a: &[C<T>]) -> Result<Spectrum<T>> {
    if a.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: a.len() });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in Hermitian matrix".into()));
    }
    let zero = C::new(T::zero(), T::zero());
    let one = C::new(T::one(), T::zero());
    let mut m = a.to_vec();
    for i in 0..dim {
        m[i * dim + i] = C::new(m[i * dim + i].re, T::zero());
    }
    let mut v = vec![zero; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = one;
    }

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if scale == T::zero() {
        return Ok(Spectrum { dim, values: vec![T::zero(); dim], vectors: v });
    }
    let threshold = T::tiny() * scale;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(dim, &m);
        if off <= threshold {
            let values = (0..dim).map(|i| m[i * dim + i].re).collect();
            return Ok(Spectrum { dim, values, vectors: v });
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                rotate(dim, &mut m, &mut v, p, q);
            }
        }
    }
    Err(Error::Numerical("Jacobi eigensolver did not converge".into()))
}

fn off_diagonal_norm<T: Scalar>(dim: usize, m: &[C<T>]) -> T {
    let mut s = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                s = s + m[i * dim + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One unitary Jacobi rotation annihilating `m[p][q]`.
fn rotate<T: Scalar>(dim: usize, m: &mut [C<T>], v: &mut [C<T>], p: usize, q: usize) {
    let apq = m[p * dim + q];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    // Phase `apq / r` turns the pivot real; then a real symmetric rotation.
    let phase = apq / r;
    let app = m[p * dim + p].re;
    let aqq = m[q * dim + q].re;
    let two = T::one() + T::one();
    let theta = (aqq - app) / (two * r);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // W = D P with D = diag(1, conj(phase)) on (p, q).
    let wpp = C::new(c, T::zero());
    let wpq = C::new(s, T::zero());
    let wqp = phase.conj() * (-s);
    let wqq = phase.conj() * c;

    // M <- M W (columns p, q)
    for k in 0..dim {
        let mkp = m[k * dim + p];
        let mkq = m[k * dim + q];
        m[k * dim + p] = mkp * wpp + mkq * wqp;
        m[k * dim + q] = mkp * wpq + mkq * wqq;
    }
    // M <- W† M (rows p, q)
    for k in 0..dim {
        let mpk = m[p * dim + k];
        let mqk = m[q * dim + k];
        m[p * dim + k] = wpp.conj() * mpk + wqp.conj() * mqk;
        m[q * dim + k] = wpq.conj() * mpk + wqq.conj() * mqk;
    }
    let zero = C::new(T::zero(), T::zero());
    m[p * dim + q] = zero;
    m[q * dim + p] = zero;
    m[p * dim + p] = C::new(m[p * dim + p].re, T::zero());
    m[q * dim + q] = C::new(m[q * dim + q].re, T::zero());

    // V <- V W
    for k in 0..dim {
        let vkp = v[k * dim + p];
        let vkq = v[k * dim + q];
        v[k * dim + p] = vkp * wpp + vkq * wqp;
        v[k * dim + q] = vkp * wpq + vkq * wqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn reconstruct(s: &Spectrum<f64>) -> Vec<C<f64>> {
        let d = s.dim;
        let mut out = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out[i * d + j] += s.vector(i, k) * s.values[k] * s.vector(j, k).conj();
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_input_is_returned_unchanged() {
        let a = vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)];
        let s = eigh(2, &a).unwrap();
        assert_eq!(s.values, vec![3.0, -1.0]);
    }

    #[test]
    fn complex_4x4_reconstructs() {
        let a = vec![
            c(1.0, 0.0), c(0.5, 0.2), c(0.0, -1.0), c(0.3, 0.0),
            c(0.5, -0.2), c(-2.0, 0.0), c(0.1, 0.1), c(0.0, 0.7),
            c(0.0, 1.0), c(0.1, -0.1), c(0.5, 0.0), c(1.2, -0.4),
            c(0.3, 0.0), c(0.0, -0.7), c(1.2, 0.4), c(3.0, 0.0),
        ];
        let s = eigh(4, &a).unwrap();
        let r = reconstruct(&s);
        for (x, y) in r.iter().zip(&a) {
            assert!((x - y).norm() < 1e-13, "{x} vs {y}");
        }
        // V unitary
        for i in 0..4 {
            for j in 0..4 {
                let dot: C<f64> = (0..4).map(|k| s.vector(k, i).conj() * s.vector(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - c(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let a = vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        let s = eigh(2, &a).unwrap();
        assert_eq!(s.values, vec![2.0, 2.0]);
    }

    #[test]
    fn rejects_nan() {
        let a = vec![c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(eigh(2, &a), Err(Error::Numerical(_))));
    }
}
