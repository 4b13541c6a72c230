//! Dense complex linear algebra for 2×2 and 4×4 Hermitian matrices.
//!
//! Matrices are stored inline (no heap allocation) so they can be copied
//! freely through the integrator and ledger. Only the operations needed by
//! qubit and two-qubit thermodynamics are provided: products, adjoints,
//! Kronecker products, partial traces and spectral functions.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Maximum entry-wise deviation from Hermiticity accepted by spectral routines.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Off-diagonal Frobenius norm (relative to the matrix scale) at which the
/// Jacobi sweeps stop.
const JACOBI_TOLERANCE: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |M - M†| = {violation:e}")]
    NotHermitian { violation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("function is undefined on eigenvalue {eigenvalue:e}")]
    UndefinedFunction { eigenvalue: f64 },
}

/// Which factor of a two-qubit tensor product to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A square complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; 16],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "unsupported matrix dimension {dim}");
        Self {
            dim,
            data: [ZERO; 16],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self, LinalgError> {
        if dim != 2 && dim != 4 {
            return Err(LinalgError::Dimension {
                expected: 4,
                found: dim,
            });
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::Dimension {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    /// Row-major view of the `dim * dim` entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        let n = self.dim * self.dim;
        &mut self.data[..n]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = *self;
        out.entries_mut().iter_mut().for_each(|z| *z *= factor);
        out
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |M - M†|.
    pub fn hermitian_violation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// The Hermitian part (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    fn check_hermitian(&self) -> Result<(), LinalgError> {
        let violation = self.hermitian_violation();
        if violation > HERMITIAN_TOLERANCE || !violation.is_finite() {
            return Err(LinalgError::NotHermitian { violation });
        }
        Ok(())
    }
}

impl Add for ComplexMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries_mut().iter_mut().zip(rhs.entries()) {
            *a += b;
        }
        self
    }
}

impl Sub for ComplexMatrix {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries_mut().iter_mut().zip(rhs.entries()) {
            *a -= b;
        }
        self
    }
}

impl Neg for ComplexMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}

/// Pauli matrices and qubit ladder operators.
///
/// The ladder operators follow the thermodynamic frame used throughout the
/// crate: basis index 0 is the ground state of `H = -ε σ_z`, so the lowering
/// operator is `|0⟩⟨1| = (σ_x + iσ_y)/2`.
pub mod pauli {
    use super::{ComplexMatrix, Complex64, ONE, ZERO};

    const I: Complex64 = Complex64::new(0.0, 1.0);

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    /// Lowering operator: takes the excited state (index 1) to the ground state (index 0).
    pub fn lowering() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, ONE, ZERO, ZERO]).unwrap()
    }

    pub fn raising() -> ComplexMatrix {
        lowering().adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    /// Reassembles V Λ V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::from_real_diagonal(&self.values);
        self.vectors * lambda * self.vectors.adjoint()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// 2×2 input uses the closed form; 4×4 input uses cyclic complex Jacobi
/// rotations.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Spectrum, LinalgError> {
    m.check_hermitian()?;
    match m.dim() {
        2 => Ok(eigensystem_2x2(m)),
        _ => Ok(eigensystem_jacobi(m)),
    }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    hermitian_eigensystem(m).map(|s| s.values)
}

fn eigensystem_2x2(m: &ComplexMatrix) -> Spectrum {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let z = m.get(0, 1);
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let radius = half_gap.hypot(z.norm());
    let values = vec![mean - radius, mean + radius];

    let scale = a.abs().max(d.abs()).max(z.norm()).max(f64::MIN_POSITIVE);
    if z.norm() <= f64::EPSILON * scale {
        // Already diagonal: order the basis vectors by their diagonal entry.
        let mut vectors = ComplexMatrix::zeros(2);
        if a <= d {
            vectors.set(0, 0, ONE);
            vectors.set(1, 1, ONE);
        } else {
            vectors.set(1, 0, ONE);
            vectors.set(0, 1, ONE);
        }
        return Spectrum {
            values: vec![a.min(d), a.max(d)],
            vectors,
        };
    }

    let mut vectors = ComplexMatrix::zeros(2);
    for (col, &lambda) in values.iter().enumerate() {
        // Two null vectors of (M - λ); keep the better conditioned one.
        let u = [z, Complex64::new(lambda - a, 0.0)];
        let w = [Complex64::new(lambda - d, 0.0), z.conj()];
        let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
        vectors.set(0, col, v[0] / n);
        vectors.set(1, col, v[1] / n);
    }
    Spectrum { values, vectors }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn eigensystem_jacobi(m: &ComplexMatrix) -> Spectrum {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_TOLERANCE * m.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase-rotate the (p, q) element onto the real axis, then
                // apply the real symmetric Jacobi rotation.
                let phase = apq / r;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                // G = D J with D = diag(1, conj(phase)) on the (p, q) block.
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = phase.conj() * (-s);
                let gqq = phase.conj() * c;

                // A <- A G (columns p, q)
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * gpp + akq * gqp);
                    a.set(k, q, akp * gpq + akq * gqq);
                }
                // A <- G† A (rows p, q)
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, gpp.conj() * apk + gqp.conj() * aqk);
                    a.set(q, k, gpq.conj() * apk + gqq.conj() * aqk);
                }
                // V <- V G
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * gpp + vkq * gqp);
                    v.set(k, q, vkp * gpq + vkq * gqq);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v.get(row, src));
        }
    }
    Spectrum { values, vectors }
}

/// Applies a real scalar function to a Hermitian matrix through its spectrum.
///
/// Fails if `f` returns a non-finite value on any eigenvalue.
pub fn matrix_fn_hermitian<F>(m: &ComplexMatrix, f: F) -> Result<ComplexMatrix, LinalgError>
where
    F: Fn(f64) -> f64,
{
    let spectrum = hermitian_eigensystem(m)?;
    let mut mapped = Vec::with_capacity(spectrum.values.len());
    for &lambda in &spectrum.values {
        let value = f(lambda);
        if !value.is_finite() {
            return Err(LinalgError::UndefinedFunction { eigenvalue: lambda });
        }
        mapped.push(value);
    }
    let diag = ComplexMatrix::from_real_diagonal(&mapped);
    Ok(spectrum.vectors * diag * spectrum.vectors.adjoint())
}

/// Tensor product with `a` as the left (subsystem A) factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.dim() == 2 && b.dim() == 2, "kron is defined for 2×2 factors");
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let aij = a.get(i, j);
            for k in 0..2 {
                for l in 0..2 {
                    out.set(2 * i + k, 2 * j + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Traces out one qubit of a two-qubit operator, returning the kept marginal.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix, LinalgError> {
    if rho.dim() != 4 {
        return Err(LinalgError::Dimension {
            expected: 4,
            found: rho.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let value = match keep {
                Subsystem::A => rho.get(2 * i, 2 * j) + rho.get(2 * i + 1, 2 * j + 1),
                Subsystem::B => rho.get(i, j) + rho.get(2 + i, 2 + j),
            };
            out.set(i, j, value);
        }
    }
    Ok(out)
}
