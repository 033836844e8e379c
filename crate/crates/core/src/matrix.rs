//! Dense complex matrices for small dimensions (2 ≤ d ≤ ~101).
//!
//! Row-major storage, no sparsity, no decompositions beyond what the matrix
//! exponential needs. All values are immutable after construction and every
//! operation is a pure function.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {left}×{left} vs {right}×{right}")]
    DimMismatch { left: usize, right: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("{len} entries do not fill a {dim}×{dim} matrix")]
    BadShape { len: usize, dim: usize },
}

/// Absolute-comparison tolerances used throughout the crate.
///
/// `algebraic` guards identities that hold exactly in algebra (trace
/// relations, round trips, closed forms); `dynamic` guards quantities that
/// accumulate integrator error along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub algebraic: f64,
    pub dynamic: f64,
}

impl Tolerance {
    pub fn new(algebraic: f64, dynamic: f64) -> Self {
        assert!(algebraic > 0.0 && dynamic > 0.0 && algebraic <= dynamic);
        Self { algebraic, dynamic }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { algebraic: 1e-10, dynamic: 1e-6 }
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if entries.len() != dim * dim {
            return Err(MatrixError::BadShape { len: entries.len(), dim });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    fn check_dims(&self, other: &Self) -> Result<(), MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_dims(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_dims(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_dims(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| c * z).collect() }
    }

    /// [a, b] = ab − ba.
    pub fn commutator(&self, other: &Self) -> Result<Self, MatrixError> {
        let ab = self.multiply(other)?;
        let ba = other.multiply(self)?;
        ab.sub(&ba)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Largest entrywise absolute value.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// True iff the max entrywise absolute difference is ≤ `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.dagger(), tol)
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    ///
    /// The argument is halved until its largest entry is ≤ 1/2, summed to
    /// machine precision, then squared back up. Accurate to well below the
    /// algebraic tolerance for norms up to ~50.
    pub fn expm(&self) -> Result<Self, MatrixError> {
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        let d = self.dim;
        let norm = self.max_abs() * d as f64;
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(Complex64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0));

        let mut result = Self::identity(d);
        let mut term = Self::identity(d);
        for n in 1..200 {
            term = term.multiply(&scaled)?.scale(Complex64::new(1.0 / n as f64, 0.0));
            result = result.add(&term)?;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.multiply(&result)?;
        }
        Ok(result)
    }
}
