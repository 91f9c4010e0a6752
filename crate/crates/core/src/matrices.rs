//! Unitary and Hermitian matrix wrappers.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// An n x n unitary matrix. Sampled instances are unitary by construction;
/// [`UnitaryMatrix::unitarity_defect`] measures the entrywise deviation of
/// U†U from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

impl UnitaryMatrix {
    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    /// max_ij |(U†U - I)_ij|
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.m.adjoint() * &self.m;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((gram[(i, j)] - expected).norm());
            }
        }
        worst
    }

    /// Restores exact unitarity by QR with the phase convention that keeps
    /// the factor close to the input. Used by long chains to kill drift.
    pub(crate) fn reunitarize(&mut self) {
        let qr = self.m.clone().qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..q.ncols() {
            let d = r[(j, j)];
            let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
        self.m = q;
    }
}

/// An n x n Hermitian matrix; the entry (j,i) is stored as the exact
/// conjugate of (i,j).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSample {
    m: DMatrix<C64>,
}

impl HermitianSample {
    /// Hermitizes the input exactly: the strict upper triangle and the real
    /// part of the diagonal are kept, the rest is mirrored.
    pub fn from_upper(mut m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        Ok(Self { m })
    }

    /// Averages a numerically near-Hermitian matrix with its adjoint, then
    /// mirrors exactly.
    pub fn symmetrized(m: DMatrix<C64>) -> Result<Self> {
        let avg = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self::from_upper(avg)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace_re(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Tr(M^2) = sum |M_ij|^2 for Hermitian M.
    pub fn trace_sq(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigendecomposition with eigenvalues ascending and a deterministic
    /// eigenvector phase: the largest-magnitude component of each column is
    /// made real positive.
    pub fn eigen_sorted(&self) -> (Vec<f64>, UnitaryMatrix) {
        let eig = self.m.clone().symmetric_eigen();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut values = Vec::with_capacity(n);
        let mut vectors = DMatrix::<C64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let col = eig.eigenvectors.column(src);
            let mut pivot = 0usize;
            let mut best = -1.0f64;
            for i in 0..n {
                let mag = col[i].norm();
                if mag > best {
                    best = mag;
                    pivot = i;
                }
            }
            let z = col[pivot];
            let phase = if z.norm() == 0.0 { C64::new(1.0, 0.0) } else { z.conj() / z.norm() };
            for i in 0..n {
                vectors[(i, dst)] = col[i] * phase;
            }
        }
        (values, UnitaryMatrix::from_matrix_unchecked(vectors))
    }
}

/// Builds the complex diagonal matrix of a real eigenvalue list.
pub fn complex_diagonal(values: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
