//! Log-domain determinants and Vandermonde products.
//!
//! Entries of the form `e^{a_i b_j}` overflow double precision already at
//! `a_i b_j ~ 710`, so determinants are evaluated on matrices of
//! (sign, log-magnitude) entries: the per-row and per-column maxima of the
//! exponents are factored out, LU with partial pivoting runs on the bounded
//! residual, and the offsets are added back to the log magnitude.

use nalgebra::DMatrix;

use crate::boundary::BoundaryData;
use crate::error::{Error, Result};
use crate::signed_log::SignedLogValue;

/// `ln(k!)` by direct accumulation.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln(prod_{k=1}^{n-1} k!)`, the HCIZ constant, as a running log-sum so the
/// factorials never materialize.
pub fn ln_superfactorial(n: usize) -> f64 {
    let mut total = 0.0;
    let mut ln_k_fact = 0.0;
    for k in 1..n {
        ln_k_fact += (k as f64).ln();
        total += ln_k_fact;
    }
    total
}

/// Matrix with entries `sign * exp(log_magnitude)`; the shared representation
/// behind every determinant and kernel-trace evaluation.
#[derive(Debug, Clone)]
pub(crate) struct SignedLogMatrix {
    pub signs: DMatrix<f64>,
    pub log_mags: DMatrix<f64>,
}

impl SignedLogMatrix {
    pub fn from_fn(
        nrows: usize,
        ncols: usize,
        f: impl Fn(usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        let mut signs = DMatrix::zeros(nrows, ncols);
        let mut log_mags = DMatrix::from_element(nrows, ncols, f64::NEG_INFINITY);
        for i in 0..nrows {
            for j in 0..ncols {
                let (s, lm) = f(i, j);
                if lm.is_nan() || lm == f64::INFINITY {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                signs[(i, j)] = if lm == f64::NEG_INFINITY { 0.0 } else { s.signum() };
                log_mags[(i, j)] = if signs[(i, j)] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    lm
                };
            }
        }
        Ok(Self { signs, log_mags })
    }

    pub fn nrows(&self) -> usize {
        self.signs.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.signs.ncols()
    }

    /// Factors out per-row and per-column maxima and returns the bounded
    /// residual matrix together with the total factored log offset. Returns
    /// `None` when a whole row or column vanishes (determinant zero).
    pub fn scaled(&self) -> Option<(DMatrix<f64>, f64)> {
        let (nrows, ncols) = (self.nrows(), self.ncols());
        let mut row_off = vec![f64::NEG_INFINITY; nrows];
        for i in 0..nrows {
            for j in 0..ncols {
                row_off[i] = row_off[i].max(self.log_mags[(i, j)]);
            }
            if row_off[i] == f64::NEG_INFINITY {
                return None;
            }
        }
        let mut col_off = vec![f64::NEG_INFINITY; ncols];
        for j in 0..ncols {
            for i in 0..nrows {
                col_off[j] = col_off[j].max(self.log_mags[(i, j)] - row_off[i]);
            }
            if col_off[j] == f64::NEG_INFINITY {
                return None;
            }
        }
        let residual = DMatrix::from_fn(nrows, ncols, |i, j| {
            self.signs[(i, j)] * (self.log_mags[(i, j)] - row_off[i] - col_off[j]).exp()
        });
        let offset = row_off.iter().sum::<f64>() + col_off.iter().sum::<f64>();
        Some((residual, offset))
    }

    pub fn det(&self) -> Result<SignedLogValue> {
        if self.nrows() != self.ncols() {
            return Err(Error::NotSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        let Some((residual, offset)) = self.scaled() else {
            return Ok(SignedLogValue::ZERO);
        };
        let d = det_plain(&residual);
        Ok(SignedLogValue::new(d.sign(), d.log_magnitude() + offset))
    }
}

/// Sign and log-determinant of a plain matrix via LU with partial pivoting.
fn det_plain(m: &DMatrix<f64>) -> SignedLogValue {
    let n = m.nrows();
    if n == 0 {
        return SignedLogValue::ONE;
    }
    let lu = m.clone().lu();
    let mut sign: i8 = if lu.p().determinant::<f64>() > 0.0 { 1 } else { -1 };
    let mut log_mag = 0.0;
    let u = lu.u();
    for k in 0..n {
        let d = u[(k, k)];
        if d == 0.0 {
            return SignedLogValue::ZERO;
        }
        if d < 0.0 {
            sign = -sign;
        }
        log_mag += d.abs().ln();
    }
    SignedLogValue::new(sign, log_mag)
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Sign and log-determinant of a plain real matrix.
pub fn signed_log_det(matrix: &DMatrix<f64>) -> Result<SignedLogValue> {
    check_square_finite(matrix)?;
    let parts = SignedLogMatrix::from_fn(matrix.nrows(), matrix.ncols(), |i, j| {
        let x = matrix[(i, j)];
        if x == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (x.signum(), x.abs().ln())
        }
    })?;
    parts.det()
}

/// Determinant of the matrix with entries `exp(exponents[i][j])`, evaluated
/// without forming the exponentials.
pub fn signed_log_det_log_entries(exponents: &DMatrix<f64>) -> Result<SignedLogValue> {
    check_square_finite(exponents)?;
    let parts = SignedLogMatrix::from_fn(exponents.nrows(), exponents.ncols(), |i, j| {
        (1.0, exponents[(i, j)])
    })?;
    parts.det()
}

/// `Delta(v) = prod_{i<j} (v_j - v_i)` with orientation sign. A repeated
/// value yields sign zero; callers needing a finite value must switch to the
/// confluent form.
pub fn log_vandermonde(values: &[f64]) -> Result<SignedLogValue> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in Vandermonde input".into()));
    }
    let mut sign: i8 = 1;
    let mut log_mag = 0.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let d = values[j] - values[i];
            if d == 0.0 {
                return Ok(SignedLogValue::ZERO);
            }
            if d < 0.0 {
                sign = -sign;
            }
            log_mag += d.abs().ln();
        }
    }
    Ok(SignedLogValue::new(sign, log_mag))
}

/// Confluent Vandermonde for clustered locations:
/// `prod_i prod_{r<m_i} r! * prod_{i<k} (a_k - a_i)^{m_i m_k}`.
/// Positive by construction since cluster values are strictly increasing.
pub fn log_confluent_vandermonde(data: &BoundaryData) -> SignedLogValue {
    let clusters = data.clusters();
    let mut log_mag = 0.0;
    for c in clusters {
        for r in 0..c.multiplicity {
            log_mag += ln_factorial(r);
        }
    }
    for i in 0..clusters.len() {
        for k in (i + 1)..clusters.len() {
            let gap = clusters[k].value - clusters[i].value;
            log_mag += (clusters[i].multiplicity * clusters[k].multiplicity) as f64 * gap.ln();
        }
    }
    SignedLogValue::new(1, log_mag)
}
