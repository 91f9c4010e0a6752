//! Haar-unitary and GUE samplers.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrices::{HermitianSample, UnitaryMatrix, C64};
use crate::rng::RngState;

fn standard_complex(rng: &mut RngState) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of an i.i.d. complex Gaussian matrix with the
/// triangular diagonal re-phased to positive reals, which makes the
/// distribution exactly Haar rather than merely orthonormal.
pub fn sample_haar_unitary(n: usize, rng: &mut RngState) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("unitary dimension must be >= 1".into()));
    }
    let g = DMatrix::from_fn(n, n, |_, _| standard_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix::from_matrix_unchecked(q))
}

/// GUE draw with density proportional to exp(-Tr X^2 / (2 sigma2)):
/// real diagonal entries of variance sigma2, off-diagonal real and imaginary
/// parts of variance sigma2/2 each, so that E[Tr X^2] = n^2 sigma2.
pub fn sample_gue(n: usize, sigma2: f64, rng: &mut RngState) -> Result<HermitianSample> {
    if n == 0 {
        return Err(Error::InvalidInput("GUE dimension must be >= 1".into()));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!(
            "GUE variance must be positive, got {sigma2}"
        )));
    }
    let sigma = sigma2.sqrt();
    let off = (sigma2 / 2.0).sqrt();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = C64::new(sigma * d, 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = C64::new(off * re, off * im);
        }
    }
    HermitianSample::from_upper(m)
}
