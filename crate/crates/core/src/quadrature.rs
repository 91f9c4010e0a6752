//! Gauss–Hermite quadrature with tilt absorbed by completing the square.
//!
//! Nodes and weights come from the Golub–Welsch eigenproblem of the Hermite
//! Jacobi matrix (weight `e^{-u^2}`); 60 nodes integrate polynomials exactly
//! up to degree 119.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 60;

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule of `n` points for the weight `e^{-u^2}` on the real line.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("quadrature order must be >= 1".into()));
        }
        if n == 1 {
            return Ok(Self {
                nodes: vec![0.0],
                weights: vec![std::f64::consts::PI.sqrt()],
            });
        }
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let beta = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = beta;
            jacobi[(k, k - 1)] = beta;
        }
        let eig = jacobi.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mu0 = std::f64::consts::PI.sqrt();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &idx in &order {
            nodes.push(eig.eigenvalues[idx]);
            let q0 = eig.eigenvectors[(0, idx)];
            weights.push(mu0 * q0 * q0);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f(x) e^{-(x-shift)^2 / (2 sigma2)} dx` by substitution
    /// `x = shift + sqrt(2 sigma2) u`.
    pub fn integrate_gaussian(&self, sigma2: f64, shift: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        if !(sigma2 > 0.0) {
            return Err(Error::Domain(format!(
                "Gaussian width must be positive, got {sigma2}"
            )));
        }
        let scale = (2.0 * sigma2).sqrt();
        let mut sum = 0.0;
        for (u, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(shift + scale * u);
        }
        Ok(scale * sum)
    }

    /// `∫ f(x) x^k e^{gamma x - x^2/(2 sigma2)} dx` with the tilt absorbed:
    /// the Gaussian is recentered at `sigma2 * gamma` and the constant
    /// `exp(sigma2 gamma^2 / 2)` multiplies the result. `f` should be smooth
    /// and sub-exponential around the shifted center.
    pub fn integrate_tilted(
        &self,
        sigma2: f64,
        gamma: f64,
        k: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let shift = sigma2 * gamma;
        let prefactor = (sigma2 * gamma * gamma / 2.0).exp();
        let val = self.integrate_gaussian(sigma2, shift, |x| f(x) * x.powi(k as i32))?;
        Ok(prefactor * val)
    }
}
