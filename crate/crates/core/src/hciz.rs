//! The unitary-group integral `∫ exp(Tr(A W B W†)) dW` in log domain, for
//! distinct and clustered spectra, together with a direct Monte Carlo oracle
//! and a Metropolis sampler of the weighted unitary marginal.

use nalgebra::DMatrix;
use rand::Rng;

use crate::boundary::BoundaryData;
use crate::chain::{ChainConfig, StepTuner};
use crate::error::{Error, Result};
use crate::linalg::{
    log_confluent_vandermonde, log_vandermonde, ln_superfactorial, SignedLogMatrix,
};
use crate::matrices::{UnitaryMatrix, C64};
use crate::parallel::{map_indexed, map_indexed_seq};
use crate::rng::RngState;
use crate::sampling::{sample_gue, sample_haar_unitary};
use crate::signed_log::SignedLogValue;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

fn factorial(k: usize) -> f64 {
    (2..=k).map(|j| j as f64).product()
}

/// `H_{r,s}(a,b) = sum_{t<=min(r,s)} C(r,t) C(s,t) t! a^{s-t} b^{r-t}`,
/// the polynomial with `∂_a^r ∂_b^s e^{ab} = e^{ab} H_{r,s}(a,b)`.
pub fn h_poly(r: usize, s: usize, a: f64, b: f64) -> f64 {
    (0..=r.min(s))
        .map(|t| {
            binomial(r, t)
                * binomial(s, t)
                * factorial(t)
                * a.powi((s - t) as i32)
                * b.powi((r - t) as i32)
        })
        .sum()
}

/// HCIZ integral for distinct spectra:
/// `(prod_{k<n} k!) det[e^{a_i b_j}] / (Delta(a) Delta(b))`.
pub fn hciz_log(a: &[f64], b: &[f64]) -> Result<SignedLogValue> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "spectra must have equal length, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty spectra".into()));
    }
    let da = log_vandermonde(a)?;
    let db = log_vandermonde(b)?;
    if da.is_zero() || db.is_zero() {
        return Err(Error::ConfluentRequired);
    }
    let n = a.len();
    let exponents = DMatrix::from_fn(n, n, |i, j| a[i] * b[j]);
    let det = SignedLogMatrix::from_fn(n, n, |i, j| (1.0, exponents[(i, j)]))?.det()?;
    Ok(SignedLogValue::new(1, ln_superfactorial(n)) * det / (da * db))
}

/// Row/column labels of the confluent kernel matrix: block `(i, j)` of size
/// `m_i x n_j` holds `∂_a^r ∂_b^s e^{ab} = e^{a_i b_j} H_{r,s}(a_i, b_j)`.
fn confluent_indices(data: &BoundaryData) -> Vec<(usize, usize)> {
    let mut idx = Vec::with_capacity(data.dimension());
    for (c, cluster) in data.clusters().iter().enumerate() {
        for r in 0..cluster.multiplicity {
            idx.push((c, r));
        }
    }
    idx
}

/// The confluent kernel in scaled form: entries are
/// `H_{r,s}(a_i, b_j) * exp(a_i b_j - row_off_u - col_off_v)`, with the
/// offsets chosen so the residual stays representable. Derivative matrices
/// built with [`Self::derivative_in_a`]/[`Self::derivative_in_b`] share the
/// same offsets, so traces of `E^{-1} ∂E` are scale-free.
pub(crate) struct ScaledConfluentKernel {
    pub residual: DMatrix<f64>,
    pub row_off: Vec<f64>,
    pub col_off: Vec<f64>,
    pub row_index: Vec<(usize, usize)>,
    pub col_index: Vec<(usize, usize)>,
    a_values: Vec<f64>,
    b_values: Vec<f64>,
}

impl ScaledConfluentKernel {
    pub fn build(a: &BoundaryData, b: &BoundaryData) -> Result<Self> {
        let n = a.dimension();
        if n != b.dimension() {
            return Err(Error::Dimension(format!(
                "total multiplicities must agree, got {} and {}",
                n,
                b.dimension()
            )));
        }
        let row_index = confluent_indices(a);
        let col_index = confluent_indices(b);
        let a_values = a.values();
        let b_values = b.values();

        let exponent =
            |u: usize, v: usize| a_values[row_index[u].0] * b_values[col_index[v].0];
        let mut row_off = vec![f64::NEG_INFINITY; n];
        for u in 0..n {
            for v in 0..n {
                row_off[u] = row_off[u].max(exponent(u, v));
            }
        }
        let mut col_off = vec![f64::NEG_INFINITY; n];
        for v in 0..n {
            for u in 0..n {
                col_off[v] = col_off[v].max(exponent(u, v) - row_off[u]);
            }
        }
        let residual = DMatrix::from_fn(n, n, |u, v| {
            let (i, r) = row_index[u];
            let (j, s) = col_index[v];
            h_poly(r, s, a_values[i], b_values[j])
                * (exponent(u, v) - row_off[u] - col_off[v]).exp()
        });
        Ok(Self {
            residual,
            row_off,
            col_off,
            row_index,
            col_index,
            a_values,
            b_values,
        })
    }

    /// Scaled `∂E/∂a_c`: rows of cluster `c` advance the derivative order in
    /// `a`, all other rows vanish.
    pub fn derivative_in_a(&self, c: usize) -> DMatrix<f64> {
        let n = self.residual.nrows();
        DMatrix::from_fn(n, n, |u, v| {
            let (i, r) = self.row_index[u];
            if i != c {
                return 0.0;
            }
            let (j, s) = self.col_index[v];
            let expo = self.a_values[i] * self.b_values[j] - self.row_off[u] - self.col_off[v];
            h_poly(r + 1, s, self.a_values[i], self.b_values[j]) * expo.exp()
        })
    }

    /// Scaled `∂E/∂b_c`.
    pub fn derivative_in_b(&self, c: usize) -> DMatrix<f64> {
        let n = self.residual.nrows();
        DMatrix::from_fn(n, n, |u, v| {
            let (j, s) = self.col_index[v];
            if j != c {
                return 0.0;
            }
            let (i, r) = self.row_index[u];
            let expo = self.a_values[i] * self.b_values[j] - self.row_off[u] - self.col_off[v];
            h_poly(r, s + 1, self.a_values[i], self.b_values[j]) * expo.exp()
        })
    }
}

/// HCIZ integral for clustered spectra (Pochhammer-free confluent form):
/// `(prod_{k<n} k!) det(E_conf) / (Delta_conf(a) Delta_conf(b))` with the
/// block entries `e^{a_i b_j} H_{r,s}(a_i, b_j)`.
pub fn hciz_confluent_log(a: &BoundaryData, b: &BoundaryData) -> Result<SignedLogValue> {
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    let row_index = confluent_indices(a);
    let col_index = confluent_indices(b);
    let av = a.values();
    let bv = b.values();
    let det = SignedLogMatrix::from_fn(n, n, |u, v| {
        let (i, r) = row_index[u];
        let (j, s) = col_index[v];
        let h = h_poly(r, s, av[i], bv[j]);
        if h == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (h.signum(), h.abs().ln() + av[i] * bv[j])
        }
    })?
    .det()?;
    let da = log_confluent_vandermonde(a);
    let db = log_confluent_vandermonde(b);
    Ok(SignedLogValue::new(1, ln_superfactorial(n)) * det / (da * db))
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `Tr(A U B U†)` for diagonal A, B given as expanded eigenvalue lists.
fn coupling_exponent(a_exp: &[f64], b_exp: &[f64], u: &UnitaryMatrix) -> f64 {
    let m = u.matrix();
    let n = a_exp.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)].norm_sqr() * b_exp[j];
        }
        total += a_exp[i] * row;
    }
    total
}

fn mc_reduce(exponents: &[f64]) -> (f64, f64) {
    let n = exponents.len() as f64;
    let lse1 = log_sum_exp(exponents);
    let doubled: Vec<f64> = exponents.iter().map(|s| 2.0 * s).collect();
    let lse2 = log_sum_exp(&doubled);
    let mean = (lse1 - n.ln()).exp();
    // sample variance in log domain: (sum x^2 - n mean^2) / (n - 1)
    let d = 2.0 * lse1 - n.ln() - lse2;
    let stderr = if d >= 0.0 {
        0.0
    } else {
        (0.5 * (lse2 + (-d.exp()).ln_1p() - (n - 1.0).ln() - n.ln())).exp()
    };
    (mean, stderr)
}

fn hciz_mc_exponents<F>(
    a: &BoundaryData,
    b: &BoundaryData,
    num_samples: usize,
    rng: &RngState,
    mapper: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize, &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>,
{
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    if num_samples < 100 {
        return Err(Error::Statistics(format!(
            "need at least 100 Monte Carlo samples, got {num_samples}"
        )));
    }
    let a_exp = a.expanded();
    let b_exp = b.expanded();
    let sample = move |i: usize| -> f64 {
        let mut local = rng.substream(i as u64);
        let u = sample_haar_unitary(n, &mut local).expect("dimension already validated");
        coupling_exponent(&a_exp, &b_exp, &u)
    };
    Ok(mapper(num_samples, &sample))
}

/// Direct Monte Carlo oracle for the HCIZ integral: sample mean and standard
/// error of `exp(Tr(A U B U†))` over Haar draws, accumulated with
/// log-sum-exp so large couplings cannot overflow. Each sample uses its own
/// derived stream; results are identical with and without the `parallel`
/// feature.
pub fn hciz_mc_estimate(
    a: &BoundaryData,
    b: &BoundaryData,
    num_samples: usize,
    rng: &RngState,
) -> Result<(f64, f64)> {
    let exps = hciz_mc_exponents(a, b, num_samples, rng, |count, f| map_indexed(count, f))?;
    Ok(mc_reduce(&exps))
}

/// Sequential variant of [`hciz_mc_estimate`]; also the backend when the
/// `parallel` feature is off.
pub fn hciz_mc_estimate_seq(
    a: &BoundaryData,
    b: &BoundaryData,
    num_samples: usize,
    rng: &RngState,
) -> Result<(f64, f64)> {
    let exps = hciz_mc_exponents(a, b, num_samples, rng, |count, f| map_indexed_seq(count, f))?;
    Ok(mc_reduce(&exps))
}

/// Metropolis–Hastings chain on U(n) targeting the weight
/// `exp(Tr(A W B W†))`. Proposals are `W' = exp(i eps H) W` with `H` a
/// unit-scale GUE draw; the step `eps` is tuned during burn-in toward
/// acceptance in [0.2, 0.5] and then frozen.
pub struct WeightedUnitaryChain {
    state: DMatrix<C64>,
    log_weight: f64,
    a_exp: Vec<f64>,
    b_exp: Vec<f64>,
    epsilon: f64,
    thin: usize,
    rng: RngState,
    steps: usize,
    post_accepted: usize,
    post_proposed: usize,
}

const REUNITARIZE_EVERY: usize = 512;

impl WeightedUnitaryChain {
    fn weight_of(&self, w: &DMatrix<C64>) -> f64 {
        let n = self.a_exp.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += w[(i, j)].norm_sqr() * self.b_exp[j];
            }
            total += self.a_exp[i] * row;
        }
        total
    }

    /// One proposal; returns whether it was accepted.
    fn step(&mut self) -> bool {
        let n = self.a_exp.len();
        let h = sample_gue(n, 1.0, &mut self.rng).expect("dimension validated");
        let (vals, vecs) = h.eigen_sorted();
        let phase_diag = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::from_polar(1.0, self.epsilon * vals[i])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rotation = vecs.matrix() * phase_diag * vecs.matrix().adjoint();
        let proposal = rotation * &self.state;
        let proposal_weight = self.weight_of(&proposal);
        let u: f64 = self.rng.random();
        let accept = u.ln() < proposal_weight - self.log_weight;
        if accept {
            self.state = proposal;
            self.log_weight = proposal_weight;
        }
        self.steps += 1;
        if self.steps % REUNITARIZE_EVERY == 0 {
            let mut u = UnitaryMatrix::from_matrix_unchecked(self.state.clone());
            u.reunitarize();
            self.state = u.into_matrix();
            self.log_weight = self.weight_of(&self.state);
        }
        accept
    }

    /// Acceptance rate since the end of burn-in.
    pub fn acceptance_rate(&self) -> f64 {
        if self.post_proposed == 0 {
            f64::NAN
        } else {
            self.post_accepted as f64 / self.post_proposed as f64
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Iterator for WeightedUnitaryChain {
    type Item = UnitaryMatrix;

    fn next(&mut self) -> Option<UnitaryMatrix> {
        for _ in 0..self.thin {
            let accepted = self.step();
            self.post_proposed += 1;
            if accepted {
                self.post_accepted += 1;
            }
        }
        Some(UnitaryMatrix::from_matrix_unchecked(self.state.clone()))
    }
}

/// Starts the weighted-unitary chain: Haar initialization, tuned burn-in,
/// then an infinite stream of thinned states.
pub fn sample_weighted_unitary(
    a: &BoundaryData,
    b: &BoundaryData,
    chain: &ChainConfig,
    mut rng: RngState,
) -> Result<WeightedUnitaryChain> {
    chain.validate()?;
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    let init = sample_haar_unitary(n, &mut rng)?;
    let mut out = WeightedUnitaryChain {
        state: init.into_matrix(),
        log_weight: 0.0,
        a_exp: a.expanded(),
        b_exp: b.expanded(),
        epsilon: chain.proposal_scale,
        thin: chain.thin,
        rng,
        steps: 0,
        post_accepted: 0,
        post_proposed: 0,
    };
    out.log_weight = out.weight_of(&out.state);
    let mut tuner = StepTuner::new(out.epsilon, 0.2, 0.5);
    for _ in 0..chain.burn_in {
        let accepted = out.step();
        tuner.record(accepted);
        out.epsilon = tuner.scale;
    }
    Ok(out)
}
