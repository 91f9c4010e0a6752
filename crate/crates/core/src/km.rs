//! The fixed-time law of non-intersecting Brownian bridges: density
//! evaluation (confluent-capable), the exact Andréief normalization, exact
//! linear spectral statistics through the biorthogonal kernel trace, and a
//! random-walk Metropolis sampler.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::boundary::BoundaryData;
use crate::chain::{ChainConfig, StepTuner};
use crate::error::{Error, Result};
use crate::linalg::{ln_factorial, signed_log_det_log_entries, SignedLogMatrix};
use crate::rng::RngState;
use crate::signed_log::SignedLogValue;

/// Observation time t in (0,1); the effective variance sigma^2 = t(1-t) is
/// always recomputed, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeParameter {
    t: f64,
}

impl TimeParameter {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!(
                "observation time must lie in (0,1), got {t}"
            )));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sigma2(&self) -> f64 {
        self.t * (1.0 - self.t)
    }

    /// The reversed bridge time 1 - t.
    pub fn reversed(&self) -> Self {
        Self { t: 1.0 - self.t }
    }
}

/// One draw of eigenvalues, stored ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    lambda: Vec<f64>,
}

impl SpectrumSample {
    pub fn new(mut lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        lambda.sort_by(f64::total_cmp);
        Ok(Self { lambda })
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn power_sum(&self, k: u32) -> f64 {
        self.lambda.iter().map(|x| x.powi(k as i32)).sum()
    }

    pub fn max(&self) -> f64 {
        *self.lambda.last().unwrap()
    }
}

/// Single-particle heat kernel `(2 pi s)^{-1/2} exp(-(x-y)^2/(2s))`.
pub fn heat_kernel(s: f64, x: f64, y: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "heat kernel time must be positive, got {s}"
        )));
    }
    Ok((2.0 * std::f64::consts::PI * s).sqrt().recip() * (-(x - y).powi(2) / (2.0 * s)).exp())
}

/// Signed-log determinant of one boundary row family evaluated at the
/// configuration `lambda`: for a cluster `(a_i, m_i)` the rows are
/// `(lambda_j / t)^r e^{a_i lambda_j / t}`, r < m_i (the confluent limit of
/// repeated heat-kernel rows).
fn family_det(data: &BoundaryData, scale_inv: f64, lambda: &[f64]) -> Result<SignedLogValue> {
    let n = lambda.len();
    let xs: Vec<f64> = lambda.iter().map(|l| l * scale_inv).collect();
    let mut rows: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in data.clusters() {
        for r in 0..c.multiplicity {
            rows.push((c.value, r));
        }
    }
    SignedLogMatrix::from_fn(n, n, |u, j| {
        let (a, r) = rows[u];
        let x = xs[j];
        if r == 0 {
            (1.0, a * x)
        } else if x == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            let sign = if x > 0.0 || r % 2 == 0 { 1.0 } else { -1.0 };
            (sign, r as f64 * x.abs().ln() + a * x)
        }
    })?
    .det()
}

/// Unnormalized log density of the bridge positions:
/// `log( det[A-rows] det[B-rows] e^{-sum lambda^2 / (2 sigma^2)} )`.
/// Returns `-inf` where the determinant product vanishes (coincident
/// lambda). The product is nonnegative by total positivity; a negative
/// computed sign can only arise from rounding next to the coincidence set
/// and is treated as zero density.
pub fn km_log_density(
    lambda: &[f64],
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
) -> Result<f64> {
    let n = lambda.len();
    if n != a.dimension() || n != b.dimension() {
        return Err(Error::Dimension(format!(
            "configuration size {} must match boundary multiplicities {} and {}",
            n,
            a.dimension(),
            b.dimension()
        )));
    }
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let t = time.t();
    let det_a = family_det(a, 1.0 / t, lambda)?;
    let det_b = family_det(b, 1.0 / (1.0 - t), lambda)?;
    if det_a.sign() * det_b.sign() <= 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let gauss: f64 = lambda.iter().map(|l| l * l).sum::<f64>() / (2.0 * time.sigma2());
    Ok(det_a.log_magnitude() + det_b.log_magnitude() - gauss)
}

/// Dense bivariate polynomial in (a, b); the prefactor representation for
/// derivatives of `exp(alpha a^2 + beta b^2 + a b)`.
#[derive(Debug, Clone)]
struct BivariatePoly {
    // coeff[i][j] multiplies a^i b^j
    coeff: Vec<Vec<f64>>,
}

impl BivariatePoly {
    fn one() -> Self {
        Self {
            coeff: vec![vec![1.0]],
        }
    }

    fn zeros(da: usize, db: usize) -> Self {
        Self {
            coeff: vec![vec![0.0; db + 1]; da + 1],
        }
    }

    fn deg_a(&self) -> usize {
        self.coeff.len() - 1
    }

    fn deg_b(&self) -> usize {
        self.coeff[0].len() - 1
    }

    /// `(2 alpha a + b) P + dP/da`
    fn raise_a(&self, alpha: f64) -> Self {
        let (da, db) = (self.deg_a(), self.deg_b());
        let mut out = Self::zeros(da + 1, db + 1);
        for i in 0..=da {
            for j in 0..=db {
                let c = self.coeff[i][j];
                if c == 0.0 {
                    continue;
                }
                out.coeff[i + 1][j] += 2.0 * alpha * c;
                out.coeff[i][j + 1] += c;
                if i > 0 {
                    out.coeff[i - 1][j] += i as f64 * c;
                }
            }
        }
        out
    }

    /// `(2 beta b + a) P + dP/db`
    fn raise_b(&self, beta: f64) -> Self {
        let (da, db) = (self.deg_a(), self.deg_b());
        let mut out = Self::zeros(da + 1, db + 1);
        for i in 0..=da {
            for j in 0..=db {
                let c = self.coeff[i][j];
                if c == 0.0 {
                    continue;
                }
                out.coeff[i][j + 1] += 2.0 * beta * c;
                out.coeff[i + 1][j] += c;
                if j > 0 {
                    out.coeff[i][j - 1] += j as f64 * c;
                }
            }
        }
        out
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for i in (0..self.coeff.len()).rev() {
            let mut row = 0.0;
            for j in (0..self.coeff[i].len()).rev() {
                row = row * b + self.coeff[i][j];
            }
            total = total * a + row;
        }
        total
    }
}

/// Tableau of prefactor polynomials `P_{r,s}` with
/// `∂_a^r ∂_b^s e^{alpha a^2 + beta b^2 + a b} = P_{r,s} e^{...}`,
/// for r <= rmax, s <= smax.
fn prefactor_tableau(rmax: usize, smax: usize, alpha: f64, beta: f64) -> Vec<Vec<BivariatePoly>> {
    let mut table: Vec<Vec<BivariatePoly>> = Vec::with_capacity(rmax + 1);
    for r in 0..=rmax {
        let first = if r == 0 {
            BivariatePoly::one()
        } else {
            table[r - 1][0].raise_a(alpha)
        };
        let mut row = Vec::with_capacity(smax + 1);
        row.push(first);
        for s in 0..smax {
            let next = row[s].raise_b(beta);
            row.push(next);
        }
        table.push(row);
    }
    table
}

/// Exact normalization of the bridge density by Andréief reduction:
/// `I(A,B;t) = n! det[ ∂_a^r ∂_b^s h(a_i, b_j) ]` with
/// `h(a,b) = sqrt(2 pi sigma^2) exp(alpha a^2 + beta b^2 + a b)`,
/// `alpha = (1-t)/(2t)`, `beta = t/(2(1-t))`. For simple spectra this is the
/// closed form `n! (2 pi sigma^2)^{n/2} e^{alpha Tr A^2 + beta Tr B^2}
/// det[e^{a_i b_j}]`; repeated locations are handled by the exact
/// derivative recurrence on the quadratic-exponential entry.
pub fn km_normalization_log(
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
) -> Result<SignedLogValue> {
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    let t = time.t();
    let alpha = (1.0 - t) / (2.0 * t);
    let beta = t / (2.0 * (1.0 - t));
    let half_log_norm = 0.5 * (2.0 * std::f64::consts::PI * time.sigma2()).ln();

    let rmax = a.clusters().iter().map(|c| c.multiplicity).max().unwrap() - 1;
    let smax = b.clusters().iter().map(|c| c.multiplicity).max().unwrap() - 1;
    let table = prefactor_tableau(rmax, smax, alpha, beta);

    let mut rows: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in a.clusters() {
        for r in 0..c.multiplicity {
            rows.push((c.value, r));
        }
    }
    let mut cols: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in b.clusters() {
        for s in 0..c.multiplicity {
            cols.push((c.value, s));
        }
    }

    let det = SignedLogMatrix::from_fn(n, n, |u, v| {
        let (av, r) = rows[u];
        let (bv, s) = cols[v];
        let p = table[r][s].eval(av, bv);
        let offset = alpha * av * av + beta * bv * bv + av * bv + half_log_norm;
        if p == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (p.signum(), p.abs().ln() + offset)
        }
    })?
    .det()?;
    Ok(SignedLogValue::new(1, ln_factorial(n)) * det)
}

/// The distinct-point closed form of the normalization, taking raw location
/// vectors. Coincident values make `det[e^{a_i b_j}]` a matrix with repeated
/// rows, so the result degenerates to sign zero; route such data through
/// [`km_normalization_log`] with clustered boundary data instead.
pub fn km_normalization_log_points(
    a: &[f64],
    b: &[f64],
    time: TimeParameter,
) -> Result<SignedLogValue> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::Dimension(format!(
            "location vectors must have equal length, got {} and {}",
            n,
            b.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty location vectors".into()));
    }
    let t = time.t();
    let alpha = (1.0 - t) / (2.0 * t);
    let beta = t / (2.0 * (1.0 - t));
    let exponents = DMatrix::from_fn(n, n, |i, j| a[i] * b[j]);
    let det = signed_log_det_log_entries(&exponents)?;
    let prefactor = ln_factorial(n)
        + 0.5 * n as f64 * (2.0 * std::f64::consts::PI * time.sigma2()).ln()
        + alpha * a.iter().map(|x| x * x).sum::<f64>()
        + beta * b.iter().map(|x| x * x).sum::<f64>();
    Ok(SignedLogValue::new(1, prefactor) * det)
}

/// Tensor Gauss–Hermite evaluation of the defining normalization integral
/// `∫ det[A-rows] det[B-rows] e^{-sum lambda^2/(2 sigma^2)} d lambda` for a
/// two-path system with simple spectra. The envelope Gaussians are centered
/// at the mean tilt; the determinants are evaluated numerically at the
/// nodes, independent of the derivative recurrence behind
/// [`km_normalization_log`].
pub fn km_normalization_quadrature(
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
    nodes: usize,
) -> Result<f64> {
    if a.dimension() != 2 || b.dimension() != 2 || !a.is_simple() || !b.is_simple() {
        return Err(Error::InvalidInput(
            "tensor quadrature oracle covers two simple paths only".into(),
        ));
    }
    let gh = crate::quadrature::GaussHermite::new(nodes)?;
    let t = time.t();
    let sigma2 = time.sigma2();
    let pts_a = a.values();
    let pts_b = b.values();
    let gammas: Vec<f64> = pts_a
        .iter()
        .flat_map(|ai| pts_b.iter().map(move |bj| ai / t + bj / (1.0 - t)))
        .collect();
    let shift = sigma2 * gammas.iter().sum::<f64>() / gammas.len() as f64;
    let det2 = |pts: &[f64], scale: f64, l1: f64, l2: f64| {
        (pts[0] * l1 / scale).exp() * (pts[1] * l2 / scale).exp()
            - (pts[1] * l1 / scale).exp() * (pts[0] * l2 / scale).exp()
    };
    // integrand with the two envelope Gaussians divided out
    let g = |l1: f64, l2: f64| {
        det2(&pts_a, t, l1, l2)
            * det2(&pts_b, 1.0 - t, l1, l2)
            * ((2.0 * shift * shift - 2.0 * shift * (l1 + l2)) / (2.0 * sigma2)).exp()
    };
    gh.integrate_gaussian(sigma2, shift, |l1| {
        gh.integrate_gaussian(sigma2, shift, |l2| g(l1, l2))
            .expect("validated width")
    })
}

/// Moments of the centered tilted Gaussian:
/// `mu_0 = 1, mu_1 = sigma^2 gamma, mu_k = sigma^2 gamma mu_{k-1} +
/// (k-1) sigma^2 mu_{k-2}`, so that
/// `∫ x^k e^{gamma x - x^2/(2 sigma^2)} dx = sqrt(2 pi sigma^2)
/// e^{sigma^2 gamma^2/2} mu_k`.
pub(crate) fn tilted_moment_mu(k: usize, gamma: f64, sigma2: f64) -> f64 {
    let mean = sigma2 * gamma;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = mean;
    for j in 2..=k {
        let next = mean * cur + (j - 1) as f64 * sigma2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `∫ x^k e^{gamma x - x^2/(2 sigma2)} dx` in closed form.
pub fn tilted_gaussian_moment(k: usize, gamma: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!(
            "Gaussian width must be positive, got {sigma2}"
        )));
    }
    let base = (2.0 * std::f64::consts::PI * sigma2).sqrt() * (sigma2 * gamma * gamma / 2.0).exp();
    Ok(base * tilted_moment_mu(k, gamma, sigma2))
}

const MAX_LINEAR_STATISTIC_POWER: usize = 8;

/// Exact `E[sum_j lambda_j^k]` under the bridge law as the kernel trace
/// `Tr(G^{-1} H)`: `G_uv = ∫ f_u g_v`, `H_uv = ∫ f_u x^k g_v`, with `f` the
/// A-row family and `g` the B-row family of [`km_log_density`]. All entries
/// come from the tilted-moment recurrence; the exponential row and column
/// scales cancel inside the trace and are dropped.
pub fn exact_linear_statistic(
    k: usize,
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
) -> Result<f64> {
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    if k > MAX_LINEAR_STATISTIC_POWER {
        return Err(Error::InvalidInput(format!(
            "linear statistics are supported for powers up to {MAX_LINEAR_STATISTIC_POWER}, got {k}"
        )));
    }
    if k == 0 {
        return Ok(n as f64);
    }
    let t = time.t();
    let sigma2 = time.sigma2();
    let mut rows: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in a.clusters() {
        for r in 0..c.multiplicity {
            rows.push((c.value, r));
        }
    }
    let mut cols: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in b.clusters() {
        for s in 0..c.multiplicity {
            cols.push((c.value, s));
        }
    }

    // (sign, logmag) of the scale-free residual entries e^{a b} mu_p(gamma)
    let entry = |u: usize, v: usize, extra: usize| -> (f64, f64) {
        let (av, r) = rows[u];
        let (bv, s) = cols[v];
        let gamma = av / t + bv / (1.0 - t);
        let mu = tilted_moment_mu(r + s + extra, gamma, sigma2);
        if mu == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (mu.signum(), mu.abs().ln() + av * bv)
        }
    };

    let mut g_log = DMatrix::from_element(n, n, f64::NEG_INFINITY);
    let mut g_sign = DMatrix::zeros(n, n);
    let mut h_log = DMatrix::from_element(n, n, f64::NEG_INFINITY);
    let mut h_sign = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in 0..n {
            let (s, l) = entry(u, v, 0);
            g_sign[(u, v)] = s;
            g_log[(u, v)] = l;
            let (s, l) = entry(u, v, k);
            h_sign[(u, v)] = s;
            h_log[(u, v)] = l;
        }
    }

    // shared row/column offsets from G, applied to both matrices
    let mut row_off = vec![f64::NEG_INFINITY; n];
    for u in 0..n {
        for v in 0..n {
            row_off[u] = row_off[u].max(g_log[(u, v)]);
        }
        if !row_off[u].is_finite() {
            return Err(Error::Degenerate {
                what: "kernel Gram matrix (vanishing row)".into(),
                cond: f64::INFINITY,
            });
        }
    }
    let mut col_off = vec![f64::NEG_INFINITY; n];
    for v in 0..n {
        for u in 0..n {
            col_off[v] = col_off[v].max(g_log[(u, v)] - row_off[u]);
        }
    }
    let g = DMatrix::from_fn(n, n, |u, v| {
        g_sign[(u, v)] * (g_log[(u, v)] - row_off[u] - col_off[v]).exp()
    });
    let h = DMatrix::from_fn(n, n, |u, v| {
        h_sign[(u, v)] * (h_log[(u, v)] - row_off[u] - col_off[v]).exp()
    });

    let lu = g.clone().lu();
    match lu.solve(&h) {
        Some(x) => Ok((0..n).map(|i| x[(i, i)]).sum()),
        None => {
            let sv = g.svd(false, false).singular_values;
            let cond = sv.max() / sv.min();
            Err(Error::Degenerate {
                what: "kernel Gram matrix".into(),
                cond,
            })
        }
    }
}

/// Random-walk Metropolis chain on R^n targeting the unnormalized bridge
/// density. Full-vector Gaussian proposals; proposal scale tuned during
/// burn-in toward 25-45% acceptance, then frozen. Emits sorted spectra.
pub struct KmChain {
    state: Vec<f64>,
    log_density: f64,
    a: BoundaryData,
    b: BoundaryData,
    time: TimeParameter,
    step_sd: f64,
    thin: usize,
    rng: RngState,
    post_accepted: usize,
    post_proposed: usize,
}

impl KmChain {
    fn step(&mut self) -> bool {
        let sd = self.step_sd;
        let proposal: Vec<f64> = self
            .state
            .iter()
            .map(|x| {
                let z: f64 = self.rng.sample(StandardNormal);
                x + sd * z
            })
            .collect();
        let proposal_density = km_log_density(&proposal, &self.a, &self.b, self.time)
            .expect("dimensions fixed at construction");
        let u: f64 = self.rng.random();
        if u.ln() < proposal_density - self.log_density {
            self.state = proposal;
            self.log_density = proposal_density;
            true
        } else {
            false
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.post_proposed == 0 {
            f64::NAN
        } else {
            self.post_accepted as f64 / self.post_proposed as f64
        }
    }
}

impl Iterator for KmChain {
    type Item = SpectrumSample;

    fn next(&mut self) -> Option<SpectrumSample> {
        for _ in 0..self.thin {
            let accepted = self.step();
            self.post_proposed += 1;
            if accepted {
                self.post_accepted += 1;
            }
        }
        Some(SpectrumSample::new(self.state.clone()).expect("finite chain state"))
    }
}

/// Starts the eigenvalue chain. The initial point is a Gaussian cloud around
/// the midpoint configuration `(1-t) a + t b` (clusters expanded, paired in
/// ascending order); zero-density initializations are automatically redrawn.
pub fn sample_km_mcmc(
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
    chain: &ChainConfig,
    mut rng: RngState,
) -> Result<KmChain> {
    chain.validate()?;
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    let t = time.t();
    let sigma = time.sigma2().sqrt();
    let a_exp = a.expanded();
    let b_exp = b.expanded();
    let midpoint: Vec<f64> = a_exp
        .iter()
        .zip(&b_exp)
        .map(|(x, y)| (1.0 - t) * x + t * y)
        .collect();

    let mut state = Vec::new();
    let mut log_density = f64::NEG_INFINITY;
    for _ in 0..1000 {
        state = midpoint
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                m + 0.5 * sigma * z
            })
            .collect();
        log_density = km_log_density(&state, a, b, time)?;
        if log_density.is_finite() {
            break;
        }
    }
    if !log_density.is_finite() {
        return Err(Error::Statistics(
            "could not find a positive-density initial configuration".into(),
        ));
    }

    let mut out = KmChain {
        state,
        log_density,
        a: a.clone(),
        b: b.clone(),
        time,
        step_sd: chain.proposal_scale * sigma,
        thin: chain.thin,
        rng,
        post_accepted: 0,
        post_proposed: 0,
    };
    let mut tuner = StepTuner::new(out.step_sd, 0.25, 0.45);
    for _ in 0..chain.burn_in {
        let accepted = out.step();
        tuner.record(accepted);
        out.step_sd = tuner.scale;
    }
    Ok(out)
}
