//! Mixed-type multiple orthogonal polynomials for the bridge weights.
//!
//! The linear form `Q(x) = sum_l A_l(x) w_l^(A)(x)` with
//! `w_l^(A) = e^{a_l x / t} omega(x)`, `omega = e^{-x^2/(2 sigma^2)}`, and
//! `deg A_l <= m_l - 1`, is fixed by the orthogonality conditions
//! `∫ x^r Q(x) w_k^(B)(x) dx = 0` for `r < n_k`, with the top condition of
//! the last end-cluster dropped and the leading coefficient of `A_p`
//! normalized to one: that leaves a square inhomogeneous system for the
//! remaining coefficients. The reported residual re-evaluates every imposed
//! condition by Gauss–Hermite quadrature, independently of the moment
//! recurrence that built the system.

use nalgebra::{DMatrix, DVector};

use crate::boundary::BoundaryData;
use crate::error::{Error, Result};
use crate::km::{tilted_gaussian_moment, TimeParameter};
use crate::quadrature::{GaussHermite, DEFAULT_NODES};
use crate::report::VerificationReport;
use crate::tol;

#[derive(Debug, Clone)]
pub struct MopSolution {
    /// Maximum normalized orthogonality residual over the imposed
    /// conditions, gated at [`tol::MOP_RESIDUAL`].
    pub report: VerificationReport,
    /// Coefficients of `A_l`, one vector per start cluster, ascending
    /// powers; the last cluster's leading coefficient is one.
    pub coefficients: Vec<Vec<f64>>,
    /// Condition estimate of the solved system.
    pub condition: f64,
}

pub fn mop_construct_and_verify(
    a: &BoundaryData,
    b: &BoundaryData,
    time: TimeParameter,
) -> Result<MopSolution> {
    let n = a.dimension();
    if n != b.dimension() {
        return Err(Error::Dimension(format!(
            "total multiplicities must agree, got {} and {}",
            n,
            b.dimension()
        )));
    }
    let t = time.t();
    let sigma2 = time.sigma2();
    let a_clusters = a.clusters();
    let b_clusters = b.clusters();
    let p = a_clusters.len();
    let q = b_clusters.len();

    // unknown coefficients (cluster l, power c), the pinned one last
    let mut unknowns: Vec<(usize, usize)> = Vec::with_capacity(n);
    for (l, cl) in a_clusters.iter().enumerate() {
        for c in 0..cl.multiplicity {
            unknowns.push((l, c));
        }
    }
    let pinned = (p - 1, a_clusters[p - 1].multiplicity - 1);
    unknowns.retain(|&u| u != pinned);

    // imposed conditions (cluster k, power r), dropping the top condition
    // of the last end-cluster
    let mut conditions: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    for (k, cl) in b_clusters.iter().enumerate() {
        let top = if k == q - 1 {
            cl.multiplicity.saturating_sub(1)
        } else {
            cl.multiplicity
        };
        for r in 0..top {
            conditions.push((k, r));
        }
    }
    debug_assert_eq!(unknowns.len(), conditions.len());

    let gamma = |l: usize, k: usize| a_clusters[l].value / t + b_clusters[k].value / (1.0 - t);
    let moment = |l: usize, k: usize, power: usize| -> Result<f64> {
        tilted_gaussian_moment(power, gamma(l, k), sigma2)
    };

    let dim = unknowns.len();
    let mut coefficients: Vec<Vec<f64>> = a_clusters
        .iter()
        .map(|cl| vec![0.0; cl.multiplicity])
        .collect();
    coefficients[pinned.0][pinned.1] = 1.0;

    let mut condition_estimate = 1.0;
    if dim > 0 {
        let mut system = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (row, &(k, r)) in conditions.iter().enumerate() {
            for (col, &(l, c)) in unknowns.iter().enumerate() {
                system[(row, col)] = moment(l, k, r + c)?;
            }
            rhs[row] = -moment(pinned.0, k, r + pinned.1)?;
            // normalize the row for conditioning
            let scale = system
                .row(row)
                .iter()
                .fold(rhs[row].abs(), |m, v| m.max(v.abs()));
            if scale > 0.0 {
                for col in 0..dim {
                    system[(row, col)] /= scale;
                }
                rhs[row] /= scale;
            }
        }
        let svd = system.clone().svd(false, false);
        condition_estimate = svd.singular_values.max() / svd.singular_values.min();
        let lu = system.lu();
        let solution = lu.solve(&rhs).ok_or(Error::Degenerate {
            what: "mixed orthogonality system".into(),
            cond: condition_estimate,
        })?;
        for (col, &(l, c)) in unknowns.iter().enumerate() {
            coefficients[l][c] = solution[col];
        }
    }

    // quadrature re-check of every imposed condition
    let gh = GaussHermite::new(DEFAULT_NODES)?;
    let mut worst = 0.0f64;
    for &(k, r) in &conditions {
        let mut total = 0.0;
        let mut largest = 0.0f64;
        for (l, coeffs) in coefficients.iter().enumerate() {
            for (c, &coef) in coeffs.iter().enumerate() {
                if coef == 0.0 {
                    continue;
                }
                let term =
                    coef * gh.integrate_tilted(sigma2, gamma(l, k), r + c, |_| 1.0)?;
                total += term;
                largest = largest.max(term.abs());
            }
        }
        worst = worst.max(total.abs() / largest.max(1.0));
    }

    Ok(MopSolution {
        report: VerificationReport::gated("mop/orthogonality", worst, 0.0, tol::MOP_RESIDUAL),
        coefficients,
        condition: condition_estimate,
    })
}
