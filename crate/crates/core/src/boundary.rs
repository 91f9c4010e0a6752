//! Boundary data for the bridge ensemble: start/end locations with
//! multiplicities, i.e. the diagonal matrices A and B as clustered
//! eigenvalue lists.

use crate::error::{Error, Result};

/// Default coalescence tolerance, relative to the spectral diameter. Gaps
/// below roughly sqrt(machine epsilon) cost the determinant ratio about half
/// the working precision, so near-coincident points are merged well before
/// that.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Distinct locations with multiplicities, strictly increasing in value.
/// The total multiplicity is the ensemble size n.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    clusters: Vec<Cluster>,
}

impl BoundaryData {
    pub fn new(clusters: Vec<Cluster>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::InvalidInput("boundary data has no clusters".into()));
        }
        for c in &clusters {
            if !c.value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite cluster value {}",
                    c.value
                )));
            }
            if c.multiplicity == 0 {
                return Err(Error::InvalidInput("cluster multiplicity must be >= 1".into()));
            }
        }
        for w in clusters.windows(2) {
            if !(w[0].value < w[1].value) {
                return Err(Error::InvalidInput(format!(
                    "cluster values must be strictly increasing, got {} then {}",
                    w[0].value, w[1].value
                )));
            }
        }
        Ok(Self { clusters })
    }

    /// Builds from raw `(value, multiplicity)` pairs.
    pub fn from_pairs(pairs: &[(f64, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(value, multiplicity)| Cluster {
                    value,
                    multiplicity,
                })
                .collect(),
        )
    }

    /// All multiplicities one. The points are sorted; repeated values are
    /// rejected (cluster them instead).
    pub fn from_points(points: &[f64]) -> Result<Self> {
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ConfluentRequired);
        }
        Self::new(
            sorted
                .into_iter()
                .map(|value| Cluster {
                    value,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    /// The scalar matrix `value * I_n` as a single cluster.
    pub fn scalar(value: f64, n: usize) -> Self {
        Self {
            clusters: vec![Cluster {
                value,
                multiplicity: n,
            }],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::scalar(0.0, n)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Total multiplicity n.
    pub fn dimension(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.clusters.iter().all(|c| c.multiplicity == 1)
    }

    pub fn values(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    /// Eigenvalue list with repeats, ascending; length n.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension());
        for c in &self.clusters {
            out.extend(std::iter::repeat(c.value).take(c.multiplicity));
        }
        out
    }

    /// Power sum `Tr(A^m) = sum_i m_i a_i^m`.
    pub fn power_sum(&self, m: u32) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.multiplicity as f64 * c.value.powi(m as i32))
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.power_sum(1)
    }

    pub fn trace_sq(&self) -> f64 {
        self.power_sum(2)
    }

    pub fn spectral_diameter(&self) -> f64 {
        self.clusters.last().unwrap().value - self.clusters.first().unwrap().value
    }

    /// Shifts every location by `c` (A + cI).
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            clusters: self
                .clusters
                .iter()
                .map(|cl| Cluster {
                    value: cl.value + c,
                    multiplicity: cl.multiplicity,
                })
                .collect(),
        }
    }
}

/// Greedy left-to-right grouping of near-coincident values into clusters.
/// Values within `tol * max(1, diameter)` of the running cluster mean are
/// merged; the representative is the mean of the merged values.
pub fn cluster_points(values: &[f64], tol: f64) -> Result<BoundaryData> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no values to cluster".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "cluster tolerance must be nonnegative, got {tol}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in cluster input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let diameter = sorted.last().unwrap() - sorted.first().unwrap();
    let threshold = tol * diameter.max(1.0);

    let mut clusters: Vec<Cluster> = Vec::new();
    let mut sum = sorted[0];
    let mut count = 1usize;
    for &v in &sorted[1..] {
        let mean = sum / count as f64;
        if v - mean <= threshold {
            sum += v;
            count += 1;
        } else {
            clusters.push(Cluster {
                value: sum / count as f64,
                multiplicity: count,
            });
            sum = v;
            count = 1;
        }
    }
    clusters.push(Cluster {
        value: sum / count as f64,
        multiplicity: count,
    });
    BoundaryData::new(clusters)
}
