//! Evaluators, samplers, and identity checks for the two-HCIZ dressed
//! Gaussian ensemble of non-intersecting Brownian bridges.
//!
//! The crate covers, at finite matrix size: the unitary-group coupling
//! integral in log domain (distinct and clustered spectra) with a Monte
//! Carlo oracle, the fixed-time bridge law with its exact Andréief
//! normalization and kernel-trace statistics, samplers for the dressed
//! matrix model and its comparison ensembles, and residual checkers for the
//! collapse, flow/duality, Ward/Virasoro, Toda/Hirota, and mixed
//! orthogonality identities.
//!
//! Data-parallel inner loops (Monte Carlo averaging, batch diagonalization)
//! run on rayon under the default `parallel` feature and fall back to
//! sequential execution without it; results are bitwise identical either
//! way.

pub mod boundary;
pub mod chain;
pub mod diff;
pub mod ensemble;
pub mod error;
pub mod hciz;
pub mod identities;
pub mod km;
pub mod linalg;
pub mod matrices;
pub mod mop;
pub mod parallel;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod signed_log;
pub mod tol;

pub use boundary::{cluster_points, BoundaryData, Cluster, DEFAULT_CLUSTER_TOL};
pub use chain::ChainConfig;
pub use error::{Error, Result};
pub use km::{SpectrumSample, TimeParameter};
pub use matrices::{HermitianSample, UnitaryMatrix, C64};
pub use report::{CheckStatus, VerificationReport};
pub use rng::RngState;
pub use signed_log::SignedLogValue;
