//! Gating tolerances for the identity checks, fixed in one place.
//!
//! Exact identities evaluated through LU/eigen factorizations get 1e-10 to
//! 1e-12 of headroom over f64 rounding; finite-difference residuals inherit
//! the truncation of their stencil and step; statistical checks gate at
//! three standard errors.

/// Time-reversal duality, absolute in the log domain. Both routes share the
/// evaluation path with arguments swapped, so only rounding remains.
pub const DUALITY_ABS: f64 = 1e-12;

/// Finite-difference time-flow residual with [`FLOW_STEP`]: truncation is
/// h^2/6 times the third time derivative, below 1e-6 at desk scale.
pub const FLOW_ABS: f64 = 1e-6;
pub const FLOW_STEP: f64 = 1e-4;

/// Agreement of the closed normalization with quadrature and with the
/// collapsed representation, relative.
pub const ANDREIEF_REL: f64 = 1e-10;

/// Translation Ward identities and the analytic-vs-finite-difference
/// gradient agreement, relative.
pub const WARD_L1_REL: f64 = 1e-6;

/// The exact dilation identity: both sides come from independent exact
/// routes (kernel trace vs Euler derivative), relative.
pub const WARD_DILATION_REL: f64 = 1e-8;

/// Closed second-moment formula against the kernel-trace oracle where the
/// formula is provably exact (scalar reductions and n = 1), relative.
pub const TRM2_SCALAR_REL: f64 = 1e-10;

/// Agreement required between the two independent exact second-moment
/// routes for generic data, relative.
pub const SECOND_ROUTES_REL: f64 = 1e-8;

/// First-moment identity through the kernel trace, relative.
pub const TRM_EXACT_REL: f64 = 1e-12;

/// Toda residual in the confluent slice with [`HIROTA_STEP`]: the mixed
/// 4-point stencil is exact on the bilinear part, leaving determinant
/// rounding amplified by 1/(4 h^2).
pub const HIROTA_ABS: f64 = 1e-6;
pub const HIROTA_STEP: f64 = 1e-3;

/// Mixed orthogonality residual of the constructed polynomials, verified by
/// quadrature, relative to the largest contributing term.
pub const MOP_RESIDUAL: f64 = 1e-10;

/// Merging-gap extrapolation of the distinct-point evaluator against the
/// confluent formula, relative.
pub const CONFLUENCE_REL: f64 = 1e-6;

/// Gate for sampled quantities, in standard errors.
pub const STAT_SIGMAS: f64 = 3.0;
