//! Pass/fail records for identity checks.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Measured quantities with no asserted expectation; never fails.
    ReportOnly,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::ReportOnly => "report_only",
        }
    }
}

/// One identity check: measured value, expected value, the tolerance or
/// statistical uncertainty used for gating, and the resulting status.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check_name: String,
    pub measured: f64,
    pub expected: f64,
    pub uncertainty_or_tolerance: f64,
    pub status: CheckStatus,
}

impl VerificationReport {
    /// Pass iff `|measured - expected| <= uncertainty_or_tolerance`.
    pub fn gated(
        check_name: impl Into<String>,
        measured: f64,
        expected: f64,
        uncertainty_or_tolerance: f64,
    ) -> Self {
        let status = if (measured - expected).abs() <= uncertainty_or_tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            check_name: check_name.into(),
            measured,
            expected,
            uncertainty_or_tolerance,
            status,
        }
    }

    pub fn report_only(
        check_name: impl Into<String>,
        measured: f64,
        expected: f64,
        uncertainty_or_tolerance: f64,
    ) -> Self {
        Self {
            check_name: check_name.into(),
            measured,
            expected,
            uncertainty_or_tolerance,
            status: CheckStatus::ReportOnly,
        }
    }

    pub fn residual(&self) -> f64 {
        (self.measured - self.expected).abs()
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<11} {}  measured={:.10e} expected={:.10e} tol={:.3e}",
            self.status.as_str(),
            self.check_name,
            self.measured,
            self.expected,
            self.uncertainty_or_tolerance
        )
    }
}
