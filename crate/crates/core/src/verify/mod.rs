//! End-to-end certificates: each checkable claim about the extremal fields is
//! evaluated numerically and recorded as a pass/fail report with its inputs.

mod checks;
mod classify;
mod integrals;
mod points;
mod suites;

pub use checks::{
    divergence_reports, lift_reports, obstruction_reports, scalar_reports, symmetry_reports,
    twistor_reports, zero_mode_reports,
};
pub use classify::{classify_pair, Classification, ClassifyError, ClassifyOptions};
pub use integrals::{
    calibration_reports, chain_reports, chain_terms, extrapolate_sweep, identity_checks,
    identity_reports, identity_sweep_checks, identity_sweep_reports, potential_norm_sq,
    sharp_constant_reports, spinor_norm, ChainTerms,
    Extrapolated, IdentityChecks,
};
pub use points::sample_points;
pub use suites::{run_suite, suite_names, SuiteConfig, SuiteError};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Current report schema version.
pub const REPORT_SCHEMA: u32 = 1;

/// Outcome of a single quantitative claim.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl VerificationReport {
    /// Equality claim: pass iff |computed - target| <= tolerance * max(1, |target|).
    pub fn against(claim: impl Into<String>, computed: f64, target: f64, tolerance: f64) -> Self {
        let pass = (computed - target).abs() <= tolerance * target.abs().max(1.0)
            && computed.is_finite();
        Self {
            claim: claim.into(),
            computed,
            target,
            tolerance,
            pass,
            metadata: BTreeMap::new(),
        }
    }

    /// Upper-bound claim: pass iff computed <= bound.  Target records the bound.
    pub fn bounded(claim: impl Into<String>, computed: f64, bound: f64) -> Self {
        let pass = computed <= bound && computed.is_finite();
        let mut report = Self {
            claim: claim.into(),
            computed,
            target: bound,
            tolerance: bound,
            pass,
            metadata: BTreeMap::new(),
        };
        report
            .metadata
            .insert("kind".to_string(), "upper-bound".to_string());
        report
    }

    /// Lower-bound claim: pass iff computed >= bound (used for negative controls
    /// that must detect a broken input, and for one-sided inequality gaps).
    pub fn at_least(claim: impl Into<String>, computed: f64, bound: f64) -> Self {
        let pass = computed >= bound && computed.is_finite();
        let mut report = Self {
            claim: claim.into(),
            computed,
            target: bound,
            tolerance: bound.abs(),
            pass,
            metadata: BTreeMap::new(),
        };
        report
            .metadata
            .insert("kind".to_string(), "lower-bound".to_string());
        report
    }

    /// Attach a metadata entry, consuming and returning the report.
    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }
}

/// Ordered collection of reports plus the schema version stamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSet {
    pub schema: u32,
    pub reports: Vec<VerificationReport>,
}

impl ReportSet {
    pub fn new() -> Self {
        Self {
            schema: REPORT_SCHEMA,
            reports: Vec::new(),
        }
    }

    pub fn push(&mut self, report: VerificationReport) {
        self.reports.push(report);
    }

    pub fn extend(&mut self, reports: Vec<VerificationReport>) {
        self.reports.extend(reports);
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failed(&self) -> Vec<&VerificationReport> {
        self.reports.iter().filter(|r| !r.pass).collect()
    }

    /// Deterministic pretty JSON; fixed field order, sorted metadata keys.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl Default for ReportSet {
    fn default() -> Self {
        Self::new()
    }
}
