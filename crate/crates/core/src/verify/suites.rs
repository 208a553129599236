//! Named suites bundling the individual certificates behind one entry point.
//!
//! Every suite resolves its own default dimensions, quadrature orders and
//! sample counts, all overridable through `SuiteConfig`; identical configs
//! produce bit-identical reports.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::calculus::{CalculusError, QuadratureScheme};
use crate::clifford::{CliffordError, GammaSet};
use crate::fields::{FieldError, SpinorField, SpinorTerm, ZeroModePair};
use crate::linalg::{random_rotation, random_unit_spinor};
use crate::{Complex64, RVector};

use super::checks::{
    divergence_reports, lift_reports, obstruction_reports, scalar_reports, symmetry_reports,
    twistor_reports, zero_mode_reports,
};
use super::classify::{classify_pair, ClassifyError, ClassifyOptions};
use super::integrals::{
    calibration_reports, chain_reports, identity_sweep_reports, sharp_constant_reports,
};
use super::{ReportSet, VerificationReport};

/// Run-time knobs shared by all suites. Empty vectors mean suite defaults.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub eps_sweep: Vec<f64>,
    pub radial_order: Option<usize>,
    pub angular_order: Option<usize>,
    pub points: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dims: Vec::new(),
            eps_sweep: Vec::new(),
            radial_order: None,
            angular_order: None,
            points: 200,
            seed: 2026,
        }
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}; available: {1}")]
    UnknownSuite(String, String),
    #[error("suite {suite:?} does not cover dimension {dim}; supported: {supported:?}")]
    UnsupportedDimension {
        suite: String,
        dim: usize,
        supported: Vec<usize>,
    },
    #[error("regularization sweep must be positive, got {0:?}")]
    BadSweep(Vec<f64>),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Names `run_suite` accepts, in the order `all` executes them.
pub fn suite_names() -> &'static [&'static str] {
    &[
        "constants",
        "zero-mode",
        "identity",
        "equality-chain",
        "twistor",
        "classify",
        "lift",
        "obstruction",
        "scalar",
        "symmetry",
        "divergence",
        "all",
    ]
}

/// Runs one named suite and collects its reports.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<ReportSet, SuiteError> {
    let mut set = ReportSet::new();
    collect(name, cfg, &mut set)?;
    Ok(set)
}

fn collect(name: &str, cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    match name {
        "constants" => constants_suite(cfg, set),
        "zero-mode" => zero_mode_suite(cfg, set),
        "identity" => identity_suite(cfg, set),
        "equality-chain" => chain_suite(cfg, set),
        "twistor" => twistor_suite(cfg, set),
        "classify" => classify_suite(cfg, set),
        "lift" => lift_suite(cfg, set),
        "obstruction" => obstruction_suite(cfg, set),
        "scalar" => scalar_suite(cfg, set),
        "symmetry" => symmetry_suite(cfg, set),
        "divergence" => divergence_suite(cfg, set),
        "all" => {
            // Per-suite default dimensions; explicit dims rarely make sense
            // across suites with disjoint parity requirements.
            let sub = SuiteConfig {
                dims: Vec::new(),
                ..cfg.clone()
            };
            for n in suite_names().iter().filter(|n| **n != "all") {
                collect(n, &sub, set)?;
            }
            Ok(())
        }
        other => Err(SuiteError::UnknownSuite(
            other.to_string(),
            suite_names().join(", "),
        )),
    }
}

fn resolve_dims(
    suite: &str,
    cfg: &SuiteConfig,
    supported: &[usize],
    default: &[usize],
) -> Result<Vec<usize>, SuiteError> {
    if cfg.dims.is_empty() {
        return Ok(default.to_vec());
    }
    for &d in &cfg.dims {
        if !supported.contains(&d) {
            return Err(SuiteError::UnsupportedDimension {
                suite: suite.to_string(),
                dim: d,
                supported: supported.to_vec(),
            });
        }
    }
    Ok(cfg.dims.clone())
}

fn scheme_for(
    cfg: &SuiteConfig,
    d: usize,
    radial: usize,
    angular: usize,
) -> Result<QuadratureScheme, SuiteError> {
    Ok(QuadratureScheme::with_orders(
        d,
        cfg.radial_order.unwrap_or(radial),
        cfg.angular_order.unwrap_or(angular),
    )?)
}

fn resolve_sweep(cfg: &SuiteConfig, default: &[f64]) -> Result<Vec<f64>, SuiteError> {
    let mut sweep = if cfg.eps_sweep.is_empty() {
        default.to_vec()
    } else {
        cfg.eps_sweep.clone()
    };
    if sweep.iter().any(|&e| !(e > 0.0)) {
        return Err(SuiteError::BadSweep(sweep));
    }
    sweep.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    sweep.dedup();
    Ok(sweep)
}

/// Angular orders small enough that the full tensor rule stays affordable;
/// the polar levels are the cost driver at order^(d-2).
fn full_rule_angular(d: usize) -> usize {
    match d {
        2 | 3 => 24,
        4 => 16,
        5 => 12,
        6 => 10,
        _ => 11,
    }
}

fn constants_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("constants", cfg, &[3, 4, 5, 6, 7], &[3, 5, 7])?;
    for d in dims {
        let radial = if d >= 7 { 48 } else { 80 };
        let scheme = scheme_for(cfg, d, radial, full_rule_angular(d))?;
        let tol = if d <= 5 { 1e-9 } else { 1e-6 };
        set.extend(calibration_reports(d, &scheme, tol));
        if d % 2 == 1 && d <= 5 {
            set.extend(sharp_constant_reports(d, &scheme));
        }
    }
    Ok(())
}

fn zero_mode_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("zero-mode", cfg, &[3, 5, 7], &[3, 5, 7])?;
    for d in dims {
        set.extend(zero_mode_reports(d, cfg.points, cfg.seed));
    }
    Ok(())
}

/// Three qualitatively different spinor fields: the extremal itself, a
/// generic single envelope, and a two-power superposition. All are centered
/// so the angular harmonics stay mild; translation coverage lives in the
/// symmetry and classification suites.
fn identity_fields(
    gammas: &Arc<GammaSet>,
    seed: u64,
) -> Result<Vec<(&'static str, SpinorField)>, SuiteError> {
    let d = gammas.dim();
    let df = d as f64;
    let n = gammas.spinor_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1DE7);

    let extremal = ZeroModePair::extremal(Arc::clone(gammas))?.spinor().clone();

    let envelope = SpinorField::new(
        Arc::clone(gammas),
        vec![SpinorTerm {
            power: df / 2.0 + 1.0,
            scale: 1.3,
            center: RVector::zeros(d),
            coeff: Complex64::new(1.0, 0.0),
            lo: random_unit_spinor(n, &mut rng),
            hi: random_unit_spinor(n, &mut rng),
        }],
    )?;

    let superposition = SpinorField::new(
        Arc::clone(gammas),
        vec![
            SpinorTerm {
                power: df / 2.0 + 1.0,
                scale: 1.0,
                center: RVector::zeros(d),
                coeff: Complex64::new(1.0, 0.0),
                lo: random_unit_spinor(n, &mut rng),
                hi: random_unit_spinor(n, &mut rng),
            },
            SpinorTerm {
                power: df / 2.0 + 2.0,
                scale: 0.7,
                center: RVector::zeros(d),
                coeff: Complex64::new(0.4, 0.7),
                lo: random_unit_spinor(n, &mut rng),
                hi: random_unit_spinor(n, &mut rng),
            },
        ],
    )?;

    Ok(vec![
        ("extremal", extremal),
        ("envelope", envelope),
        ("two-term", superposition),
    ])
}

fn identity_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("identity", cfg, &[3, 5], &[3, 5])?;
    let sweep = resolve_sweep(cfg, &[1e-1, 1e-2, 1e-3, 1e-4])?;
    for d in dims {
        let (radial, angular) = if d <= 3 { (120, 20) } else { (96, 20) };
        let scheme = scheme_for(cfg, d, radial, angular)?;
        let gammas = Arc::new(GammaSet::new(d)?);
        let center = vec![0.0; d];
        let fields = identity_fields(&gammas, cfg.seed)?;
        for (i, (label, field)) in fields.iter().enumerate() {
            let mut field_sweep = sweep.clone();
            if i == 0 {
                // Coarse-regularization regression point: nothing in the
                // identity needs eps to be small.
                field_sweep.push(10.0);
            }
            set.extend(identity_sweep_reports(
                label,
                field,
                &field_sweep,
                &scheme,
                &center,
                1e-6,
            ));
        }
    }
    Ok(())
}

fn chain_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("equality-chain", cfg, &[3, 5], &[3])?;
    // Half-decade grid: the chain terms decay in half-integer powers of eps,
    // so a constant-ratio grid keeps every correction component geometric for
    // the epsilon algorithm. Starting below 1e-1 keeps the sweep inside the
    // regime where all four terms decay monotonically; the high radial order
    // resolves the crossover radius |psi| ~ eps of the deepest point.
    let default_sweep: Vec<f64> = (0..12).map(|k| 10f64.powf(-1.5 - 0.5 * k as f64)).collect();
    let sweep = resolve_sweep(cfg, &default_sweep)?;
    for d in dims {
        let gammas = Arc::new(GammaSet::new(d)?);
        let pair = ZeroModePair::extremal(gammas)?;
        let radial = scheme_for(cfg, d, 2000, 4)?;
        let (full_radial, full_angular) = if d <= 3 { (2000, 12) } else { (400, 8) };
        let full = scheme_for(cfg, d, full_radial, full_angular)?;
        set.extend(chain_reports(&pair, &sweep, &radial, &full));
    }
    Ok(())
}

fn twistor_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("twistor", cfg, &[3, 4, 5], &[3, 5])?;
    for d in dims {
        set.extend(twistor_reports(d, cfg.seed));
    }
    Ok(())
}

fn classify_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("classify", cfg, &[3, 5], &[3, 5])?;
    for d in dims {
        let gammas = Arc::new(GammaSet::new(d)?);
        let base = ZeroModePair::extremal(Arc::clone(&gammas))?;
        let mut opts = ClassifyOptions::new(d)?;
        if cfg.radial_order.is_some() || cfg.angular_order.is_some() {
            opts.scheme = scheme_for(cfg, d, 60, if d <= 3 { 12 } else { 8 })?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((d as u64) << 8) ^ 0xC1F5);

        let mut worst_param: f64 = 0.0;
        let mut worst_rebuild: f64 = 0.0;
        let mut worst_vacuum: f64 = 0.0;
        let mut worst_ratio: f64 = 0.0;
        let mut twisted_found = 0usize;
        let mut twisted_expected = 0usize;
        let mut first_error: Option<String> = None;

        for i in 0..20 {
            let o = random_rotation(d, &mut rng);
            let shift = RVector::from_fn(d, |_, _| rng.gen_range(-1.5..1.5));
            let scale = rng.gen_range(0.5..2.0);
            let amp = Complex64::from_polar(
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let moved = base.transformed(&o, &shift, scale, amp)?;
            // Every fifth draw goes through conformal inversion, landing in
            // the orientation-twisted orbit.
            let (input, expect_twisted) = if i % 5 == 4 {
                twisted_expected += 1;
                (moved.inverted()?, true)
            } else {
                (moved, false)
            };
            let profile = input.radial_profile().expect("family member");
            match classify_pair(&input, &opts) {
                Ok(c) => {
                    let mut param = (c.scale - profile.scale).abs();
                    param = param.max((c.amplitude - profile.amp_sq.sqrt()).abs());
                    param = param.max((&c.center - &profile.center).amax());
                    worst_param = worst_param.max(param);
                    worst_rebuild = worst_rebuild.max(c.rebuild_residual);
                    worst_vacuum = worst_vacuum.max(c.vacuum_residual);
                    let target = d as f64 / (d as f64 - 2.0);
                    worst_ratio = worst_ratio.max((c.norm_ratio - target).abs() / target);
                    if c.twisted == expect_twisted {
                        twisted_found += usize::from(expect_twisted);
                    } else if first_error.is_none() {
                        first_error = Some(format!("draw {i}: wrong orientation branch"));
                    }
                }
                Err(e) => {
                    worst_param = f64::INFINITY;
                    worst_rebuild = f64::INFINITY;
                    worst_vacuum = f64::INFINITY;
                    if first_error.is_none() {
                        first_error = Some(format!("draw {i}: {e}"));
                    }
                }
            }
        }

        let mut params = VerificationReport::bounded(
            format!("classify-parameters-d{d}"),
            worst_param,
            1e-9,
        )
        .with_meta("draws", "20");
        if let Some(e) = &first_error {
            params = params.with_meta("error", e.clone());
        }
        set.push(params);
        set.push(VerificationReport::bounded(
            format!("classify-rebuild-d{d}"),
            worst_rebuild,
            1e-9,
        ));
        set.push(VerificationReport::bounded(
            format!("classify-vacuum-d{d}"),
            worst_vacuum,
            1e-11,
        ));
        set.push(VerificationReport::bounded(
            format!("classify-norm-precondition-d{d}"),
            worst_ratio,
            1e-6,
        ));
        set.push(VerificationReport::against(
            format!("classify-twisted-branch-d{d}"),
            twisted_found as f64,
            twisted_expected as f64,
            0.0,
        ));

        // A detuned potential must be refused, not classified.
        let mut bad_a = base.potential().clone();
        bad_a.kappa *= 1.0 + 1e-4;
        let bad = ZeroModePair::from_parts(base.spinor().clone(), bad_a, None)?;
        let refused = matches!(classify_pair(&bad, &opts), Err(ClassifyError::NotEquality { .. }));
        set.push(VerificationReport::against(
            format!("classify-refuses-perturbation-d{d}"),
            f64::from(u8::from(refused)),
            1.0,
            0.0,
        ));
    }
    Ok(())
}

fn lift_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("lift", cfg, &[3, 4, 5, 6, 7], &[3, 4, 5])?;
    set.extend(lift_reports(&dims, 50, cfg.seed));
    Ok(())
}

fn obstruction_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("obstruction", cfg, &[4, 6], &[4, 6])?;
    for d in dims {
        set.extend(obstruction_reports(d, 50, cfg.seed));
    }
    Ok(())
}

fn scalar_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("scalar", cfg, &[3, 4, 5, 6, 7], &[3, 4, 5])?;
    for d in dims {
        let scheme = scheme_for(cfg, d, 80, 4)?;
        set.extend(scalar_reports(d, cfg.seed, &scheme));
    }
    Ok(())
}

fn symmetry_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("symmetry", cfg, &[3, 5], &[3, 5])?;
    for d in dims {
        let angular = if d <= 3 { 16 } else { 10 };
        let scheme = scheme_for(cfg, d, 80, angular)?;
        set.extend(symmetry_reports(d, cfg.seed, &scheme));
    }
    Ok(())
}

fn divergence_suite(cfg: &SuiteConfig, set: &mut ReportSet) -> Result<(), SuiteError> {
    let dims = resolve_dims("divergence", cfg, &[3, 5, 7], &[3, 5])?;
    for d in dims {
        set.extend(divergence_reports(d, cfg.points, cfg.seed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let err = run_suite("nope", &SuiteConfig::default()).unwrap_err();
        assert!(matches!(err, SuiteError::UnknownSuite(..)));
    }

    #[test]
    fn unsupported_dimension_is_rejected() {
        let cfg = SuiteConfig {
            dims: vec![4],
            ..SuiteConfig::default()
        };
        let err = run_suite("zero-mode", &cfg).unwrap_err();
        assert!(matches!(err, SuiteError::UnsupportedDimension { dim: 4, .. }));
    }

    #[test]
    fn suite_reports_are_deterministic() {
        let cfg = SuiteConfig {
            dims: vec![3],
            points: 40,
            ..SuiteConfig::default()
        };
        let a = run_suite("divergence", &cfg).unwrap().to_json();
        let b = run_suite("divergence", &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn constants_suite_passes_in_low_dimensions() {
        let cfg = SuiteConfig {
            dims: vec![3],
            ..SuiteConfig::default()
        };
        let set = run_suite("constants", &cfg).unwrap();
        assert!(set.all_pass(), "failed: {:?}", set.failed());
    }

    #[test]
    fn degraded_orders_fail_honestly() {
        let cfg = SuiteConfig {
            dims: vec![3],
            radial_order: Some(4),
            angular_order: Some(4),
            ..SuiteConfig::default()
        };
        let set = run_suite("constants", &cfg).unwrap();
        assert!(!set.all_pass(), "a 4-node rule cannot certify 1e-9");
    }
}
