//! Acceptance checks: every advertised guarantee is driven end to end through
//! the public suite runner at its pinned tolerance and prints one line.

use std::time::Instant;

use diraclab::verify::{run_suite, ReportSet, SuiteConfig, VerificationReport};

fn with_dims(dims: &[usize]) -> SuiteConfig {
    SuiteConfig {
        dims: dims.to_vec(),
        ..SuiteConfig::default()
    }
}

fn report<'a>(set: &'a ReportSet, claim: &str) -> &'a VerificationReport {
    set.reports
        .iter()
        .find(|r| r.claim == claim)
        .unwrap_or_else(|| panic!("missing report {claim}"))
}

/// The named claim must exist, pass, and use a tolerance at least as tight
/// as the advertised one. Bounds store the bound in the tolerance field.
fn pinned(set: &ReportSet, claim: &str, tol: f64) {
    let r = report(set, claim);
    assert!(
        r.tolerance <= tol,
        "{claim}: tolerance {:e} looser than pinned {tol:e}",
        r.tolerance
    );
    assert!(r.pass, "{claim}: computed {:e} target {:e}", r.computed, r.target);
}

fn finish(label: &str, set: &ReportSet, started: Instant) {
    let secs = started.elapsed().as_secs_f64();
    if set.all_pass() {
        println!("acceptance {label}: PASS ({} reports, {secs:.1}s)", set.reports.len());
    } else {
        println!("acceptance {label}: FAIL ({secs:.1}s)");
        for r in set.failed() {
            println!(
                "  {} computed {:e} target {:e} tol {:e} {:?}",
                r.claim, r.computed, r.target, r.tolerance, r.metadata
            );
        }
        panic!("{label}: {} reports failed", set.failed().len());
    }
}

#[test]
fn sharp_ratio_matches_dimension_quotient_within_budget() {
    let started = Instant::now();
    let mut all = ReportSet::new();
    for d in [3usize, 5] {
        let lap = Instant::now();
        let set = run_suite("constants", &with_dims(&[d])).unwrap();
        let secs = lap.elapsed().as_secs_f64();
        assert!(secs <= 10.0, "d={d} took {secs:.1}s, budget is 10s");
        for path in ["radial", "full"] {
            pinned(&set, &format!("sharp-ratio-{path}-d{d}"), 1e-8);
        }
        all.reports.extend(set.reports);
    }
    finish("sharp-ratio", &all, started);
}

#[test]
fn calibration_integral_matches_on_both_quadrature_paths() {
    let started = Instant::now();
    let set = run_suite("constants", &with_dims(&[3, 5, 7])).unwrap();
    for d in [3usize, 5, 7] {
        let tol = if d <= 5 { 1e-9 } else { 1e-6 };
        pinned(&set, &format!("calibration-radial-d{d}"), tol);
        pinned(&set, &format!("calibration-full-d{d}"), tol);
    }
    finish("calibration", &set, started);
}

#[test]
fn zero_mode_residual_vanishes_and_differences_converge() {
    let started = Instant::now();
    let cfg = SuiteConfig::default();
    assert_eq!(cfg.points, 200);
    let set = run_suite("zero-mode", &cfg).unwrap();
    for d in [3usize, 5, 7] {
        pinned(&set, &format!("zero-mode-residual-d{d}"), 1e-11);
        let order = report(&set, &format!("zero-mode-fd-order-d{d}"));
        assert!((order.computed - 2.0).abs() <= 0.1, "fd order {}", order.computed);
        assert!(order.pass);
    }
    finish("zero-mode", &set, started);
}

#[test]
fn integral_identity_holds_for_three_fields_within_budget() {
    let started = Instant::now();
    let set = run_suite("identity", &SuiteConfig::default()).unwrap();
    let secs = started.elapsed().as_secs_f64();
    for d in [3usize, 5] {
        for field in ["extremal", "envelope", "two-term"] {
            for eps in ["1e-1", "1e-2", "1e-3", "1e-4"] {
                pinned(&set, &format!("identity-main-{field}-d{d}-eps{eps}"), 1e-6);
                pinned(&set, &format!("identity-gradient-{field}-d{d}-eps{eps}"), 1e-6);
            }
        }
    }
    assert!(secs <= 120.0, "identity suite took {secs:.1}s, budget is 2min");
    finish("identity", &set, started);
}

#[test]
fn chain_defects_vanish_and_limits_match_closed_forms() {
    let started = Instant::now();
    let set = run_suite("equality-chain", &with_dims(&[3, 5])).unwrap();
    for d in [3usize, 5] {
        for term in ["p", "r", "r1", "r2"] {
            pinned(&set, &format!("chain-limit-{term}-d{d}"), 1e-5);
        }
        pinned(&set, &format!("chain-limit-s-d{d}"), 1e-5);
        pinned(&set, &format!("chain-limit-s-scaled-d{d}"), 1e-4);
    }
    finish("equality-chain", &set, started);
}

#[test]
fn twistor_form_characterizes_and_round_trips() {
    let started = Instant::now();
    let set = run_suite("twistor", &with_dims(&[3, 5])).unwrap();
    for d in [3usize, 5] {
        pinned(&set, &format!("twistor-affine-residual-d{d}"), 1e-13);
        pinned(&set, &format!("twistor-round-trip-d{d}"), 1e-12);
        pinned(&set, &format!("twistor-extremal-quotient-d{d}"), 1e-11);
    }
    finish("twistor", &set, started);
}

#[test]
fn classification_inverts_the_symmetry_transform() {
    let started = Instant::now();
    let set = run_suite("classify", &with_dims(&[3, 5])).unwrap();
    for d in [3usize, 5] {
        let params = report(&set, &format!("classify-parameters-d{d}"));
        assert_eq!(params.metadata.get("draws").map(String::as_str), Some("20"));
        pinned(&set, &format!("classify-rebuild-d{d}"), 1e-9);
        pinned(&set, &format!("classify-vacuum-d{d}"), 1e-11);
    }
    finish("classify", &set, started);
}

#[test]
fn even_dimensions_report_the_rank_parity_obstruction() {
    let started = Instant::now();
    let set = run_suite("obstruction", &with_dims(&[4, 6])).unwrap();
    for d in [4usize, 6] {
        let rate = report(&set, &format!("obstruction-refusal-rate-d{d}"));
        assert_eq!(rate.computed, 1.0, "false passes in d={d}");
        assert_eq!(rate.tolerance, 0.0);
        assert!(report(&set, &format!("obstruction-no-false-pass-d{d}")).pass);
        assert!(report(&set, &format!("obstruction-even-rank-d{d}")).pass);
    }
    finish("obstruction", &set, started);
}

#[test]
fn rotation_lifts_cover_the_rotation_group() {
    let started = Instant::now();
    let set = run_suite("lift", &with_dims(&[3, 4, 5])).unwrap();
    for d in [3usize, 4, 5] {
        pinned(&set, &format!("lift-residual-d{d}"), 1e-12);
        pinned(&set, &format!("lift-composition-d{d}"), 1e-11);
    }
    assert!(report(&set, "lift-refuses-reflection-d3").pass);
    finish("lift", &set, started);
}

#[test]
fn scalar_reduction_matches_the_closed_form_eigenvalue() {
    let started = Instant::now();
    let set = run_suite("scalar", &with_dims(&[3, 4, 5])).unwrap();
    for d in [3usize, 4, 5] {
        pinned(&set, &format!("scalar-residual-d{d}"), 1e-12);
        pinned(&set, &format!("scalar-norm-ratio-d{d}"), 1e-8);
    }
    finish("scalar", &set, started);
}

#[test]
fn gauge_and_inversion_preserve_residuals_and_norms() {
    let started = Instant::now();
    let set = run_suite("symmetry", &with_dims(&[3, 5])).unwrap();
    for d in [3usize, 5] {
        for kind in ["gauge", "inversion"] {
            assert!(report(&set, &format!("symmetry-{kind}-residual-d{d}")).pass);
            pinned(&set, &format!("symmetry-{kind}-spinor-norm-d{d}"), 1e-8);
        }
        pinned(&set, &format!("symmetry-inversion-potential-norm-d{d}"), 1e-8);
    }
    finish("symmetry", &set, started);
}

#[test]
fn potential_current_is_divergence_free() {
    let started = Instant::now();
    let cfg = with_dims(&[3, 5]);
    assert_eq!(cfg.points, 200);
    let set = run_suite("divergence", &cfg).unwrap();
    for d in [3usize, 5] {
        pinned(&set, &format!("divergence-canonical-d{d}"), 1e-10);
        pinned(&set, &format!("divergence-covariant-d{d}"), 1e-10);
    }
    finish("divergence", &set, started);
}
