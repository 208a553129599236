//! Pointwise and algebraic certificates: zero modes, the divergence gauge
//! condition, the twistor characterization, spin lifts, the even-dimension
//! obstruction, the scalar companion family, and the symmetry suite.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{
    dirac_from_partials, fd_gradient, penrose_component_with_dirac, sobolev_constant,
    QuadratureScheme, RegularizedModulus,
};
use crate::clifford::{spin_lift, CliffordError, GammaSet};
use crate::fields::{
    equality_data, power_divergence_of, reduce_skew_to_sigma, scalar_pair, skew_rank, twistor,
    GaugePhase, PhaseTerm, SpinorField, SpinorTerm, ZeroModePair,
};
use crate::linalg::{max_abs_diff, random_rotation, random_unit_spinor};
use crate::{CMatrix, CVector, Complex64, RMatrix, RVector};

use super::integrals::{potential_norm_sq, spinor_norm};
use super::points::sample_points;
use super::VerificationReport;

fn unit_vector(d: usize, j: usize) -> RVector {
    let mut v = RVector::zeros(d);
    v[j] = 1.0;
    v
}

fn max_residual(pair: &ZeroModePair, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| pair.residual(x))
        .fold(0.0f64, f64::max)
}

/// Residual of the conjugation action `U* g_j U = gamma.(O e_j)`.
fn intertwine_residual(g: &GammaSet, u: &CMatrix, o: &RMatrix) -> f64 {
    let d = g.dim();
    let mut worst: f64 = 0.0;
    for j in 0..d {
        let col: Vec<f64> = (0..d).map(|k| o[(k, j)]).collect();
        worst = worst.max(max_abs_diff(&(u.adjoint() * g.gamma(j) * u), &g.dot(&col)));
    }
    worst
}

/// Zero-mode certificates for the extremal pair in one dimension: the exact
/// residual at scattered points, the finite-difference cross-check of the
/// analytic derivatives, and a perturbed negative control.
pub fn zero_mode_reports(d: usize, count: usize, seed: u64) -> Vec<VerificationReport> {
    let gammas = Arc::new(GammaSet::new(d).expect("supported dimension"));
    let pair = ZeroModePair::extremal(Arc::clone(&gammas)).expect("odd dimension");
    let points = sample_points(d, count, seed);

    let mut reports = vec![VerificationReport::bounded(
        format!("zero-mode-residual-d{d}"),
        max_residual(&pair, &points),
        1e-11,
    )
    .with_meta("points", count.to_string())
    .with_meta("seed", seed.to_string())];

    // Observed convergence order of centered differences against the closed
    // form; second order certifies the analytic partials independently.
    let mut orders = Vec::new();
    let mut fd_gap: f64 = 0.0;
    for x in sample_points(d, 4, seed ^ 0x5159).iter() {
        let x: Vec<f64> = x.iter().map(|v| v.clamp(-1.5, 1.5)).collect();
        let fd = fd_gradient(|y| pair.psi_value(y), &x, None);
        orders.push(fd.order);
        let exact = pair.psi_partials(&x);
        for (a, b) in fd.partials.iter().zip(exact.iter()) {
            fd_gap = fd_gap.max((a - b).norm());
        }
    }
    let mean_order = orders.iter().sum::<f64>() / orders.len() as f64;
    reports.push(
        VerificationReport::against(format!("zero-mode-fd-order-d{d}"), mean_order, 2.0, 0.05)
            .with_meta("fd_gap", format!("{fd_gap:.3e}")),
    );

    // Scaling the potential by 1+1e-3 must break the equation visibly.
    let mut bad_a = pair.potential().clone();
    bad_a.kappa *= 1.0 + 1e-3;
    let bad = ZeroModePair::from_parts(pair.spinor().clone(), bad_a, None).expect("same dims");
    reports.push(VerificationReport::at_least(
        format!("zero-mode-detects-perturbation-d{d}"),
        max_residual(&bad, &points),
        1e-6,
    ));
    reports
}

/// The optimizing potentials satisfy `div(|A|^{d-2} A) = 0` identically; a
/// constant offset breaks it and translation/dilation preserve it.
pub fn divergence_reports(d: usize, count: usize, seed: u64) -> Vec<VerificationReport> {
    let gammas = Arc::new(GammaSet::new(d).expect("supported dimension"));
    let pair = ZeroModePair::extremal(gammas).expect("odd dimension");
    let a = pair.potential();
    let p = d as f64 - 2.0;
    let points = sample_points(d, count, seed);

    let worst = points
        .iter()
        .map(|x| a.power_divergence(p, x).abs())
        .fold(0.0f64, f64::max);
    let mut reports = vec![VerificationReport::bounded(
        format!("divergence-canonical-d{d}"),
        worst,
        1e-10,
    )
    .with_meta("field_scale", format!("{:.1}", (d as f64).powi(d as i32 - 1)))
    .with_meta("points", count.to_string())];

    let moved = a.transformed(&RMatrix::identity(d, d), &(unit_vector(d, 1) * 0.7), 1.6);
    let worst_moved = points
        .iter()
        .map(|x| moved.power_divergence(p, x).abs())
        .fold(0.0f64, f64::max);
    reports.push(VerificationReport::bounded(
        format!("divergence-covariant-d{d}"),
        worst_moved,
        1e-10,
    ));

    let offset = unit_vector(d, 0) * 0.25;
    let worst_offset = points
        .iter()
        .map(|x| {
            let v = a.value(x) + &offset;
            power_divergence_of(&v, &a.jacobian(x), p).abs()
        })
        .fold(0.0f64, f64::max);
    reports.push(VerificationReport::at_least(
        format!("divergence-detects-offset-d{d}"),
        worst_offset,
        1e-6,
    ));
    reports
}

fn penrose_residual_from_partials(g: &GammaSet, partials: &[CVector]) -> f64 {
    let dirac = dirac_from_partials(g, partials);
    (0..g.dim())
        .map(|j| penrose_component_with_dirac(g, partials, &dirac, j).norm())
        .fold(0.0f64, f64::max)
}

/// Twistor certificates: affine fields solve the trace-free equation, the
/// parameters are recoverable, the extremal modulus quotient is affine, and
/// a quadratic contamination is detected.
pub fn twistor_reports(d: usize, seed: u64) -> Vec<VerificationReport> {
    let gammas = Arc::new(GammaSet::new(d).expect("supported dimension"));
    let n = gammas.spinor_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = random_unit_spinor(n, &mut rng);
    let phi1 = random_unit_spinor(n, &mut rng);
    let field = twistor(Arc::clone(&gammas), &phi0, &phi1).expect("matching dims");
    let points = sample_points(d, 60, seed ^ 0x77);

    let worst = points
        .iter()
        .map(|x| penrose_residual_from_partials(&gammas, &field.partials(x)))
        .fold(0.0f64, f64::max);
    let mut reports = vec![VerificationReport::bounded(
        format!("twistor-affine-residual-d{d}"),
        worst,
        1e-13,
    )];

    // Recover (phi0, phi1) from the value at the origin and one derivative.
    let origin = vec![0.0; d];
    let rec0 = field.value(&origin);
    let rec1 = gammas.gamma(0) * &field.partials(&origin)[0];
    let rebuilt = twistor(Arc::clone(&gammas), &rec0, &rec1).expect("matching dims");
    let round_trip = points
        .iter()
        .map(|x| (field.value(x) - rebuilt.value(x)).norm())
        .fold(0.0f64, f64::max);
    reports.push(VerificationReport::bounded(
        format!("twistor-round-trip-d{d}"),
        round_trip,
        1e-12,
    ));

    // The modulus quotient of the extremal zero mode is itself affine.
    if d % 2 == 1 {
        let pair = ZeroModePair::extremal(Arc::clone(&gammas)).expect("odd dimension");
        let reg = RegularizedModulus::new(0.0);
        let q = d as f64 / (d as f64 - 1.0);
        let worst_quotient = points
            .iter()
            .map(|x| {
                let v = pair.psi_value(x);
                let parts = pair.psi_partials(x);
                let (_, dq) = reg.quotient_with_partials(q, &v, &parts);
                penrose_residual_from_partials(&gammas, &dq)
            })
            .fold(0.0f64, f64::max);
        let quotient_norm = (reg
            .quotient_with_partials(q, &pair.psi_value(&origin), &pair.psi_partials(&origin))
            .0)
            .norm();
        reports.push(
            VerificationReport::bounded(
                format!("twistor-extremal-quotient-d{d}"),
                worst_quotient,
                1e-11,
            )
            .with_meta("quotient_norm_at_center", format!("{quotient_norm:.12}")),
        );
    }

    // A quadratically growing contamination must be flagged.
    let mut terms = field.terms().to_vec();
    terms.push(SpinorTerm {
        power: -1.0,
        scale: 1.0,
        center: RVector::zeros(d),
        coeff: Complex64::new(0.05, 0.0),
        lo: phi0.clone(),
        hi: CVector::zeros(n),
    });
    let contaminated = SpinorField::new(Arc::clone(&gammas), terms).expect("matching dims");
    let worst_bad = points
        .iter()
        .map(|x| penrose_residual_from_partials(&gammas, &contaminated.partials(x)))
        .fold(0.0f64, f64::max);
    reports.push(VerificationReport::at_least(
        format!("twistor-detects-quadratic-term-d{d}"),
        worst_bad,
        1e-6,
    ));
    reports
}

/// Spin-lift certificates: the solver residual over random rotations, the
/// contravariant composition law under conjugation, and the reflection
/// obstruction in odd dimensions.
pub fn lift_reports(dims: &[usize], count: usize, seed: u64) -> Vec<VerificationReport> {
    let mut reports = Vec::new();
    for &d in dims {
        let gammas = GammaSet::new(d).expect("supported dimension");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
        let mut worst: f64 = 0.0;
        let mut lifts = Vec::new();
        for _ in 0..count {
            let o = random_rotation(d, &mut rng);
            let lift = spin_lift(&gammas, &o).expect("rotations lift");
            worst = worst.max(lift.residual);
            if lifts.len() < 16 {
                lifts.push(lift);
            }
        }
        reports.push(
            VerificationReport::bounded(format!("lift-residual-d{d}"), worst, 1e-12)
                .with_meta("rotations", count.to_string()),
        );

        let mut worst_comp: f64 = 0.0;
        for pair in lifts.chunks(2) {
            if let [a, b] = pair {
                let u = &a.u * &b.u;
                let o = &b.o * &a.o;
                worst_comp = worst_comp.max(intertwine_residual(&gammas, &u, &o));
            }
        }
        reports.push(VerificationReport::bounded(
            format!("lift-composition-d{d}"),
            worst_comp,
            1e-11,
        ));
    }

    let g3 = GammaSet::new(3).expect("d=3");
    let minus = RMatrix::identity(3, 3) * -1.0;
    let refused = matches!(spin_lift(&g3, &minus), Err(CliffordError::NotLiftable { .. }));
    reports.push(VerificationReport::against(
        "lift-refuses-reflection-d3",
        if refused { 1.0 } else { 0.0 },
        1.0,
        0.0,
    ));
    reports
}

fn random_admissible(
    g: &GammaSet,
    rng: &mut ChaCha8Rng,
) -> (CVector, CVector) {
    let n = g.spinor_dim();
    let phi0 = random_unit_spinor(n, rng);
    loop {
        let mut phi1 = random_unit_spinor(n, rng);
        // Subtract the real projections onto gamma_j phi0; those directions
        // are Re-orthonormal for unit phi0, so one pass is exact.
        for j in 0..g.dim() {
            let gj = g.gamma(j) * &phi0;
            let c = gj.dotc(&phi1).re;
            phi1 -= gj * Complex64::new(c, 0.0);
        }
        let norm = phi1.norm();
        if norm > 1e-6 {
            return (phi0, phi1 / Complex64::new(norm, 0.0));
        }
    }
}

/// Even dimensions admit no equality pair: the structure equations force a
/// skew matrix of odd rank, which cannot exist. Every random admissible
/// draw must be refused, with no false passes.
pub fn obstruction_reports(d: usize, count: usize, seed: u64) -> Vec<VerificationReport> {
    assert!(d % 2 == 0, "obstruction applies to even dimensions");
    let gammas = GammaSet::new(d).expect("supported dimension");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst_admissible: f64 = 0.0;
    let mut min_structure = f64::INFINITY;
    let mut odd_ranks = 0usize;
    let mut refusals = 0usize;
    for _ in 0..count {
        let (phi0, phi1) = random_admissible(&gammas, &mut rng);
        let data = equality_data(&gammas, &phi0, &phi1);
        worst_admissible = worst_admissible.max(data.admissible);
        min_structure = min_structure.min(data.structure().max());
        if skew_rank(&data.m, 1e-10) % 2 != 0 {
            odd_ranks += 1;
        }
        if reduce_skew_to_sigma(&data.w, &data.m).is_err() {
            refusals += 1;
        }
    }

    // Independent parity check on generic skew matrices.
    for _ in 0..count {
        let x = RMatrix::from_fn(d, d, |_, _| {
            use rand::Rng;
            rng.gen::<f64>() - 0.5
        });
        let skew = &x - x.transpose();
        if skew_rank(&skew, 1e-10) % 2 != 0 {
            odd_ranks += 1;
        }
    }

    vec![
        VerificationReport::bounded(
            format!("obstruction-admissible-input-d{d}"),
            worst_admissible,
            1e-10,
        )
        .with_meta("draws", count.to_string()),
        VerificationReport::at_least(
            format!("obstruction-no-false-pass-d{d}"),
            min_structure,
            1e-6,
        )
        .with_meta("draws", count.to_string()),
        VerificationReport::against(
            format!("obstruction-refusal-rate-d{d}"),
            refusals as f64 / count as f64,
            1.0,
            0.0,
        ),
        VerificationReport::against(
            format!("obstruction-even-rank-d{d}"),
            odd_ranks as f64,
            0.0,
            0.0,
        ),
    ]
}

/// Scalar companion family: for any unit starting spinor and either sign the
/// field solves the scalar-potential equation, its modulus follows the radial
/// law, and the potential norm meets the same sharp constant.
pub fn scalar_reports(
    d: usize,
    seed: u64,
    scheme: &QuadratureScheme,
) -> Vec<VerificationReport> {
    let gammas = Arc::new(GammaSet::new(d).expect("supported dimension"));
    let n = gammas.spinor_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample_points(d, 80, seed ^ 0x2d);

    let mut worst_res: f64 = 0.0;
    let mut worst_law: f64 = 0.0;
    let mut lambda_sum: f64 = 0.0;
    for draw in 0..3 {
        let phi0 = random_unit_spinor(n, &mut rng);
        for sign in [1.0, -1.0] {
            let sc = scalar_pair(Arc::clone(&gammas), &phi0, sign).expect("nonzero data");
            for x in &points {
                worst_res = worst_res.max(sc.residual(x));
                worst_law =
                    worst_law.max((sc.spinor().modulus_sq(x) - sc.modulus_law(x)).abs());
            }
            if draw == 0 {
                lambda_sum += sc.lambda(&points[0]);
            }
        }
    }

    let phi0 = random_unit_spinor(n, &mut rng);
    let sc = scalar_pair(Arc::clone(&gammas), &phi0, 1.0).expect("nonzero data");
    let mut x = vec![0.0; d];
    let norm_sq = scheme
        .integrate_radial(|r| {
            x[0] = r;
            sc.lambda(&x).abs().powi(d as i32)
        })
        .powf(2.0 / d as f64);
    let ratio_target = d as f64 / (d as f64 - 2.0);

    vec![
        VerificationReport::bounded(format!("scalar-residual-d{d}"), worst_res, 1e-12)
            .with_meta("draws", "3".to_string())
            .with_meta("points", points.len().to_string()),
        VerificationReport::bounded(format!("scalar-modulus-law-d{d}"), worst_law, 1e-12),
        VerificationReport::against(
            format!("scalar-sign-flip-cancels-d{d}"),
            lambda_sum,
            0.0,
            1e-15,
        ),
        VerificationReport::against(
            format!("scalar-norm-ratio-d{d}"),
            norm_sq / sobolev_constant(d),
            ratio_target,
            1e-8,
        ),
    ]
}

/// Gauge and conformal symmetry certificates on a generically transformed
/// extremal pair. Gauge changes preserve the residual and the spinor norm
/// while keeping the potential norm above the sharp constant; inversion
/// preserves the residual and both norms.
pub fn symmetry_reports(
    d: usize,
    seed: u64,
    scheme: &QuadratureScheme,
) -> Vec<VerificationReport> {
    let gammas = Arc::new(GammaSet::new(d).expect("supported dimension"));
    let base = ZeroModePair::extremal(Arc::clone(&gammas)).expect("odd dimension");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = random_rotation(d, &mut rng);
    let shift = unit_vector(d, 1) * 0.4;
    let pair = base
        .transformed(&o, &shift, 1.3, Complex64::new(0.8, 0.3))
        .expect("rotation lifts");
    let points = sample_points(d, 120, seed ^ 0x91);
    let psi_p = 2.0 * d as f64 / (d as f64 - 1.0);
    let center: Vec<f64> = pair
        .radial_profile()
        .expect("single admissible term")
        .center
        .iter()
        .copied()
        .collect();
    let base_res = max_residual(&pair, &points);
    let base_psi_norm = spinor_norm(scheme, &center, |x| pair.psi_value(x).norm_squared(), psi_p);
    let base_a_norm_sq = potential_norm_sq(pair.potential(), scheme, true);

    let mut reports = vec![VerificationReport::bounded(
        format!("symmetry-base-residual-d{d}"),
        base_res,
        1e-11,
    )];

    let phase = GaugePhase::new(
        0.3,
        vec![PhaseTerm {
            coef: 0.7,
            v: unit_vector(d, 1) + unit_vector(d, 0) * 0.5,
            center: unit_vector(d, 0) * 0.2,
            scale: 1.1,
            m: 1,
        }],
    );
    let gauged = pair.gauged(&phase);
    reports.push(VerificationReport::bounded(
        format!("symmetry-gauge-residual-d{d}"),
        max_residual(&gauged, &points),
        1e-11,
    ));
    let gauged_psi_norm =
        spinor_norm(scheme, &center, |x| gauged.psi_value(x).norm_squared(), psi_p);
    reports.push(VerificationReport::against(
        format!("symmetry-gauge-spinor-norm-d{d}"),
        gauged_psi_norm,
        base_psi_norm,
        1e-8,
    ));
    // The gauged potential leaves the closed-form family, so its norm is not
    // an invariant; the sharp lower bound is, because the zero mode survives.
    let mut x = vec![0.0; d];
    let gauged_a_norm_sq = scheme
        .integrate(|y| {
            for j in 0..d {
                x[j] = center[j] + y[j];
            }
            gauged.a_value(&x).norm().powi(d as i32)
        })
        .powf(2.0 / d as f64);
    let sharp = d as f64 / (d as f64 - 2.0) * sobolev_constant(d);
    reports.push(
        VerificationReport::at_least(
            format!("symmetry-gauge-norm-above-sharp-d{d}"),
            gauged_a_norm_sq,
            sharp * (1.0 - 1e-8),
        )
        .with_meta("sharp_constant_bound", format!("{sharp:.12e}")),
    );

    let inv = pair.inverted().expect("no phase attached");
    reports.push(VerificationReport::bounded(
        format!("symmetry-inversion-residual-d{d}"),
        max_residual(&inv, &points),
        1e-11,
    ));
    let inv_center: Vec<f64> = inv
        .radial_profile()
        .expect("inversion stays in the family")
        .center
        .iter()
        .copied()
        .collect();
    let inv_psi_norm =
        spinor_norm(scheme, &inv_center, |x| inv.psi_value(x).norm_squared(), psi_p);
    reports.push(VerificationReport::against(
        format!("symmetry-inversion-spinor-norm-d{d}"),
        inv_psi_norm,
        base_psi_norm,
        1e-8,
    ));
    let inv_a_norm_sq = potential_norm_sq(inv.potential(), scheme, true);
    reports.push(VerificationReport::against(
        format!("symmetry-inversion-potential-norm-d{d}"),
        inv_a_norm_sq,
        base_a_norm_sq,
        1e-8,
    ));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_suite_passes_in_three_dimensions() {
        let reports = zero_mode_reports(3, 60, 11);
        for r in &reports {
            assert!(r.pass, "{}: computed {:.3e}", r.claim, r.computed);
        }
    }

    #[test]
    fn divergence_suite_passes_and_detects_offsets() {
        for r in divergence_reports(3, 60, 5) {
            assert!(r.pass, "{}: computed {:.3e}", r.claim, r.computed);
        }
    }

    #[test]
    fn twistor_suite_passes_in_three_dimensions() {
        for r in twistor_reports(3, 23) {
            assert!(r.pass, "{}: computed {:.3e}", r.claim, r.computed);
        }
    }

    #[test]
    fn lift_suite_passes_for_small_batches() {
        for r in lift_reports(&[3, 4], 6, 3) {
            assert!(r.pass, "{}: computed {:.3e}", r.claim, r.computed);
        }
    }

    #[test]
    fn obstruction_suite_refuses_even_dimensions() {
        for r in obstruction_reports(4, 12, 7) {
            assert!(r.pass, "{}: computed {:.3e}", r.claim, r.computed);
        }
    }

    #[test]
    fn scalar_suite_passes_in_even_and_odd_dimensions() {
        for d in [3usize, 4] {
            let scheme = QuadratureScheme::with_orders(d, 80, 12).unwrap();
            for r in scalar_reports(d, 19, &scheme) {
                assert!(r.pass, "{}: computed {:.6e} target {:.6e}", r.claim, r.computed, r.target);
            }
        }
    }

    #[test]
    fn symmetry_suite_passes_in_three_dimensions() {
        let scheme = QuadratureScheme::with_orders(3, 80, 16).unwrap();
        for r in symmetry_reports(3, 31, &scheme) {
            assert!(r.pass, "{}: computed {:.6e} target {:.6e}", r.claim, r.computed, r.target);
        }
    }
}
