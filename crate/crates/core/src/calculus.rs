//! Quadrature over R^d, Lp norms, regularized moduli, and derivative checks.
//!
//! Integrals over R^d factor into a compactified radial rule (Gauss-Legendre
//! on t in (0,1) with r = t/(1-t)) and a product rule over spherical angles.
//! Radially symmetric integrands take the radial-only fast path. All node
//! loops run in a fixed order with compensated summation so repeated runs
//! produce bit-identical results.

use num_complex::Complex64;
use thiserror::Error;

use crate::clifford::GammaSet;
use crate::{CVector, RVector};

#[derive(Debug, Error)]
pub enum CalculusError {
    #[error("quadrature orders must be positive (radial {radial}, angular {angular})")]
    BadOrder { radial: usize, angular: usize },
    #[error("dimension {0} is not supported (need d >= 2)")]
    BadDimension(usize),
}

// ---------------------------------------------------------------------------
// Summation
// ---------------------------------------------------------------------------

/// Kahan-Babuska-Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// ---------------------------------------------------------------------------
// Sphere measures and the sharp constant
// ---------------------------------------------------------------------------

/// Surface measure of the unit sphere S^k in R^{k+1}, via the recursion
/// |S^k| = 2 pi |S^{k-2}| / (k - 1) with |S^0| = 2, |S^1| = 2 pi.
pub fn sphere_surface(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI * sphere_surface(k - 2) / (k as f64 - 1.0),
    }
}

/// Optimal constant in the scale-invariant Sobolev inequality on R^d:
/// S_d = d (d - 2) / 4 * |S^d|^{2/d}.
pub fn sobolev_constant(d: usize) -> f64 {
    let df = d as f64;
    df * (df - 2.0) / 4.0 * sphere_surface(d).powf(2.0 / df)
}

/// Reference value of the calibration integral int (1 + |x|^2)^{-d} dx
/// over R^d, which evaluates to 2^{-d} |S^d|.
pub fn calibration_target(d: usize) -> f64 {
    0.5f64.powi(d as i32) * sphere_surface(d)
}

// ---------------------------------------------------------------------------
// Quadrature scheme
// ---------------------------------------------------------------------------

/// Product quadrature for integrals over R^d.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    d: usize,
    /// Radial nodes t in (0,1) and weights; r = t / (1 - t).
    radial: Vec<(f64, f64)>,
    /// Polar angles: for level l (0-based), nodes theta in (0, pi) with
    /// weights that already include the sin^{d-2-l}(theta) measure factor.
    polar: Vec<Vec<(f64, f64)>>,
    /// Number of equispaced azimuthal nodes.
    azimuth: usize,
    radial_order: usize,
    angular_order: usize,
}

impl QuadratureScheme {
    /// Builds the rule at explicit orders.
    pub fn with_orders(
        d: usize,
        radial_order: usize,
        angular_order: usize,
    ) -> Result<Self, CalculusError> {
        if d < 2 {
            return Err(CalculusError::BadDimension(d));
        }
        if radial_order == 0 || angular_order == 0 {
            return Err(CalculusError::BadOrder {
                radial: radial_order,
                angular: angular_order,
            });
        }
        let (gl_nodes, gl_weights) = gauss_legendre(radial_order);
        let radial = gl_nodes
            .iter()
            .zip(gl_weights.iter())
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();

        let (ang_nodes, ang_weights) = gauss_legendre(angular_order);
        let mut polar = Vec::new();
        for level in 0..d.saturating_sub(2) {
            let sin_power = (d - 2 - level) as i32;
            let rule = ang_nodes
                .iter()
                .zip(ang_weights.iter())
                .map(|(&x, &w)| {
                    let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
                    let weight = 0.5 * std::f64::consts::PI * w * theta.sin().powi(sin_power);
                    (theta, weight)
                })
                .collect();
            polar.push(rule);
        }
        Ok(Self {
            d,
            radial,
            polar,
            azimuth: angular_order,
            radial_order,
            angular_order,
        })
    }

    /// Builds the rule at the default orders: 80 radial nodes, 24 nodes per
    /// angle up to d = 5 and 16 per angle beyond.
    pub fn new(d: usize) -> Result<Self, CalculusError> {
        let angular = if d <= 5 { 24 } else { 16 };
        Self::with_orders(d, 80, angular)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    /// Total number of integrand evaluations per full-rule integral.
    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angular_node_count()
    }

    /// Number of points in the spherical product rule.
    pub fn angular_node_count(&self) -> usize {
        self.polar
            .iter()
            .map(|rule| rule.len())
            .product::<usize>()
            * self.azimuth
    }

    /// Sum of the angular weights; equals |S^{d-1}| up to rule error.
    pub fn angular_weight_sum(&self) -> f64 {
        let mut total = 2.0 * std::f64::consts::PI;
        for rule in &self.polar {
            let mut acc = Accumulator::new();
            for &(_, w) in rule {
                acc.add(w);
            }
            total *= acc.total();
        }
        total
    }

    /// Relative error of the fast-path calibration integral
    /// int (1 + |x|^2)^{-d} dx against its closed form.
    pub fn calibration_error(&self) -> f64 {
        let d = self.d;
        let computed = self.integrate_radial(|r| (1.0 + r * r).powi(-(d as i32)));
        let target = calibration_target(d);
        ((computed - target) / target).abs()
    }

    /// Integrates a radially symmetric function:
    /// int_{R^d} g(|x|) dx = |S^{d-1}| int_0^inf g(r) r^{d-1} dr.
    pub fn integrate_radial<G: FnMut(f64) -> f64>(&self, mut g: G) -> f64 {
        let mut acc = Accumulator::new();
        let dm1 = (self.d - 1) as i32;
        for &(t, w) in &self.radial {
            let u = 1.0 - t;
            let r = t / u;
            let jac = r.powi(dm1) / (u * u);
            acc.add(w * jac * g(r));
        }
        sphere_surface(self.d - 1) * acc.total()
    }

    /// Radial counterpart of `integrate_many`: every integrand is a function
    /// of r alone and all of them share the same nodes.
    pub fn integrate_radial_many<F: FnMut(f64, &mut [f64])>(&self, mut f: F, totals: &mut [f64]) {
        let k = totals.len();
        let mut accs = vec![Accumulator::new(); k];
        let mut vals = vec![0.0; k];
        let dm1 = (self.d - 1) as i32;
        for &(t, w) in &self.radial {
            let u = 1.0 - t;
            let r = t / u;
            let jac = w * r.powi(dm1) / (u * u);
            f(r, &mut vals);
            for (acc, &v) in accs.iter_mut().zip(vals.iter()) {
                acc.add(jac * v);
            }
        }
        let surface = sphere_surface(self.d - 1);
        for (total, acc) in totals.iter_mut().zip(accs.iter()) {
            *total = surface * acc.total();
        }
    }

    /// Integrates a general function over R^d with the full product rule.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut out = [0.0];
        self.integrate_many(|x, vals| vals[0] = f(x), &mut out);
        out[0]
    }

    /// Integrates several integrands over shared nodes. `f` fills `vals`
    /// with the integrand values at `x`; `totals` receives the integrals.
    pub fn integrate_many<F: FnMut(&[f64], &mut [f64])>(&self, mut f: F, totals: &mut [f64]) {
        let k = totals.len();
        let mut accs = vec![Accumulator::new(); k];
        let mut vals = vec![0.0; k];
        let mut x = vec![0.0; self.d];
        let dm1 = (self.d - 1) as i32;
        for &(t, wr) in &self.radial {
            let u = 1.0 - t;
            let r = t / u;
            let wr_total = wr * r.powi(dm1) / (u * u);
            self.angular_recurse(0, r, wr_total, 1.0, &mut x, &mut |x, w| {
                f(x, &mut vals);
                for (acc, &v) in accs.iter_mut().zip(vals.iter()) {
                    acc.add(w * v);
                }
            });
        }
        for (total, acc) in totals.iter_mut().zip(accs.iter()) {
            *total = acc.total();
        }
    }

    /// Recursive walk over the angular product rule. `level` indexes polar
    /// angles; `sin_prefix` carries sin(theta_1)...sin(theta_level) and the
    /// first `level` coordinates of x/r are already written.
    fn angular_recurse(
        &self,
        level: usize,
        r: f64,
        weight: f64,
        sin_prefix: f64,
        x: &mut [f64],
        emit: &mut impl FnMut(&[f64], f64),
    ) {
        if level < self.polar.len() {
            for &(theta, w) in &self.polar[level] {
                x[level] = r * sin_prefix * theta.cos();
                self.angular_recurse(
                    level + 1,
                    r,
                    weight * w,
                    sin_prefix * theta.sin(),
                    x,
                    emit,
                );
            }
        } else {
            let d = self.d;
            let two_pi = 2.0 * std::f64::consts::PI;
            let w_phi = two_pi / self.azimuth as f64;
            for m in 0..self.azimuth {
                let phi = two_pi * (m as f64 + 0.5) / self.azimuth as f64;
                x[d - 2] = r * sin_prefix * phi.cos();
                x[d - 1] = r * sin_prefix * phi.sin();
                emit(x, weight * w_phi);
            }
        }
    }
}

/// Lp norm of a pointwise modulus given by `f`, using the full product rule.
pub fn lp_norm<F: FnMut(&[f64]) -> f64>(scheme: &QuadratureScheme, mut f: F, p: f64) -> f64 {
    scheme.integrate(|x| f(x).powf(p)).powf(1.0 / p)
}

/// Lp norm of a radial modulus profile `g(r)` about an arbitrary center.
pub fn lp_norm_radial<G: FnMut(f64) -> f64>(scheme: &QuadratureScheme, mut g: G, p: f64) -> f64 {
    scheme.integrate_radial(|r| g(r).powf(p)).powf(1.0 / p)
}

// ---------------------------------------------------------------------------
// Regularized modulus
// ---------------------------------------------------------------------------

/// The smoothed modulus |psi|_eps = sqrt(|psi|^2 + eps^2) at a point,
/// together with the data needed for its exact gradient. The gradient uses
/// |psi|_eps d|psi|_eps = Re <psi, d psi>, which holds for every eps > 0.
#[derive(Debug, Clone)]
pub struct RegularizedModulus {
    pub eps: f64,
}

impl RegularizedModulus {
    pub fn new(eps: f64) -> Self {
        Self { eps }
    }

    /// |psi|_eps from the spinor value.
    pub fn value(&self, psi: &CVector) -> f64 {
        (psi.norm_squared() + self.eps * self.eps).sqrt()
    }

    /// Gradient of |psi|_eps from the spinor value and its partials.
    pub fn gradient(&self, psi: &CVector, partials: &[CVector]) -> RVector {
        let m = self.value(psi);
        RVector::from_iterator(partials.len(), partials.iter().map(|dp| psi.dotc(dp).re / m))
    }

    /// Gradient of |psi|_eps^q via the chain rule.
    pub fn power_gradient(&self, q: f64, psi: &CVector, partials: &[CVector]) -> RVector {
        let m = self.value(psi);
        let scale = q * m.powf(q - 2.0);
        RVector::from_iterator(
            partials.len(),
            partials.iter().map(|dp| scale * psi.dotc(dp).re),
        )
    }

    /// The quotient `phi = psi / |psi|_eps^q` and its exact partials,
    /// `d phi = |psi|_eps^-q d psi - q |psi|_eps^{-q-1} (d|psi|_eps) psi`.
    pub fn quotient_with_partials(
        &self,
        q: f64,
        psi: &CVector,
        partials: &[CVector],
    ) -> (CVector, Vec<CVector>) {
        let m = self.value(psi);
        let inv = m.powf(-q);
        let phi = psi * crate::Complex64::new(inv, 0.0);
        let grad_m = self.gradient(psi, partials);
        let out = partials
            .iter()
            .zip(grad_m.iter())
            .map(|(dp, &dm)| {
                let mut d = dp * crate::Complex64::new(inv, 0.0);
                d.axpy(
                    crate::Complex64::new(-q * inv / m * dm, 0.0),
                    psi,
                    crate::Complex64::ONE,
                );
                d
            })
            .collect();
        (phi, out)
    }
}

/// `|psi|_eps^q - eps^q` without cancellation where `|psi| << eps`,
/// via `eps^q expm1((q/2) ln_1p(|psi|^2/eps^2))`.
pub fn eps_subtracted_power(norm_sq: f64, eps: f64, q: f64) -> f64 {
    eps.powf(q) * (0.5 * q * (norm_sq / (eps * eps)).ln_1p()).exp_m1()
}

// ---------------------------------------------------------------------------
// Penrose components
// ---------------------------------------------------------------------------

/// gamma . (-i grad) applied pointwise, from exact partial derivatives.
pub fn dirac_from_partials(g: &GammaSet, partials: &[CVector]) -> CVector {
    let n = g.spinor_dim();
    let mut out = CVector::zeros(n);
    for (j, dp) in partials.iter().enumerate() {
        out += (g.gamma(j) * dp).map(|z| z * Complex64::new(0.0, -1.0));
    }
    out
}

/// The j-th component of the trace-free derivative
/// P_j = -i d_j - (1/d) gamma_j gamma . (-i grad), from exact partials.
pub fn penrose_component(g: &GammaSet, partials: &[CVector], j: usize) -> CVector {
    let dirac = dirac_from_partials(g, partials);
    penrose_component_with_dirac(g, partials, &dirac, j)
}

/// Same as [`penrose_component`] with the Dirac image precomputed, so all d
/// components can share it.
pub fn penrose_component_with_dirac(
    g: &GammaSet,
    partials: &[CVector],
    dirac: &CVector,
    j: usize,
) -> CVector {
    let d = g.dim() as f64;
    partials[j].map(|z| z * Complex64::new(0.0, -1.0)) - (g.gamma(j) * dirac).map(|z| z / d)
}

/// Both sides of the pointwise contraction identity
/// sum_j |P_j phi|^2 = |grad phi|^2 - (1/d) |gamma.(-i grad) phi|^2.
pub fn penrose_pointwise_identity(g: &GammaSet, partials: &[CVector]) -> (f64, f64) {
    let dirac = dirac_from_partials(g, partials);
    let mut lhs = 0.0;
    for j in 0..g.dim() {
        lhs += penrose_component_with_dirac(g, partials, &dirac, j).norm_squared();
    }
    let grad_sq: f64 = partials.iter().map(|dp| dp.norm_squared()).sum();
    let rhs = grad_sq - dirac.norm_squared() / g.dim() as f64;
    (lhs, rhs)
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Centered finite-difference gradient with step halvings and an observed
/// convergence order.
#[derive(Debug, Clone)]
pub struct FdGradient {
    /// Partials at the finest step.
    pub partials: Vec<CVector>,
    /// Observed order from successive step halvings (2.0 for a centered
    /// stencil on smooth fields).
    pub order: f64,
    /// Steps used, coarsest first.
    pub steps: Vec<f64>,
}

/// Default finite-difference step at a point: 1e-3 (1 + |x|).
pub fn fd_default_step(x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-3 * (1.0 + norm)
}

/// Centered differences of a spinor-valued function at `x`, with three step
/// halvings to estimate the convergence order.
pub fn fd_gradient<F: Fn(&[f64]) -> CVector>(f: F, x: &[f64], base_step: Option<f64>) -> FdGradient {
    let d = x.len();
    let h0 = base_step.unwrap_or_else(|| fd_default_step(x));
    let steps: Vec<f64> = (0..4).map(|k| h0 / (1 << k) as f64).collect();
    let mut per_step: Vec<Vec<CVector>> = Vec::with_capacity(steps.len());
    for &h in &steps {
        let mut partials = Vec::with_capacity(d);
        for j in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let diff = (f(&xp) - f(&xm)).map(|z| z / Complex64::new(2.0 * h, 0.0));
            partials.push(diff);
        }
        per_step.push(partials);
    }
    // Successive differences decay like h^p for a p-th order stencil.
    let mut deltas = Vec::new();
    for k in 0..per_step.len() - 1 {
        let delta: f64 = (0..d)
            .map(|j| (&per_step[k][j] - &per_step[k + 1][j]).norm_squared())
            .sum::<f64>()
            .sqrt();
        deltas.push(delta);
    }
    let mut slopes = Vec::new();
    for k in 0..deltas.len() - 1 {
        if deltas[k + 1] > 0.0 && deltas[k] > 0.0 {
            slopes.push((deltas[k] / deltas[k + 1]).log2());
        }
    }
    let order = if slopes.is_empty() {
        f64::NAN
    } else {
        slopes.iter().sum::<f64>() / slopes.len() as f64
    };
    FdGradient {
        partials: per_step.pop().unwrap(),
        order,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_low_degree_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(5);
        // Degree up to 2n-1 = 9 is exact.
        for degree in 0..=9usize {
            let computed: f64 = nodes
                .iter()
                .zip(weights.iter())
                .map(|(&x, &w)| w * x.powi(degree as i32))
                .sum();
            let exact = if degree % 2 == 0 {
                2.0 / (degree as f64 + 1.0)
            } else {
                0.0
            };
            assert!(
                (computed - exact).abs() < 1e-14,
                "degree {degree}: {computed} vs {exact}"
            );
        }
    }

    #[test]
    fn sphere_surfaces_match_closed_forms() {
        let pi = std::f64::consts::PI;
        let known = [
            (2usize, 4.0 * pi),
            (3, 2.0 * pi * pi),
            (4, 8.0 * pi * pi / 3.0),
            (5, pi * pi * pi),
            (6, 16.0 * pi.powi(3) / 15.0),
        ];
        for (k, value) in known {
            assert!((sphere_surface(k) - value).abs() < 1e-12 * value);
        }
    }

    #[test]
    fn sharp_constant_reference_values() {
        // S_3 = (3/4) (2 pi^2)^{2/3}, and the equality-norm identity
        // (d/(d-2)) S_d = d^2 2^{-2} |S^d|^{2/d} ties it to the calibration
        // integral.
        let s3 = sobolev_constant(3);
        let expected = 0.75 * (2.0 * std::f64::consts::PI.powi(2)).powf(2.0 / 3.0);
        assert!((s3 - expected).abs() < 1e-12 * expected);
        for d in [3usize, 5, 7] {
            let df = d as f64;
            let lhs = df / (df - 2.0) * sobolev_constant(d);
            let rhs = df * df / 4.0 * sphere_surface(d).powf(2.0 / df);
            assert!((lhs - rhs).abs() < 1e-11 * rhs);
        }
    }

    #[test]
    fn radial_fast_path_hits_calibration_targets() {
        for (d, tol) in [(3usize, 1e-9), (5, 1e-9), (7, 1e-6)] {
            let scheme = QuadratureScheme::new(d).unwrap();
            assert!(
                scheme.calibration_error() < tol,
                "calibration error {} at d={d}",
                scheme.calibration_error()
            );
        }
    }

    #[test]
    fn gaussian_integral_sanity() {
        let scheme = QuadratureScheme::new(3).unwrap();
        let computed = scheme.integrate_radial(|r| (-r * r).exp());
        let target = std::f64::consts::PI.powf(1.5);
        assert!(((computed - target) / target).abs() < 1e-8);
    }

    #[test]
    fn full_product_rule_matches_radial_path_on_calibration() {
        for d in [3usize, 4] {
            let scheme = QuadratureScheme::with_orders(d, 48, 16).unwrap();
            let full = scheme.integrate(|x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (1.0 + r2).powi(-(d as i32))
            });
            let target = calibration_target(d);
            assert!(
                ((full - target) / target).abs() < 1e-9,
                "full-rule calibration {full} vs {target} at d={d}"
            );
        }
    }

    #[test]
    fn angular_weights_sum_to_sphere_surface() {
        for d in [3usize, 4, 5, 7] {
            let scheme = QuadratureScheme::new(d).unwrap();
            let sum = scheme.angular_weight_sum();
            let target = sphere_surface(d - 1);
            assert!(
                ((sum - target) / target).abs() < 1e-12,
                "weight sum {sum} vs {target} at d={d}"
            );
        }
    }

    #[test]
    fn doubling_orders_shrinks_calibration_error_tenfold() {
        let coarse = QuadratureScheme::with_orders(3, 8, 8).unwrap();
        let fine = QuadratureScheme::with_orders(3, 16, 16).unwrap();
        let e_coarse = coarse.calibration_error();
        let e_fine = fine.calibration_error();
        assert!(
            e_fine * 10.0 <= e_coarse,
            "coarse {e_coarse} fine {e_fine}"
        );
        let full_coarse = coarse.integrate(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (1.0 + r2).powi(-3)
        });
        let full_fine = fine.integrate(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (1.0 + r2).powi(-3)
        });
        let target = calibration_target(3);
        let ef_coarse = ((full_coarse - target) / target).abs();
        let ef_fine = ((full_fine - target) / target).abs();
        assert!(ef_fine * 10.0 <= ef_coarse);
    }

    #[test]
    fn integration_is_deterministic() {
        let scheme = QuadratureScheme::with_orders(4, 24, 10).unwrap();
        let run = || {
            scheme.integrate(|x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (x[0] + 0.3 * x[1]).sin().powi(2) * (1.0 + r2).powi(-4)
            })
        };
        let a = run();
        let b = run();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn fd_gradient_sees_second_order_on_smooth_data() {
        let f = |x: &[f64]| {
            CVector::from_vec(vec![Complex64::new(
                (x[0] * 1.3).sin() * (x[1] - 0.2).cos(),
                x[2] * x[0],
            )])
        };
        let grad = fd_gradient(f, &[0.4, -0.3, 0.9], None);
        assert!((grad.order - 2.0).abs() < 0.1, "order {}", grad.order);
        // d/dx0 at the point, real part: 1.3 cos(1.3 x0) cos(x1 - 0.2).
        let expected = 1.3 * (0.4f64 * 1.3).cos() * (-0.3f64 - 0.2).cos();
        assert!((grad.partials[0][0].re - expected).abs() < 1e-6);
    }

    #[test]
    fn radial_many_agrees_with_single_radial_integrals() {
        let scheme = QuadratureScheme::with_orders(3, 40, 8).unwrap();
        let mut totals = [0.0; 2];
        scheme.integrate_radial_many(
            |r, vals| {
                vals[0] = (1.0 + r * r).powi(-3);
                vals[1] = (2.0 + r * r).powi(-4);
            },
            &mut totals,
        );
        let a = scheme.integrate_radial(|r| (1.0 + r * r).powi(-3));
        let b = scheme.integrate_radial(|r| (2.0 + r * r).powi(-4));
        assert_eq!(totals[0].to_bits(), a.to_bits());
        assert_eq!(totals[1].to_bits(), b.to_bits());
    }

    #[test]
    fn quotient_partials_match_finite_differences() {
        let reg = RegularizedModulus::new(0.3);
        let q = 1.5;
        let f = |x: &[f64]| {
            CVector::from_vec(vec![
                Complex64::new((x[0] * 0.9).sin(), x[1] * 0.4),
                Complex64::new(x[2] * 0.7 - 0.1, (x[0] + x[1]).cos()),
            ])
        };
        let x = [0.5, -0.2, 0.8];
        let h = 1e-5;
        let quotient = |p: &[f64]| {
            let v = f(p);
            let m = reg.value(&v);
            v * Complex64::new(m.powf(-q), 0.0)
        };
        let fd = fd_gradient(quotient, &x, Some(h));
        let exact_partials = fd_gradient(f, &x, Some(1e-6));
        let (_, dphi) = reg.quotient_with_partials(q, &f(&x), &exact_partials.partials);
        for j in 0..3 {
            assert!((&dphi[j] - &fd.partials[j]).norm() < 1e-7);
        }
    }

    #[test]
    fn eps_subtraction_is_stable_in_both_regimes() {
        let q = 0.5;
        // |psi| >> eps: direct evaluation is fine and must agree.
        let big = eps_subtracted_power(4.0, 1e-3, q);
        let direct = (4.0f64 + 1e-6).sqrt().powf(q) - 1e-3f64.powf(q);
        assert!((big - direct).abs() / direct < 1e-12);
        // |psi| << eps: the difference is tiny but must stay positive and
        // match the first-order expansion (q/2) eps^{q-2} |psi|^2.
        let small = eps_subtracted_power(1e-20, 1e-2, q);
        let expansion = 0.5 * q * 1e-2f64.powf(q - 2.0) * 1e-20;
        assert!(small > 0.0);
        assert!((small - expansion).abs() / expansion < 1e-6);
    }
}
