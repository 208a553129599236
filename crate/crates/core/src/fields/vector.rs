//! The four-parameter vector potential family of the equality cases.

use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::{RMatrix, RVector};

/// `A(x) = kappa b (b^2+r^2)^-2 ((b^2-r^2) w + 2u (w.u) + 2b M u)` with
/// `u = x - center`, `r = |u|`. Equality fields have `|w| = 1`, `M w = 0`,
/// `M^T M + w w^T = I` and `kappa = d`; the struct itself does not insist,
/// so deliberately broken fields can be built for negative tests.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub w: RVector,
    pub m: RMatrix,
    pub center: RVector,
    pub scale: f64,
    pub kappa: f64,
}

impl VectorField {
    pub fn new(w: RVector, m: RMatrix, center: RVector, scale: f64, kappa: f64) -> Self {
        assert_eq!(w.len(), m.nrows());
        assert_eq!(m.nrows(), m.ncols());
        assert_eq!(w.len(), center.len());
        assert!(scale > 0.0);
        Self {
            w,
            m,
            center,
            scale,
            kappa,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn value(&self, x: &[f64]) -> RVector {
        let u = RVector::from_row_slice(x) - &self.center;
        let b = self.scale;
        let r2 = u.norm_squared();
        let den = b * b + r2;
        let wu = self.w.dot(&u);
        let mut v = &self.w * (b * b - r2);
        v.axpy(2.0 * wu, &u, 1.0);
        v.axpy(2.0 * b, &(&self.m * &u), 1.0);
        v * (self.kappa * b / (den * den))
    }

    /// What `|A|` must equal when the structure equations hold.
    pub fn modulus_law(&self, x: &[f64]) -> f64 {
        let u = RVector::from_row_slice(x) - &self.center;
        self.kappa.abs() * self.scale / (self.scale * self.scale + u.norm_squared())
    }

    pub fn modulus(&self, x: &[f64]) -> f64 {
        self.value(x).norm()
    }

    /// Exact Jacobian, entry `(j, k) = d A_k / d x_j`.
    pub fn jacobian(&self, x: &[f64]) -> RMatrix {
        let d = self.dim();
        let u = RVector::from_row_slice(x) - &self.center;
        let b = self.scale;
        let r2 = u.norm_squared();
        let den = b * b + r2;
        let wu = self.w.dot(&u);
        let mut v = &self.w * (b * b - r2);
        v.axpy(2.0 * wu, &u, 1.0);
        v.axpy(2.0 * b, &(&self.m * &u), 1.0);
        let mut jac = RMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let dv = -2.0 * u[j] * self.w[k]
                    + if j == k { 2.0 * wu } else { 0.0 }
                    + 2.0 * u[k] * self.w[j]
                    + 2.0 * b * self.m[(k, j)];
                jac[(j, k)] =
                    self.kappa * b * (dv / (den * den) - 4.0 * u[j] * v[k] / (den * den * den));
            }
        }
        jac
    }

    /// Exact divergence `2 (d-2) kappa b (w.u) / (b^2+r^2)^2`.
    pub fn divergence(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let u = RVector::from_row_slice(x) - &self.center;
        let b = self.scale;
        let den = b * b + u.norm_squared();
        2.0 * (d - 2.0) * self.kappa * b * self.w.dot(&u) / (den * den)
    }

    /// Divergence of `|A|^p A` from the exact value and Jacobian.
    pub fn power_divergence(&self, p: f64, x: &[f64]) -> f64 {
        power_divergence_of(&self.value(x), &self.jacobian(x), p)
    }

    /// How far `(w, M)` sit from the equality structure equations.
    pub fn structure_residual(&self) -> f64 {
        let d = self.dim();
        let unit = (self.w.norm() - 1.0).abs();
        let kernel = (&self.m * &self.w).norm();
        let gram =
            (self.m.transpose() * &self.m + &self.w * self.w.transpose() - RMatrix::identity(d, d))
                .norm();
        let skew = (&self.m + self.m.transpose()).norm();
        unit.max(kernel).max(gram).max(skew)
    }

    /// Same field seen through `x -> shift + scale0 O x`.
    pub fn transformed(&self, o: &RMatrix, shift: &RVector, scale0: f64) -> Self {
        Self {
            w: o * &self.w,
            m: o * &self.m * o.transpose(),
            center: shift + scale0 * (o * &self.center),
            scale: scale0 * self.scale,
            kappa: self.kappa,
        }
    }

    /// Pullback under inversion at a point, `DPhi(x)^T A(x/|x|^2)`.
    pub fn inversion_pullback(&self, x: &[f64]) -> RVector {
        let d = self.dim();
        let xv = RVector::from_row_slice(x);
        let r2 = xv.norm_squared();
        assert!(r2 > 0.0, "pullback is singular at the origin");
        let y: Vec<f64> = x.iter().map(|v| v / r2).collect();
        let a = self.value(&y);
        let mut out = RVector::zeros(d);
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                let jjk = (if j == k { r2 } else { 0.0 } - 2.0 * x[j] * x[k]) / (r2 * r2);
                s += jjk * a[k];
            }
            out[j] = s;
        }
        out
    }

    /// Family parameters of the inversion pullback. For equality fields the
    /// pullback lands back in the family; the parameters are read off exactly
    /// at probe points, so any mismatch shows up pointwise, not here.
    pub fn inverted(&self) -> Self {
        let b = self.scale;
        let rho = b * b + self.center.norm_squared();
        let b_new = b / rho;
        let c_new = &self.center / rho;
        if self.center.norm_squared() == 0.0 {
            return Self {
                w: -&self.w,
                m: self.m.clone(),
                center: c_new,
                scale: b_new,
                kappa: self.kappa,
            };
        }
        let d = self.dim();
        // A(center) = (kappa/b) w fixes w from one probe at the new center.
        let w_new = self.inversion_pullback(c_new.as_slice()) * (b_new / self.kappa);
        // V(u) = (b^2-|u|^2) w + 2u (w.u) + 2b M u isolates M in its odd part.
        let probe_v = |u: &RVector| -> RVector {
            let xp = &c_new + u;
            let den = b_new * b_new + u.norm_squared();
            self.inversion_pullback(xp.as_slice()) * (den * den / (self.kappa * b_new))
        };
        let t = 1.0 + 2.0 * c_new.norm();
        let mut m_new = RMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = RVector::zeros(d);
            e[j] = t;
            // The w-terms of V are even in u, so the odd part is 2 b M u.
            let odd = (probe_v(&e) - probe_v(&(-&e))) * 0.5;
            m_new.set_column(j, &(odd / (2.0 * b_new * t)));
        }
        Self {
            w: w_new,
            m: m_new,
            center: c_new,
            scale: b_new,
            kappa: self.kappa,
        }
    }

    pub fn descriptor(&self) -> VectorFieldData {
        VectorFieldData {
            dim: self.dim(),
            w: self.w.iter().copied().collect(),
            m: (0..self.dim())
                .map(|i| self.m.row(i).iter().copied().collect())
                .collect(),
            center: self.center.iter().copied().collect(),
            scale: self.scale,
            kappa: self.kappa,
        }
    }

    pub fn from_descriptor(data: &VectorFieldData) -> Result<Self, FieldError> {
        let d = data.dim;
        if data.w.len() != d || data.center.len() != d || data.m.len() != d {
            return Err(FieldError::BadDescriptor(
                "vector field component lengths disagree with dim".into(),
            ));
        }
        for row in &data.m {
            if row.len() != d {
                return Err(FieldError::BadDescriptor("ragged matrix rows".into()));
            }
        }
        Ok(Self::new(
            RVector::from_vec(data.w.clone()),
            RMatrix::from_fn(d, d, |i, j| data.m[i][j]),
            RVector::from_vec(data.center.clone()),
            data.scale,
            data.kappa,
        ))
    }
}

/// Divergence of `|F|^p F` given the value and Jacobian of `F` at one point.
pub fn power_divergence_of(value: &RVector, jac: &RMatrix, p: f64) -> f64 {
    let norm = value.norm();
    let div = jac.trace();
    if p == 0.0 {
        return div;
    }
    let quad = value.dot(&(jac * value));
    norm.powf(p) * div + p * norm.powf(p - 2.0) * quad
}

/// Canonical centered equality field: `w = e1`, `M = Sigma`, `kappa = d`.
pub fn assemble_potential(
    w: RVector,
    m: RMatrix,
    center: RVector,
    scale: f64,
) -> VectorField {
    let d = w.len() as f64;
    VectorField::new(w, m, center, scale, d)
}

/// Serialization image of a vector field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorFieldData {
    pub dim: usize,
    pub w: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    pub scale: f64,
    pub kappa: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_sigma;

    fn canonical(d: usize) -> VectorField {
        let mut w = RVector::zeros(d);
        w[0] = 1.0;
        assemble_potential(w, make_sigma(d).unwrap(), RVector::zeros(d), 1.0)
    }

    fn shifted(d: usize) -> VectorField {
        let mut f = canonical(d);
        f.center = RVector::from_fn(d, |i, _| 0.3 - 0.2 * i as f64);
        f.scale = 1.4;
        f
    }

    #[test]
    fn modulus_law_holds_for_structure_fields() {
        for d in [3, 5, 7] {
            let f = shifted(d);
            let x: Vec<f64> = (0..d).map(|i| 0.4 * i as f64 - 0.7).collect();
            assert!((f.modulus(&x) - f.modulus_law(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn modulus_law_fails_without_structure() {
        let mut f = shifted(3);
        f.w *= 1.3;
        let x = [0.5, -0.2, 0.9];
        assert!((f.modulus(&x) - f.modulus_law(&x)).abs() > 1e-3);
        assert!(f.structure_residual() > 0.1);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = shifted(3);
        let x = [0.31, -0.44, 0.25];
        let jac = f.jacobian(&x);
        let h = 1e-5;
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let diff = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            for k in 0..3 {
                assert!((jac[(j, k)] - diff[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn divergence_matches_jacobian_trace() {
        let f = shifted(5);
        let x = [0.2, -0.4, 0.8, 0.1, -0.6];
        assert!((f.divergence(&x) - f.jacobian(&x).trace()).abs() < 1e-13);
    }

    #[test]
    fn transform_matches_pointwise_composition() {
        let f = shifted(3);
        let th: f64 = 0.7;
        let o = crate::clifford::plane_rotation(3, 0, 2, th);
        let shift = RVector::from_vec(vec![0.3, 1.0, -0.5]);
        let s0 = 2.2;
        let moved = f.transformed(&o, &shift, s0);
        let x = [0.8, -0.1, 0.4];
        let y = o.transpose() * (RVector::from_row_slice(&x) - &shift) / s0;
        let direct = (&o * f.value(y.as_slice())) / s0;
        assert!((moved.value(&x) - direct).norm() < 1e-12);
    }

    #[test]
    fn centered_inversion_flips_kernel_direction() {
        let mut f = canonical(3);
        f.scale = 1.7;
        let g = f.inverted();
        assert!((&g.w + &f.w).norm() < 1e-15);
        assert!((&g.m - &f.m).norm() < 1e-15);
        assert!((g.scale - 1.0 / 1.7).abs() < 1e-15);
    }

    #[test]
    fn inversion_parameters_reproduce_pullback_pointwise() {
        for d in [3, 5] {
            let f = shifted(d);
            let g = f.inverted();
            assert!(g.structure_residual() < 1e-12);
            for step in 0..4 {
                let x: Vec<f64> = (0..d)
                    .map(|i| 0.3 + 0.17 * (i as f64 + 1.0) * (step as f64 - 1.5))
                    .collect();
                let lhs = g.value(&x);
                let rhs = f.inversion_pullback(&x);
                assert!((lhs - rhs).norm() < 1e-11, "d={d} step={step}");
            }
        }
    }

    #[test]
    fn descriptor_round_trip_is_exact() {
        let f = shifted(5);
        let json = serde_json::to_string(&f.descriptor()).unwrap();
        let back =
            VectorField::from_descriptor(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.w, f.w);
        assert_eq!(back.m, f.m);
        assert_eq!(back.center, f.center);
        assert_eq!(back.scale, f.scale);
        assert_eq!(back.kappa, f.kappa);
    }
}
