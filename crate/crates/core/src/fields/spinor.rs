//! Spinor fields built from envelope-affine terms.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::clifford::GammaSet;
use crate::{CMatrix, CVector, RVector};

/// One closed-form term `coeff * env^power * (lo + gamma.u hi)` where
/// `env = b^2/(b^2+|x-c|^2)` and `u = (x-c)/b`.
#[derive(Debug, Clone)]
pub struct SpinorTerm {
    pub power: f64,
    pub scale: f64,
    pub center: RVector,
    pub coeff: Complex64,
    pub lo: CVector,
    pub hi: CVector,
}

impl SpinorTerm {
    /// Squared distance from `x` to the term center.
    fn dist_sq(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.center.iter())
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum()
    }
}

/// Per-term images `gamma_k lo` and `gamma_k hi`, fixed once the term is.
#[derive(Debug, Clone)]
struct TermCache {
    glo: Vec<CVector>,
    ghi: Vec<CVector>,
}

/// A finite sum of envelope-affine terms over a shared gamma set.
#[derive(Debug, Clone)]
pub struct SpinorField {
    gammas: Arc<GammaSet>,
    terms: Vec<SpinorTerm>,
    cache: Vec<TermCache>,
}

impl SpinorField {
    pub fn new(gammas: Arc<GammaSet>, terms: Vec<SpinorTerm>) -> Result<Self, FieldError> {
        let d = gammas.dim();
        let n = gammas.spinor_dim();
        for t in &terms {
            if t.center.len() != d {
                return Err(FieldError::DimensionMismatch {
                    field: t.center.len(),
                    gammas: d,
                });
            }
            if t.lo.len() != n || t.hi.len() != n {
                return Err(FieldError::DimensionMismatch {
                    field: t.lo.len().max(t.hi.len()),
                    gammas: n,
                });
            }
        }
        let cache = terms
            .iter()
            .map(|t| TermCache {
                glo: (0..d).map(|k| gammas.gamma(k) * &t.lo).collect(),
                ghi: (0..d).map(|k| gammas.gamma(k) * &t.hi).collect(),
            })
            .collect();
        Ok(Self {
            gammas,
            terms,
            cache,
        })
    }

    pub fn gammas(&self) -> &Arc<GammaSet> {
        &self.gammas
    }

    pub fn dim(&self) -> usize {
        self.gammas.dim()
    }

    pub fn spinor_dim(&self) -> usize {
        self.gammas.spinor_dim()
    }

    pub fn terms(&self) -> &[SpinorTerm] {
        &self.terms
    }

    /// Evaluates the field and, when `partials` is nonempty, all first
    /// derivatives into caller-owned buffers. `partials` must have length
    /// 0 or d; every buffer must have the spinor dimension.
    pub fn eval_into(&self, x: &[f64], value: &mut CVector, partials: &mut [CVector]) {
        let d = self.dim();
        assert_eq!(x.len(), d, "point dimension mismatch");
        assert!(partials.is_empty() || partials.len() == d);
        value.fill(Complex64::ZERO);
        for p in partials.iter_mut() {
            p.fill(Complex64::ZERO);
        }
        for (t, cache) in self.terms.iter().zip(&self.cache) {
            let b = t.scale;
            let r2 = t.dist_sq(x);
            let den = b * b + r2;
            let env = (b * b / den).powf(t.power);
            let ce = t.coeff * env;

            // affine part lo + sum_k u_k gamma_k hi, reused by every partial
            let mut s = t.lo.clone();
            for k in 0..d {
                let u_k = (x[k] - t.center[k]) / b;
                if u_k != 0.0 {
                    s.axpy(Complex64::new(u_k, 0.0), &cache.ghi[k], Complex64::ONE);
                }
            }
            value.axpy(ce, &s, Complex64::ONE);

            if !partials.is_empty() {
                let slope = -2.0 * t.power * b / den;
                for j in 0..d {
                    let u_j = (x[j] - t.center[j]) / b;
                    partials[j].axpy(ce * (slope * u_j), &s, Complex64::ONE);
                    partials[j].axpy(ce / b, &cache.ghi[j], Complex64::ONE);
                }
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> CVector {
        let mut v = CVector::zeros(self.spinor_dim());
        self.eval_into(x, &mut v, &mut []);
        v
    }

    pub fn partials(&self, x: &[f64]) -> Vec<CVector> {
        let n = self.spinor_dim();
        let mut v = CVector::zeros(n);
        let mut parts = vec![CVector::zeros(n); self.dim()];
        self.eval_into(x, &mut v, &mut parts);
        parts
    }

    pub fn modulus_sq(&self, x: &[f64]) -> f64 {
        self.value(x).norm_squared()
    }

    /// Applies `gamma.(-i grad)` pointwise through the per-term closed form.
    pub fn dirac_value(&self, x: &[f64]) -> CVector {
        let d = self.dim() as f64;
        let mut out = CVector::zeros(self.spinor_dim());
        for (t, cache) in self.terms.iter().zip(&self.cache) {
            let b = t.scale;
            let a = t.power;
            let r2 = t.dist_sq(x);
            let f = b * b / (b * b + r2);
            let env = f.powf(a);
            // gamma.(-i grad) term = env^a (-i(d-2a)/b) hi
            //                      + env^(a+1) (2ia/b) (gamma.u lo - hi)
            let c_a = t.coeff * Complex64::new(0.0, -(d - 2.0 * a) / b) * env;
            out.axpy(c_a, &t.hi, Complex64::ONE);
            if a != 0.0 {
                let c_b = t.coeff * Complex64::new(0.0, 2.0 * a / b) * env * f;
                out.axpy(-c_b, &t.hi, Complex64::ONE);
                for k in 0..self.dim() {
                    let u_k = (x[k] - t.center[k]) / b;
                    if u_k != 0.0 {
                        out.axpy(c_b * u_k, &cache.glo[k], Complex64::ONE);
                    }
                }
            }
        }
        out
    }

    /// Returns `gamma.(-i grad)` of the field as a field in the same algebra.
    /// Each term maps to at most two: the envelope power stays or rises by one.
    pub fn dirac_field(&self) -> Self {
        let d = self.dim() as f64;
        let mut out = Vec::new();
        for t in &self.terms {
            let a = t.power;
            let b = t.scale;
            if d - 2.0 * a != 0.0 {
                out.push(SpinorTerm {
                    power: a,
                    scale: b,
                    center: t.center.clone(),
                    coeff: t.coeff * Complex64::new(0.0, -(d - 2.0 * a) / b),
                    lo: t.hi.clone(),
                    hi: CVector::zeros(t.hi.len()),
                });
            }
            if a != 0.0 {
                out.push(SpinorTerm {
                    power: a + 1.0,
                    scale: b,
                    center: t.center.clone(),
                    coeff: t.coeff * Complex64::new(0.0, 2.0 * a / b),
                    lo: -&t.hi,
                    hi: t.lo.clone(),
                });
            }
        }
        Self::new(Arc::clone(&self.gammas), out).expect("derived terms keep dimensions")
    }

    /// Pushes the field through `x -> amplitude * u psi(O^T (x-shift)/scale)`.
    /// `u` must intertwine as `u (gamma.v) u* = gamma.(O v)`; under this
    /// crate's lift convention that is `spin_lift(o).u.adjoint()`.
    pub fn transformed(
        &self,
        o: &crate::RMatrix,
        u: &CMatrix,
        shift: &RVector,
        scale: f64,
        amplitude: Complex64,
    ) -> Result<Self, FieldError> {
        let d = self.dim();
        if o.nrows() != d || shift.len() != d {
            return Err(FieldError::DimensionMismatch {
                field: o.nrows().max(shift.len()),
                gammas: d,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| SpinorTerm {
                power: t.power,
                scale: scale * t.scale,
                center: shift + scale * (o * &t.center),
                coeff: amplitude * t.coeff,
                lo: u * &t.lo,
                hi: u * &t.hi,
            })
            .collect();
        Self::new(Arc::clone(&self.gammas), terms)
    }

    /// Kelvin-type inversion `x -> |x|^-d gamma.x psi(x/|x|^2)`, exact inside
    /// the algebra whenever every envelope power equals d/2.
    pub fn inverted(&self) -> Result<Self, FieldError> {
        let d = self.dim();
        let half = d as f64 / 2.0;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if (t.power - half).abs() > 1e-12 {
                    return Err(FieldError::NotInvertible(t.power));
                }
                let b = t.scale;
                let rho = b * b + t.center.norm_squared();
                let c_new = &t.center / rho;
                let b_new = b / rho;
                // m = lo - gamma.c hi / b, then lo' = hi/b + gamma.c~ m
                let mut m = t.lo.clone();
                m.axpy(
                    Complex64::new(-1.0 / b, 0.0),
                    &self.gammas.dot_apply(t.center.as_slice(), &t.hi),
                    Complex64::ONE,
                );
                let mut lo = self.gammas.dot_apply(c_new.as_slice(), &m);
                lo.axpy(Complex64::new(1.0 / b, 0.0), &t.hi, Complex64::ONE);
                let hi = &m * Complex64::new(b_new, 0.0);
                Ok(SpinorTerm {
                    power: t.power,
                    scale: b_new,
                    center: c_new,
                    coeff: t.coeff * rho.powf(half),
                    lo,
                    hi,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(Arc::clone(&self.gammas), terms)
    }

    pub fn descriptor(&self) -> SpinorFieldData {
        SpinorFieldData {
            dim: self.dim(),
            terms: self
                .terms
                .iter()
                .map(|t| SpinorTermData {
                    power: t.power,
                    scale: t.scale,
                    center: t.center.iter().copied().collect(),
                    coeff: (t.coeff.re, t.coeff.im),
                    lo: t.lo.iter().map(|z| (z.re, z.im)).collect(),
                    hi: t.hi.iter().map(|z| (z.re, z.im)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_descriptor(
        gammas: Arc<GammaSet>,
        data: &SpinorFieldData,
    ) -> Result<Self, FieldError> {
        if data.dim != gammas.dim() {
            return Err(FieldError::DimensionMismatch {
                field: data.dim,
                gammas: gammas.dim(),
            });
        }
        let to_c = |p: &(f64, f64)| Complex64::new(p.0, p.1);
        let terms = data
            .terms
            .iter()
            .map(|t| SpinorTerm {
                power: t.power,
                scale: t.scale,
                center: RVector::from_vec(t.center.clone()),
                coeff: to_c(&t.coeff),
                lo: CVector::from_iterator(t.lo.len(), t.lo.iter().map(to_c)),
                hi: CVector::from_iterator(t.hi.len(), t.hi.iter().map(to_c)),
            })
            .collect();
        Self::new(gammas, terms)
    }
}

/// First-order polynomial field `phi0 + gamma.x phi1`, the kernel shape of
/// the overdetermined gradient part.
pub fn twistor(
    gammas: Arc<GammaSet>,
    phi0: &CVector,
    phi1: &CVector,
) -> Result<SpinorField, FieldError> {
    let d = gammas.dim();
    SpinorField::new(
        Arc::clone(&gammas),
        vec![SpinorTerm {
            power: 0.0,
            scale: 1.0,
            center: RVector::zeros(d),
            coeff: Complex64::ONE,
            lo: phi0.clone(),
            hi: phi1.clone(),
        }],
    )
}

/// Serialization image of a spinor field; f64 components survive a JSON
/// round trip bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinorFieldData {
    pub dim: usize,
    pub terms: Vec<SpinorTermData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinorTermData {
    pub power: f64,
    pub scale: f64,
    pub center: Vec<f64>,
    pub coeff: (f64, f64),
    pub lo: Vec<(f64, f64)>,
    pub hi: Vec<(f64, f64)>,
}
