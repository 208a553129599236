//! Real gauge phases with exact gradients.

use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::{RMatrix, RVector};

/// One phase contribution `coef * v.(x-c) / (b^2 + |x-c|^2)^m`.
///
/// `m = 0` gives a plain linear phase; higher powers decay and stay closed
/// under the affine symmetries used elsewhere.
#[derive(Debug, Clone)]
pub struct PhaseTerm {
    pub coef: f64,
    pub v: RVector,
    pub center: RVector,
    pub scale: f64,
    pub m: u32,
}

/// A finite sum of rational phase terms plus a constant.
#[derive(Debug, Clone, Default)]
pub struct GaugePhase {
    pub constant: f64,
    pub terms: Vec<PhaseTerm>,
}

impl GaugePhase {
    pub fn new(constant: f64, terms: Vec<PhaseTerm>) -> Self {
        Self { constant, terms }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut total = self.constant;
        for t in &self.terms {
            let u = RVector::from_row_slice(x) - &t.center;
            let den = t.scale * t.scale + u.norm_squared();
            total += t.coef * t.v.dot(&u) / den.powi(t.m as i32);
        }
        total
    }

    pub fn gradient(&self, x: &[f64]) -> RVector {
        let d = x.len();
        let mut g = RVector::zeros(d);
        for t in &self.terms {
            let u = RVector::from_row_slice(x) - &t.center;
            let den = t.scale * t.scale + u.norm_squared();
            let pw = den.powi(t.m as i32);
            g.axpy(t.coef / pw, &t.v, 1.0);
            if t.m > 0 {
                let vu = t.v.dot(&u);
                g.axpy(-2.0 * t.m as f64 * t.coef * vu / (pw * den), &u, 1.0);
            }
        }
        g
    }

    /// Pullback under `x -> shift + scale0 O x`, staying inside the family.
    pub fn transformed(&self, o: &RMatrix, shift: &RVector, scale0: f64) -> Self {
        Self {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|t| PhaseTerm {
                    coef: t.coef * scale0.powi(2 * t.m as i32 - 1),
                    v: o * &t.v,
                    center: shift + scale0 * (o * &t.center),
                    scale: scale0 * t.scale,
                    m: t.m,
                })
                .collect(),
        }
    }

    /// Pointwise sum of two phases.
    pub fn compose(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self {
            constant: self.constant + other.constant,
            terms,
        }
    }

    pub fn descriptor(&self) -> GaugePhaseData {
        GaugePhaseData {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|t| PhaseTermData {
                    coef: t.coef,
                    v: t.v.iter().copied().collect(),
                    center: t.center.iter().copied().collect(),
                    scale: t.scale,
                    m: t.m,
                })
                .collect(),
        }
    }

    pub fn from_descriptor(data: &GaugePhaseData) -> Result<Self, FieldError> {
        let terms = data
            .terms
            .iter()
            .map(|t| {
                if t.v.len() != t.center.len() {
                    return Err(FieldError::BadDescriptor(
                        "phase term direction and center lengths disagree".into(),
                    ));
                }
                Ok(PhaseTerm {
                    coef: t.coef,
                    v: RVector::from_vec(t.v.clone()),
                    center: RVector::from_vec(t.center.clone()),
                    scale: t.scale,
                    m: t.m,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            constant: data.constant,
            terms,
        })
    }
}

/// Serialization image of a gauge phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugePhaseData {
    pub constant: f64,
    pub terms: Vec<PhaseTermData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseTermData {
    pub coef: f64,
    pub v: Vec<f64>,
    pub center: Vec<f64>,
    pub scale: f64,
    pub m: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_phase() -> GaugePhase {
        GaugePhase::new(
            0.4,
            vec![
                PhaseTerm {
                    coef: 0.9,
                    v: RVector::from_vec(vec![1.0, -0.5, 0.3]),
                    center: RVector::from_vec(vec![0.2, 0.0, -0.4]),
                    scale: 1.1,
                    m: 1,
                },
                PhaseTerm {
                    coef: -0.3,
                    v: RVector::from_vec(vec![0.0, 1.0, 0.7]),
                    center: RVector::zeros(3),
                    scale: 0.8,
                    m: 2,
                },
            ],
        )
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = sample_phase();
        let x = [0.5, -0.3, 0.8];
        let g = p.gradient(&x);
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            assert!((g[j] - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn transform_matches_pointwise_composition() {
        let p = sample_phase();
        let o = crate::clifford::plane_rotation(3, 1, 2, -0.9);
        let shift = RVector::from_vec(vec![0.1, 0.6, -0.2]);
        let s0 = 1.8;
        let moved = p.transformed(&o, &shift, s0);
        for x in [[0.3, -0.6, 0.9], [1.2, 0.4, -0.8]] {
            let y = o.transpose() * (RVector::from_row_slice(&x) - &shift) / s0;
            assert!((moved.value(&x) - p.value(y.as_slice())).abs() < 1e-13);
        }
    }

    #[test]
    fn compose_adds_pointwise() {
        let p = sample_phase();
        let q = GaugePhase::new(-1.2, vec![]);
        let both = p.compose(&q);
        let x = [0.2, 0.1, -0.5];
        assert!((both.value(&x) - p.value(&x) - q.value(&x)).abs() < 1e-15);
    }
}
