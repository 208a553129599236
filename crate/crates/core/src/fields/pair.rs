//! Zero-mode pairs: a spinor field and the vector potential it solves.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::GaugePhaseData;
use super::spinor::SpinorFieldData;
use super::vector::VectorFieldData;
use super::{assemble_potential, make_sigma};
use super::{FieldError, GaugePhase, SpinorField, SpinorTerm, VectorField};
use crate::clifford::{spin_lift, vacuum_spinor, CliffordError, GammaSet};
use crate::{CVector, RMatrix, RVector};

/// A candidate solution of `gamma.(-i grad - A) psi = 0`.
///
/// The spinor and potential are stored bare; an optional gauge phase turns
/// them into the effective pair `(e^{i phi} psi, A + grad phi)` on evaluation.
#[derive(Debug, Clone)]
pub struct ZeroModePair {
    psi: SpinorField,
    a: VectorField,
    phase: Option<GaugePhase>,
}

/// Modulus-law parameters when the spinor side is a single admissible term:
/// `|psi(x)|^2 = amp_sq * (scale^2/(scale^2+|x-center|^2))^(d-1)`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub amp_sq: f64,
    pub scale: f64,
    pub center: RVector,
}

impl ZeroModePair {
    /// The centered extremizer: vacuum spinor dressed by `1 + i s gamma.x`
    /// against the canonical potential `w = e1`, `M = Sigma`, `kappa = d`.
    pub fn extremal(gammas: Arc<GammaSet>) -> Result<Self, FieldError> {
        let d = gammas.dim();
        let vac = vacuum_spinor(&gammas).map_err(|_| FieldError::EvenDimension(d))?;
        let s = vac.sign;
        let hi = &vac.psi0 * Complex64::new(0.0, s);
        let psi = SpinorField::new(
            Arc::clone(&gammas),
            vec![SpinorTerm {
                power: d as f64 / 2.0,
                scale: 1.0,
                center: RVector::zeros(d),
                coeff: Complex64::ONE,
                lo: vac.psi0.clone(),
                hi,
            }],
        )?;
        let mut w = RVector::zeros(d);
        w[0] = 1.0;
        let a = assemble_potential(w, make_sigma(d)?, RVector::zeros(d), 1.0);
        Ok(Self {
            psi,
            a,
            phase: None,
        })
    }

    pub fn from_parts(
        psi: SpinorField,
        a: VectorField,
        phase: Option<GaugePhase>,
    ) -> Result<Self, FieldError> {
        if psi.dim() != a.dim() {
            return Err(FieldError::DimensionMismatch {
                field: a.dim(),
                gammas: psi.dim(),
            });
        }
        Ok(Self { psi, a, phase })
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn gammas(&self) -> &Arc<GammaSet> {
        self.psi.gammas()
    }

    pub fn spinor(&self) -> &SpinorField {
        &self.psi
    }

    pub fn potential(&self) -> &VectorField {
        &self.a
    }

    pub fn phase(&self) -> Option<&GaugePhase> {
        self.phase.as_ref()
    }

    /// Effective spinor value and partials, phase factor included.
    pub fn psi_eval_into(&self, x: &[f64], value: &mut CVector, partials: &mut [CVector]) {
        self.psi.eval_into(x, value, partials);
        if let Some(phase) = &self.phase {
            let rot = Complex64::from_polar(1.0, phase.value(x));
            if !partials.is_empty() {
                let grad = phase.gradient(x);
                for (j, p) in partials.iter_mut().enumerate() {
                    *p *= rot;
                    p.axpy(rot * Complex64::new(0.0, grad[j]), value, Complex64::ONE);
                }
            }
            *value *= rot;
        }
    }

    pub fn psi_value(&self, x: &[f64]) -> CVector {
        let mut v = CVector::zeros(self.psi.spinor_dim());
        self.psi_eval_into(x, &mut v, &mut []);
        v
    }

    pub fn psi_partials(&self, x: &[f64]) -> Vec<CVector> {
        let n = self.psi.spinor_dim();
        let mut v = CVector::zeros(n);
        let mut parts = vec![CVector::zeros(n); self.dim()];
        self.psi_eval_into(x, &mut v, &mut parts);
        parts
    }

    /// `gamma.(-i grad)` of the effective spinor.
    pub fn psi_dirac(&self, x: &[f64]) -> CVector {
        let bare = self.psi.dirac_value(x);
        match &self.phase {
            None => bare,
            Some(phase) => {
                let rot = Complex64::from_polar(1.0, phase.value(x));
                let grad = phase.gradient(x);
                let mut out = bare;
                out.axpy(
                    Complex64::ONE,
                    &self
                        .gammas()
                        .dot_apply(grad.as_slice(), &self.psi.value(x)),
                    Complex64::ONE,
                );
                out * rot
            }
        }
    }

    /// Effective potential `A + grad phi`.
    pub fn a_value(&self, x: &[f64]) -> RVector {
        let mut v = self.a.value(x);
        if let Some(phase) = &self.phase {
            v += phase.gradient(x);
        }
        v
    }

    /// `|gamma.(-i grad) psi - gamma.A psi|` at a point.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let lhs = self.psi_dirac(x);
        let a = self.a_value(x);
        let rhs = self.gammas().dot_apply(a.as_slice(), &self.psi_value(x));
        (lhs - rhs).norm()
    }

    /// Residual divided by the size of the terms it cancels.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let lhs = self.psi_dirac(x);
        let a = self.a_value(x);
        let rhs = self.gammas().dot_apply(a.as_slice(), &self.psi_value(x));
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        (lhs - rhs).norm() / scale
    }

    /// Moves the pair by a rotation (through its spin lift), shift, scale
    /// and overall spinor amplitude. Zero modes stay zero modes.
    ///
    /// The lift convention transports gamma matrices by `U* gamma_j U =
    /// sum_k gamma_k O_kj`, so the spinor side must conjugate with `U*` for
    /// its data to move with `O` like the potential parameters do.
    pub fn transformed(
        &self,
        o: &RMatrix,
        shift: &RVector,
        scale: f64,
        amplitude: Complex64,
    ) -> Result<Self, CliffordError> {
        let lift = spin_lift(self.gammas(), o)?;
        let psi = self
            .psi
            .transformed(o, &lift.u.adjoint(), shift, scale, amplitude)
            .expect("transform keeps dimensions");
        let a = self.a.transformed(o, shift, scale);
        let phase = self.phase.as_ref().map(|p| p.transformed(o, shift, scale));
        Ok(Self { psi, a, phase })
    }

    /// Conformal image under inversion; exact inside the family.
    pub fn inverted(&self) -> Result<Self, FieldError> {
        if self.phase.is_some() {
            return Err(FieldError::PhaseNotInvertible);
        }
        Ok(Self {
            psi: self.psi.inverted()?,
            a: self.a.inverted(),
            phase: None,
        })
    }

    /// Adds a gauge phase; the effective pair changes by `e^{i phi}` and
    /// `grad phi` while the residual is preserved identically.
    pub fn gauged(&self, extra: &GaugePhase) -> Self {
        let phase = match &self.phase {
            None => extra.clone(),
            Some(p) => p.compose(extra),
        };
        Self {
            psi: self.psi.clone(),
            a: self.a.clone(),
            phase: Some(phase),
        }
    }

    /// Closed-form modulus parameters, available when the spinor is one
    /// admissible term of envelope power d/2.
    pub fn radial_profile(&self) -> Option<RadialProfile> {
        let terms = self.psi.terms();
        if terms.len() != 1 {
            return None;
        }
        let t = &terms[0];
        let d = self.dim() as f64;
        if (t.power - d / 2.0).abs() > 1e-12 {
            return None;
        }
        let g = self.gammas();
        let norm_gap = (t.lo.norm() - t.hi.norm()).abs();
        let mut cross: f64 = 0.0;
        for k in 0..self.dim() {
            cross = cross.max(t.lo.dotc(&(g.gamma(k) * &t.hi)).re.abs());
        }
        let size = t.lo.norm().max(1e-300);
        if norm_gap / size > 1e-12 || cross / (size * size) > 1e-12 {
            return None;
        }
        Some(RadialProfile {
            amp_sq: t.coeff.norm_sqr() * t.lo.norm_squared(),
            scale: t.scale,
            center: t.center.clone(),
        })
    }

    pub fn descriptor(&self) -> PairData {
        PairData {
            psi: self.psi.descriptor(),
            a: self.a.descriptor(),
            phase: self.phase.as_ref().map(|p| p.descriptor()),
        }
    }

    pub fn from_descriptor(gammas: Arc<GammaSet>, data: &PairData) -> Result<Self, FieldError> {
        let psi = SpinorField::from_descriptor(gammas, &data.psi)?;
        let a = VectorField::from_descriptor(&data.a)?;
        let phase = data
            .phase
            .as_ref()
            .map(GaugePhase::from_descriptor)
            .transpose()?;
        Self::from_parts(psi, a, phase)
    }
}

/// Serialization image of a pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairData {
    pub psi: SpinorFieldData,
    pub a: VectorFieldData,
    pub phase: Option<GaugePhaseData>,
}

/// The scalar-potential companion family: `psi = env^{d/2}(1 + i s gamma.x) phi0`
/// solves `gamma.(-i grad) psi = lambda psi` with `lambda = s d / (1+|x|^2)`,
/// for any nonzero `phi0` and any dimension, even ones included.
#[derive(Debug, Clone)]
pub struct ScalarZeroMode {
    psi: SpinorField,
    amp: f64,
}

impl ScalarZeroMode {
    pub fn spinor(&self) -> &SpinorField {
        &self.psi
    }

    pub fn lambda(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.amp / (1.0 + r2)
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        let lhs = self.psi.dirac_value(x);
        let rhs = self.psi.value(x) * Complex64::new(self.lambda(x), 0.0);
        (lhs - rhs).norm()
    }

    /// `|psi(x)|^2 = (1+|x|^2)^{1-d}` for unit data, any starting spinor.
    pub fn modulus_law(&self, x: &[f64]) -> f64 {
        let d = self.psi.dim() as f64;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 + r2).powf(1.0 - d)
    }
}

/// Builds the scalar companion pair from arbitrary nonzero initial data.
pub fn scalar_pair(
    gammas: Arc<GammaSet>,
    phi0: &CVector,
    sign: f64,
) -> Result<ScalarZeroMode, FieldError> {
    assert!(sign == 1.0 || sign == -1.0, "sign must be +1 or -1");
    let d = gammas.dim();
    let norm = phi0.norm();
    if norm == 0.0 {
        return Err(FieldError::ZeroSpinor);
    }
    let unit = phi0 / Complex64::new(norm, 0.0);
    let hi = &unit * Complex64::new(0.0, sign);
    let psi = SpinorField::new(
        Arc::clone(&gammas),
        vec![SpinorTerm {
            power: d as f64 / 2.0,
            scale: 1.0,
            center: RVector::zeros(d),
            coeff: Complex64::ONE,
            lo: unit,
            hi,
        }],
    )?;
    Ok(ScalarZeroMode {
        psi,
        amp: sign * d as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PhaseTerm;
    use crate::linalg::{random_rotation, random_unit_spinor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn points(d: usize) -> Vec<Vec<f64>> {
        (0..5)
            .map(|k| {
                (0..d)
                    .map(|j| 0.37 * (k as f64 - 2.0) + 0.21 * j as f64 - 0.4)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn extremal_is_a_zero_mode() {
        for d in [3, 5, 7] {
            let g = Arc::new(GammaSet::new(d).unwrap());
            let pair = ZeroModePair::extremal(g).unwrap();
            for x in points(d) {
                assert!(pair.relative_residual(&x) < 1e-14, "d={d}");
            }
        }
    }

    #[test]
    fn extremal_moduli_follow_the_closed_laws() {
        let g = Arc::new(GammaSet::new(5).unwrap());
        let pair = ZeroModePair::extremal(g).unwrap();
        let profile = pair.radial_profile().expect("extremal is admissible");
        for x in points(5) {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let law = profile.amp_sq * (1.0 + r2).powi(-4);
            assert!((pair.psi_value(&x).norm_squared() - law).abs() < 1e-12);
            let a_law = 5.0 / (1.0 + r2);
            assert!((pair.potential().modulus(&x) - a_law).abs() < 1e-12);
        }
    }

    #[test]
    fn transformed_extremal_stays_a_zero_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [3, 5] {
            let g = Arc::new(GammaSet::new(d).unwrap());
            let pair = ZeroModePair::extremal(g).unwrap();
            let o = random_rotation(d, &mut rng);
            let shift = RVector::from_fn(d, |i, _| 0.3 * i as f64 - 0.5);
            let moved = pair
                .transformed(&o, &shift, 1.9, Complex64::new(0.4, -1.1))
                .unwrap();
            for x in points(d) {
                assert!(moved.relative_residual(&x) < 1e-13, "d={d}");
            }
        }
    }

    #[test]
    fn gauge_phase_preserves_the_residual() {
        let g = Arc::new(GammaSet::new(3).unwrap());
        let pair = ZeroModePair::extremal(g).unwrap();
        let phase = GaugePhase::new(
            0.7,
            vec![PhaseTerm {
                coef: 1.3,
                v: RVector::from_vec(vec![0.5, -1.0, 0.2]),
                center: RVector::from_vec(vec![0.1, 0.4, -0.3]),
                scale: 0.9,
                m: 1,
            }],
        );
        let gauged = pair.gauged(&phase);
        for x in points(3) {
            assert!(gauged.relative_residual(&x) < 1e-13);
            let shift = gauged.a_value(&x) - pair.a_value(&x);
            assert!((shift - phase.gradient(&x)).norm() < 1e-14);
        }
    }

    #[test]
    fn inverted_extremal_stays_a_zero_mode() {
        for d in [3, 5] {
            let g = Arc::new(GammaSet::new(d).unwrap());
            let pair = ZeroModePair::extremal(g).unwrap();
            let inv = pair.inverted().unwrap();
            for x in points(d) {
                assert!(inv.relative_residual(&x) < 1e-13, "centered d={d}");
            }
            let shift = RVector::from_fn(d, |i, _| 0.4 - 0.15 * i as f64);
            let o = RMatrix::identity(d, d);
            let moved = pair
                .transformed(&o, &shift, 1.3, Complex64::ONE)
                .unwrap();
            let inv_moved = moved.inverted().unwrap();
            for x in points(d) {
                assert!(inv_moved.relative_residual(&x) < 1e-11, "shifted d={d}");
            }
        }
    }

    #[test]
    fn scalar_companion_solves_its_equation_in_any_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for d in [3, 4, 6] {
            let g = Arc::new(GammaSet::new(d).unwrap());
            let phi0 = random_unit_spinor(g.spinor_dim(), &mut rng);
            for sign in [1.0, -1.0] {
                let mode = scalar_pair(Arc::clone(&g), &phi0, sign).unwrap();
                for x in points(d) {
                    assert!(mode.residual(&x) < 1e-13, "d={d} sign={sign}");
                    let m = mode.spinor().modulus_sq(&x);
                    assert!((m - mode.modulus_law(&x)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn descriptor_round_trip_reproduces_values() {
        let g = Arc::new(GammaSet::new(3).unwrap());
        let pair = ZeroModePair::extremal(Arc::clone(&g))
            .unwrap()
            .gauged(&GaugePhase::new(0.3, vec![]));
        let json = serde_json::to_string(&pair.descriptor()).unwrap();
        let back =
            ZeroModePair::from_descriptor(g, &serde_json::from_str(&json).unwrap()).unwrap();
        for x in points(3) {
            assert!((back.psi_value(&x) - pair.psi_value(&x)).norm() < 1e-15);
            assert!((back.a_value(&x) - pair.a_value(&x)).norm() < 1e-15);
        }
    }
}
