//! Algebra connecting admissible spinor data to the potential parameters.

use nalgebra::SVD;

use super::FieldError;
use crate::clifford::GammaSet;
use crate::{CVector, RMatrix, RVector};

/// The canonical skew matrix: zero first row and column, then 2x2 blocks
/// `[[0, -1], [1, 0]]` down the diagonal. Only odd dimensions admit it.
pub fn make_sigma(d: usize) -> Result<RMatrix, FieldError> {
    if d % 2 == 0 {
        return Err(FieldError::EvenDimension(d));
    }
    let mut s = RMatrix::zeros(d, d);
    for alpha in 0..(d - 1) / 2 {
        let i = 2 * alpha + 1;
        s[(i, i + 1)] = -1.0;
        s[(i + 1, i)] = 1.0;
    }
    Ok(s)
}

/// Numerical rank via singular values; skew matrices always report even rank.
pub fn skew_rank(m: &RMatrix, rel_tol: f64) -> usize {
    let svd = SVD::new(m.clone(), false, false);
    let top = svd.singular_values.max();
    if top == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Componentwise distances from the structure equations
/// `|w| = 1`, `M w = 0`, `M^T M + w w^T = I`, `M^T = -M`.
#[derive(Debug, Clone, Copy)]
pub struct StructureReport {
    pub unit: f64,
    pub kernel: f64,
    pub gram: f64,
    pub skew: f64,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        self.unit.max(self.kernel).max(self.gram).max(self.skew)
    }
}

pub fn structure_report(w: &RVector, m: &RMatrix) -> StructureReport {
    let d = w.len();
    StructureReport {
        unit: (w.norm() - 1.0).abs(),
        kernel: (m * w).norm(),
        gram: (m.transpose() * m + w * w.transpose() - RMatrix::identity(d, d)).norm(),
        skew: (m + m.transpose()).norm(),
    }
}

/// Potential parameters and consistency residuals read off spinor data
/// `(phi0, phi1)`.
#[derive(Debug, Clone)]
pub struct EqualityData {
    pub w: RVector,
    pub m: RMatrix,
    /// Distance from unit norms and the orthogonality conditions
    /// `Re <phi0, gamma_j phi1> = 0`.
    pub admissible: f64,
    /// Residuals of the pointwise zero-mode equation split by homogeneity
    /// degree in x; all four vanish exactly on equality data.
    pub homogeneity: [f64; 4],
}

impl EqualityData {
    pub fn structure(&self) -> StructureReport {
        structure_report(&self.w, &self.m)
    }
}

/// Computes `w_j = Im <phi0, gamma_j phi1>` and
/// `M_jk = -(Im <phi0, gamma_j gamma_k phi0> + Im <phi1, gamma_j gamma_k phi1>)/2`
/// together with the residuals that certify or refute the equality case.
pub fn equality_data(g: &GammaSet, phi0: &CVector, phi1: &CVector) -> EqualityData {
    let d = g.dim();
    let g1 = |j: usize, v: &CVector| g.gamma(j) * v;
    let mut w = RVector::zeros(d);
    let mut admissible = (phi0.norm() - 1.0).abs().max((phi1.norm() - 1.0).abs());
    for j in 0..d {
        let gj1 = g1(j, phi1);
        let ip = phi0.dotc(&gj1);
        w[j] = ip.im;
        admissible = admissible.max(ip.re.abs());
    }
    let mut m = RMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let gk0 = g1(k, phi0);
            let gk1 = g1(k, phi1);
            let a = phi0.dotc(&g1(j, &gk0)).im;
            let b = phi1.dotc(&g1(j, &gk1)).im;
            m[(j, k)] = -0.5 * (a + b);
        }
    }

    let dot = |v: &RVector, s: &CVector| g.dot_apply(v.as_slice(), s);
    let c = |re: f64, im: f64| crate::Complex64::new(re, im);
    // degree 0: -i phi1 = gamma.w phi0
    let h0 = (phi1 * c(0.0, -1.0) - dot(&w, phi0)).norm();
    // degree 1: i gamma_k phi0 = gamma.w gamma_k phi1 + 2 gamma.(M e_k) phi0
    let mut h1: f64 = 0.0;
    for k in 0..d {
        let lhs = g1(k, phi0) * c(0.0, 1.0);
        let mk: RVector = m.column(k).into();
        let rhs = dot(&w, &g1(k, phi1)) + dot(&mk, phi0) * c(2.0, 0.0);
        h1 = h1.max((lhs - rhs).norm());
    }
    // degree 2: -i r^2 phi1 = -r^2 gamma.w phi0 + 2 (w.x) gamma.x phi0
    //           + 2 gamma.(M x) gamma.x phi1, checked on a spanning set
    let mut h2: f64 = 0.0;
    let mut probe = |x: RVector| {
        let r2 = x.norm_squared();
        let lhs = phi1 * c(0.0, -r2);
        let mx: RVector = &m * &x;
        let rhs = dot(&w, phi0) * c(-r2, 0.0)
            + dot(&x, phi0) * c(2.0 * w.dot(&x), 0.0)
            + dot(&mx, &dot(&x, phi1)) * c(2.0, 0.0);
        h2 = h2.max((lhs - rhs).norm());
    };
    for j in 0..d {
        let mut e = RVector::zeros(d);
        e[j] = 1.0;
        for k in (j + 1)..d {
            let mut e2 = RVector::zeros(d);
            e2[j] = 1.0;
            e2[k] = 1.0;
            probe(e2);
        }
        probe(e);
    }
    // degree 3 collapses to: i phi0 = gamma.w phi1
    let h3 = (phi0 * c(0.0, 1.0) - dot(&w, phi1)).norm();

    EqualityData {
        w,
        m,
        admissible,
        homogeneity: [h0, h1, h2, h3],
    }
}

/// Orthogonal change of frame aligning `(w, M)` with `(e1, Sigma)`.
#[derive(Debug, Clone)]
pub struct SkewReduction {
    /// Orthogonal with `O e1 = w` and `O Sigma O^T = M`.
    pub o: RMatrix,
    /// True when `det O = -1`: the pair sits in the inversion image of the
    /// canonical orbit rather than the rotation orbit.
    pub twisted: bool,
    /// How far the constructed frame misses `O Sigma O^T = M` and `O e1 = w`.
    pub residual: f64,
}

/// Builds the reduction frame column by column: first `w`, then orthonormal
/// pairs `(u, M u)`, which works because `M^2 = w w^T - I` on the complement
/// of `w`. The orientation `det O` is pinned by `(w, M)` itself: flipping a
/// pair `(u, M u) -> (-u, -M u)` flips two columns at once.
pub fn reduce_skew_to_sigma(w: &RVector, m: &RMatrix) -> Result<SkewReduction, FieldError> {
    let d = w.len();
    if d % 2 == 0 {
        return Err(FieldError::EvenDimension(d));
    }
    let report = structure_report(w, m);
    if report.max() > 1e-8 {
        return Err(FieldError::BadDescriptor(format!(
            "structure equations violated by {:.3e}, no reduction exists",
            report.max()
        )));
    }
    let mut cols: Vec<RVector> = vec![w / w.norm()];
    for _ in 0..(d - 1) / 2 {
        let mut best: Option<RVector> = None;
        let mut best_norm = -1.0;
        for k in 0..d {
            let mut v = RVector::zeros(d);
            v[k] = 1.0;
            for c in &cols {
                let proj = c.dot(&v);
                v.axpy(-proj, c, 1.0);
            }
            let n = v.norm();
            if n > best_norm {
                best_norm = n;
                best = Some(v);
            }
        }
        let u = best.expect("dimension positive") / best_norm;
        let mu = m * &u;
        let mun = mu.norm();
        cols.push(u);
        cols.push(mu / mun);
    }
    let mut o = RMatrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        o.set_column(j, c);
    }
    let twisted = o.determinant() < 0.0;
    let sigma = make_sigma(d)?;
    let residual = (&o * sigma * o.transpose() - m)
        .norm()
        .max((o.column(0) - w).norm());
    Ok(SkewReduction {
        o,
        twisted,
        residual,
    })
}
