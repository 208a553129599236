//! Small dense linear-algebra helpers shared across modules.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, CVector, RMatrix};

/// Right null vectors of `a`, i.e. an orthonormal basis of `{ v : a v = 0 }`.
///
/// Singular values at or below `rel_tol` times the largest singular value
/// count as zero. Returns the basis vectors in descending singular-value
/// order of the directions they replace (so the "most null" vector is last).
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let svd = a.clone().svd(false, true);
    let v_t = svd
        .v_t
        .expect("svd requested right singular vectors");
    let sigma_max = svd.singular_values.max();
    let cutoff = rel_tol * sigma_max.max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            basis.push(v_t.row(i).adjoint());
        }
    }
    // Columns of V beyond the rank of a wide-or-square factorization also
    // span the kernel but carry no singular value entry; nalgebra's thin SVD
    // of an m x n matrix returns min(m, n) singular values, which covers all
    // our stacked (tall) systems.
    basis
}

/// Max-entry magnitude of the difference `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Haar-ish random rotation: QR of a Gaussian matrix with the determinant
/// fixed to +1 by flipping the last column if needed.
pub fn random_rotation<R: Rng>(d: usize, rng: &mut R) -> RMatrix {
    let g = RMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign convention of the factorization so Q is Haar distributed.
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..d {
            q[(i, d - 1)] = -q[(i, d - 1)];
        }
    }
    q
}

/// Random unit spinor with independent complex Gaussian entries.
pub fn random_unit_spinor<R: Rng>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}
