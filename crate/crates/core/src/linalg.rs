//! Small dense linear-algebra helpers shared by the geometry and transport
//! modules: Gram–Schmidt orthonormalisation against an arbitrary inner
//! product, and orthonormality checks with explicit tolerances.
//!
//! The helpers favour determinism over last-bit accuracy: identical inputs
//! produce identical outputs, which the rest of the crate relies on for
//! reproducible frames and Haar samples.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Inner product used by [`orthonormalize`]. The Euclidean dot product is the
/// common case; warped-product geometry substitutes a position-dependent one.
pub type InnerProduct<'a> = &'a dyn Fn(&DVector<f64>, &DVector<f64>) -> f64;

/// The Euclidean inner product as an [`InnerProduct`]-compatible closure.
pub fn euclidean_inner(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b)
}

/// Orthonormalises `vectors` in order by modified Gram–Schmidt with a single
/// re-orthogonalisation pass, under the given inner product.
///
/// The construction keeps the "R diagonal positive" convention: each output
/// vector has positive inner product with its input, so the map from inputs
/// to frames is deterministic and continuous wherever the inputs stay
/// linearly independent. Returns an error when a vector is (numerically) in
/// the span of its predecessors.
pub fn orthonormalize(vectors: &[DVector<f64>], inner: InnerProduct) -> Result<Vec<DVector<f64>>> {
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for (idx, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        // Two projection sweeps: plain MGS loses orthogonality on closely
        // aligned inputs; one repeat restores it to near machine precision.
        for _ in 0..2 {
            for q in &frame {
                let c = inner(&w, q);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm2 = inner(&w, &w);
        let original2 = inner(v, v).max(f64::MIN_POSITIVE);
        if !norm2.is_finite() || norm2 <= 1e-24 * original2 {
            return Err(Error::DimensionMismatch(format!(
                "vector {idx} is numerically dependent on its predecessors (residual norm^2 = {norm2:.3e})"
            )));
        }
        w /= norm2.sqrt();
        frame.push(w);
    }
    Ok(frame)
}

/// Stacks column vectors into an `ambient x n` matrix.
pub fn columns_to_matrix(columns: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_columns(columns)
}

/// Largest absolute deviation of `basis^T basis` from the identity.
pub fn gram_deviation(basis: &DMatrix<f64>) -> f64 {
    let gram = basis.transpose() * basis;
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - target).abs());
        }
    }
    dev
}

/// Checks `basis` has orthonormal columns within `tol`.
pub fn require_orthonormal(basis: &DMatrix<f64>, tol: f64) -> Result<()> {
    let deviation = gram_deviation(basis);
    if deviation > tol {
        return Err(Error::NotOrthonormal { deviation, tol });
    }
    Ok(())
}
