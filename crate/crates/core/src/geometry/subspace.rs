//! Linear subspaces of the ambient space, and how a sampled submanifold sits
//! relative to one: projection Jacobians, critical sets, and the mutual
//! cosine of two planes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::immersion::SampledImmersion;
use crate::linalg;

/// Orthonormality tolerance for subspace bases.
pub const BASIS_ORTHO_TOL: f64 = 1e-12;
/// Default threshold below which a projection Jacobian counts as critical.
pub const CRITICAL_EPS_DEFAULT: f64 = 1e-8;

/// A linear subspace given by an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps an `ambient x dim` basis matrix, which must be orthonormal
    /// within [`BASIS_ORTHO_TOL`].
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.ncols() == 0 || basis.nrows() < basis.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "subspace basis is {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        linalg::require_orthonormal(&basis, BASIS_ORTHO_TOL)?;
        Ok(Self { basis })
    }

    /// Builds a subspace from basis vectors (orthonormality is checked, not
    /// repaired).
    pub fn from_vectors(vectors: &[DVector<f64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::DimensionMismatch("no basis vectors".into()));
        }
        Self::new(linalg::columns_to_matrix(vectors))
    }

    /// Orthonormalises arbitrary spanning vectors first (modified
    /// Gram–Schmidt), then wraps them.
    pub fn spanned_by(vectors: &[DVector<f64>]) -> Result<Self> {
        let frame = linalg::orthonormalize(vectors, &linalg::euclidean_inner)?;
        Self::from_vectors(&frame)
    }

    /// The coordinate subspace spanned by the listed ambient axes.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::DimensionMismatch("no axes listed".into()));
        }
        let mut basis = DMatrix::zeros(ambient_dim, axes.len());
        for (col, &axis) in axes.iter().enumerate() {
            if axis >= ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "axis {axis} outside ambient dimension {ambient_dim}"
                )));
            }
            basis[(axis, col)] = 1.0;
        }
        Self::new(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection of `x` onto the subspace, in ambient
    /// coordinates.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * x)
    }

    /// Coordinates of the projection in the subspace basis.
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * x
    }

    /// Embeds subspace coordinates back into the ambient space.
    pub fn embed(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.basis * coords
    }
}

/// Jacobian of the orthogonal projection of the tangent plane at node
/// `index` onto `e`: the absolute determinant of the frame overlap matrix.
/// Lies in `[0, 1]`, and equals the cosine of the angle the tangent plane
/// makes with `e`.
pub fn projection_jacobian(m: &SampledImmersion, e: &Subspace, index: usize) -> Result<f64> {
    if index >= m.len() {
        return Err(Error::PointIndex {
            index,
            len: m.len(),
        });
    }
    if e.ambient_dim() != m.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "subspace lives in R^{}, immersion in R^{}",
            e.ambient_dim(),
            m.ambient_dim
        )));
    }
    if e.dim() != m.intrinsic_dim {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimension {} does not match intrinsic dimension {}",
            e.dim(),
            m.intrinsic_dim
        )));
    }
    let overlap = e.basis().transpose() * &m.frames[index];
    // Orthonormal factors bound the true value by 1; clamp the rounding spill.
    Ok(overlap.determinant().abs().min(1.0))
}

/// Ids of the nodes whose projection Jacobian is at most `eps`: the critical
/// set of the projection, where transported densities blow up.
pub fn critical_set(m: &SampledImmersion, e: &Subspace, eps: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for index in 0..m.len() {
        if projection_jacobian(m, e, index)? <= eps {
            out.push(index);
        }
    }
    Ok(out)
}

/// Mutual cosine of two planes of equal dimension: `|det(B_F^T B_E)|`.
/// Symmetric in its arguments and equal to 1 exactly when `F = E`.
pub fn plane_cosine(f: &Subspace, e: &Subspace) -> Result<f64> {
    if f.ambient_dim() != e.ambient_dim() || f.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "planes are {}-dim in R^{} and {}-dim in R^{}",
            f.dim(),
            f.ambient_dim(),
            e.dim(),
            e.ambient_dim()
        )));
    }
    let overlap = f.basis().transpose() * e.basis();
    Ok(overlap.determinant().abs().min(1.0))
}
