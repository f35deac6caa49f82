//! Restriction of ambient potentials to a sampled submanifold, and the
//! identity relating the intrinsic Laplacian to ambient second derivatives
//! and mean curvature:
//!
//! ```text
//! Laplacian_M (F ∘ i) = tr(Hess F |_{T_x M}) + n <grad F, H>.
//! ```
//!
//! The left side is discretised on the chart grid via the divergence form
//! `(1/sqrt g) d_i (sqrt g g^{ij} d_j f)` with centred differences; the right
//! side combines the potential's exact derivatives with the sampled frame
//! and curvature. The residual of the identity is the standard convergence
//! probe for the sampled geometry: it shrinks at second order in the mesh.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::chart::ParametricChart;
use crate::geometry::immersion::SampledImmersion;

/// An ambient scalar field with explicit first and second derivatives.
pub trait SmoothPotential {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `None` signals the potential is not twice differentiable at `x`.
    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>>;
}

/// `F(x) = |x|^2 / 2`: gradient `x`, Hessian identity.
#[derive(Debug, Clone, Copy)]
pub struct HalfSquaredNorm;

impl SmoothPotential for HalfSquaredNorm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(x.len(), x.len()))
    }
}

/// A linear form `F(x) = <a, x>`.
#[derive(Debug, Clone)]
pub struct LinearForm {
    pub coefficients: DVector<f64>,
}

impl SmoothPotential for LinearForm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.coefficients.dot(x)
    }
    fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.coefficients.clone()
    }
    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(x.len(), x.len()))
    }
}

/// Outcome of checking the Laplacian identity at one node.
#[derive(Debug, Clone, Copy)]
pub struct LaplacianCheck {
    /// Finite-difference intrinsic Laplacian of the restricted potential.
    pub laplacian: f64,
    /// `tr(Hess F |_T)` from the exact Hessian and the sampled frame.
    pub trace_term: f64,
    /// `n <grad F, H>` from the exact gradient and the sampled curvature.
    pub curvature_term: f64,
    /// `|laplacian - trace_term - curvature_term|`.
    pub residual: f64,
}

/// Verifies the Laplacian identity at node `index` of a chart-sampled
/// immersion. Errors when the immersion carries no chart or the potential is
/// not twice differentiable at the node.
pub fn laplacian_identity_check(
    m: &SampledImmersion,
    potential: &dyn SmoothPotential,
    index: usize,
) -> Result<LaplacianCheck> {
    if index >= m.len() {
        return Err(Error::PointIndex {
            index,
            len: m.len(),
        });
    }
    let chart = m.chart().ok_or(Error::MissingChart)?;
    let x = &m.points[index];
    let hessian = potential.hessian(x).ok_or(Error::PotentialNotSmooth)?;
    let gradient = potential.gradient(x);

    let n = m.intrinsic_dim;
    let u0 = chart.cell_center(&chart.multi_index(index));
    let laplacian = intrinsic_laplacian(chart, potential, &u0)?;

    let frame = &m.frames[index];
    let mut trace_term = 0.0;
    for a in 0..n {
        let e = frame.column(a);
        trace_term += (&hessian * e).dot(&e);
    }
    let curvature_term = n as f64 * gradient.dot(&m.mean_curvature[index]);
    let residual = (laplacian - trace_term - curvature_term).abs();
    Ok(LaplacianCheck {
        laplacian,
        trace_term,
        curvature_term,
        residual,
    })
}

/// Divergence-form finite-difference Laplacian of `F ∘ chart` at parameter
/// `u0`. All stencil offsets stay within half a cell of `u0`.
fn intrinsic_laplacian(
    chart: &ParametricChart,
    potential: &dyn SmoothPotential,
    u0: &[f64],
) -> Result<f64> {
    let n = chart.intrinsic_dim();
    let steps = chart.fd_steps();

    // sqrt(det g) and the metric inverse at an arbitrary parameter point.
    let metric_data = |u: &[f64]| -> Result<(f64, DMatrix<f64>)> {
        let partials = chart.partials(u)?;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = partials[i].dot(&partials[j]);
            }
        }
        let det = g.determinant();
        let inv = g.try_inverse().ok_or_else(|| Error::DegenerateMetric {
            cell: vec![],
            det,
            tol: 0.0,
        })?;
        Ok((det.sqrt(), inv))
    };
    let f = |u: &[f64]| -> Result<f64> { Ok(potential.value(&chart.eval(u)?)) };
    // Flux component W_i = sqrt(g) sum_j g^{ij} d_j f, centred differences.
    let flux = |u: &[f64], i: usize| -> Result<f64> {
        let (sqrt_g, g_inv) = metric_data(u)?;
        let mut w = 0.0;
        let mut shifted = u.to_vec();
        for j in 0..n {
            let d = 0.5 * steps[j];
            shifted[j] = u[j] + d;
            let plus = f(&shifted)?;
            shifted[j] = u[j] - d;
            let minus = f(&shifted)?;
            shifted[j] = u[j];
            w += g_inv[(i, j)] * (plus - minus) / (2.0 * d);
        }
        Ok(sqrt_g * w)
    };

    let (sqrt_g0, _) = metric_data(u0)?;
    let mut divergence = 0.0;
    let mut shifted = u0.to_vec();
    for i in 0..n {
        let d = 0.5 * steps[i];
        shifted[i] = u0[i] + d;
        let plus = flux(&shifted, i)?;
        shifted[i] = u0[i] - d;
        let minus = flux(&shifted, i)?;
        shifted[i] = u0[i];
        divergence += (plus - minus) / (2.0 * d);
    }
    Ok(divergence / sqrt_g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_immersion;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit_sphere(res: usize) -> SampledImmersion {
        let chart = ParametricChart::new(
            vec![(0.4, PI - 0.4), (0.0, 2.0 * PI)],
            vec![res, res],
            vec![false, true],
            3,
            Arc::new(|u: &[f64]| {
                vec![
                    u[0].sin() * u[1].cos(),
                    u[0].sin() * u[1].sin(),
                    u[0].cos(),
                ]
            }),
        )
        .unwrap();
        sample_immersion(&chart).unwrap()
    }

    #[test]
    fn constant_restriction_balances_curvature_on_the_sphere() {
        // F = |x|^2/2 restricts to the constant 1/2 on the unit sphere, so
        // the Laplacian vanishes and the trace term must cancel the
        // curvature term: tr(I|_T) = 2, 2<x, H> = -2.
        let sphere = unit_sphere(64);
        for index in [0, 17, sphere.len() / 2, sphere.len() - 1] {
            let check = laplacian_identity_check(&sphere, &HalfSquaredNorm, index).unwrap();
            assert!(check.laplacian.abs() < 5e-3, "laplacian {}", check.laplacian);
            assert!((check.trace_term - 2.0).abs() < 5e-3);
            assert!((check.curvature_term + 2.0).abs() < 5e-3);
            assert!(check.residual <= 5e-3, "residual {}", check.residual);
        }
    }

    #[test]
    fn linear_potential_identity_on_the_sphere() {
        // F = <a, x>: Hess = 0, so Laplacian = 2 <a, H> on a surface.
        let sphere = unit_sphere(64);
        let f = LinearForm {
            coefficients: DVector::from_vec(vec![0.3, -1.1, 0.7]),
        };
        for index in [3, sphere.len() / 3, sphere.len() - 5] {
            let check = laplacian_identity_check(&sphere, &f, index).unwrap();
            assert!(check.residual <= 5e-3, "residual {}", check.residual);
        }
    }

    #[test]
    fn non_smooth_potential_is_rejected() {
        struct AbsX;
        impl SmoothPotential for AbsX {
            fn value(&self, x: &DVector<f64>) -> f64 {
                x[0].abs()
            }
            fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
                let mut g = DVector::zeros(x.len());
                g[0] = x[0].signum();
                g
            }
            fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
                None
            }
        }
        let sphere = unit_sphere(8);
        match laplacian_identity_check(&sphere, &AbsX, 0) {
            Err(Error::PotentialNotSmooth) => {}
            other => panic!("expected PotentialNotSmooth, got {other:?}"),
        }
    }
}
