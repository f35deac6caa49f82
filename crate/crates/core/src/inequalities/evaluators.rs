//! Isoperimetric and Sobolev inequality evaluators on sampled immersions.
//!
//! Each evaluator integrates both sides of one inequality with the midpoint
//! weights stored in the immersion and returns an [`InequalityReport`] whose
//! margin is the discrete slack. The common ingredients are the projection
//! Jacobian `J` of the tangent planes onto a reference subspace, the mean
//! curvature magnitude `|H|`, and (for the Sobolev forms) a compactly
//! supported test function with its tangential gradient.
//!
//! The `L^p` evaluator keeps every right-hand term under a `1/p`-th root and
//! raises the curvature factor to the p-th power inside its integral. That
//! convention is forced by two anchors: the inequality must reduce to the
//! sharp Euclidean Sobolev inequality when the surface lies inside the
//! subspace, and to the `L^1` form as `p` tends to 1. Reports carry the
//! `curvature-term-pth-power` flag so downstream readers know which
//! convention produced the numbers.

use std::collections::BTreeMap;

use crate::constants::unit_ball_volume;
use crate::error::{Error, Result};
use crate::geometry::subspace::{projection_jacobian, Subspace};
use crate::geometry::SampledImmersion;
use crate::inequalities::report::InequalityReport;
use crate::inequalities::test_function::TestFunction;

/// Projection Jacobians below this floor on the support of a test function
/// make the negative-power weights of the `L^p` form unreliable; evaluation
/// fails rather than extrapolating.
pub const JACOBIAN_FLOOR: f64 = 1e-6;

/// Flag recorded on every `L^p` report: the curvature term enters as
/// `(∫ weight |H|^p |u|^p)^{1/p}`, matching the Hölder step of the
/// underlying argument, rather than as a first-power integral.
pub const CURVATURE_FLAG: &str = "curvature-term-pth-power";

fn require_dim(m: &SampledImmersion) -> Result<usize> {
    let n = m.intrinsic_dim;
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "inequality evaluators need intrinsic dimension >= 2, got {n}"
        )));
    }
    Ok(n)
}

fn jacobians(m: &SampledImmersion, e: &Subspace) -> Result<Vec<f64>> {
    (0..m.len()).map(|i| projection_jacobian(m, e, i)).collect()
}

fn check_lengths(m: &SampledImmersion, u: &TestFunction) -> Result<()> {
    if u.len() != m.len() {
        return Err(Error::DimensionMismatch(format!(
            "test function has {} samples for {} nodes",
            u.len(),
            m.len()
        )));
    }
    Ok(())
}

/// Curvature part of the boundary-free right-hand side: `n ∫ |H| dv`.
fn curvature_integral(m: &SampledImmersion) -> f64 {
    m.weights
        .iter()
        .zip(&m.mean_curvature)
        .map(|(w, h)| w * h.norm())
        .sum()
}

/// Isoperimetric inequality weighted by the projection Jacobian:
///
/// `n ω_n^{1/n} (∫ J^{1/(n-1)} dv)^{(n-1)/n}  <=  vol(∂Ω) + n ∫ |H| dv`.
///
/// Equality holds exactly for a flat round ball inside `e`, which is the
/// calibration case for the whole pipeline.
pub fn weighted_isoperimetric(m: &SampledImmersion, e: &Subspace) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    if m.boundary.is_empty() {
        return Err(Error::MissingBoundary);
    }
    let jac = jacobians(m, e)?;
    let omega = unit_ball_volume(n)?;
    let nf = n as f64;

    let weighted_volume: f64 = m
        .weights
        .iter()
        .zip(&jac)
        .map(|(w, j)| w * j.powf(1.0 / (nf - 1.0)))
        .sum();
    let lhs = nf * omega.powf(1.0 / nf) * weighted_volume.powf((nf - 1.0) / nf);
    let rhs = m.boundary_volume() + nf * curvature_integral(m);

    let mut constants = BTreeMap::new();
    constants.insert("omega_n".to_owned(), omega);
    InequalityReport::new("weighted-isoperimetric", lhs, rhs, &m.info, constants, vec![])
}

/// Sobolev form of the weighted isoperimetric inequality:
///
/// `n ω_n^{1/n} (∫ J^{1/(n-1)} |u|^{n/(n-1)})^{(n-1)/n} <= ∫ |∇u| + n ∫ |H| |u|`.
pub fn weighted_sobolev_l1(
    m: &SampledImmersion,
    e: &Subspace,
    u: &TestFunction,
) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    check_lengths(m, u)?;
    let jac = jacobians(m, e)?;
    let omega = unit_ball_volume(n)?;
    let nf = n as f64;

    let mut weighted = 0.0;
    let mut gradient = 0.0;
    let mut curvature = 0.0;
    for i in 0..m.len() {
        let w = m.weights[i];
        let v = u.values()[i].abs();
        weighted += w * jac[i].powf(1.0 / (nf - 1.0)) * v.powf(nf / (nf - 1.0));
        gradient += w * u.tangential_gradient()[i].norm();
        curvature += w * m.mean_curvature[i].norm() * v;
    }
    let lhs = nf * omega.powf(1.0 / nf) * weighted.powf((nf - 1.0) / nf);
    let rhs = gradient + nf * curvature;

    let mut constants = BTreeMap::new();
    constants.insert("omega_n".to_owned(), omega);
    InequalityReport::new("weighted-sobolev-l1", lhs, rhs, &m.info, constants, vec![])
}

/// Classical isoperimetric inequality with a plane-averaged constant:
///
/// `n ω_n^{1/n} α (Vol Ω)^{(n-1)/n} <= vol(∂Ω) + n ∫ |H| dv`,
///
/// where `alpha` is the Grassmannian average of `K_E^{1/n}` supplied by the
/// geometry layer for the matching dimension and codimension. A closed
/// surface contributes no boundary term.
pub fn classical_isoperimetric(m: &SampledImmersion, alpha: f64) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::SurfaceParameter(format!(
            "plane-average constant must lie in (0, 1], got {alpha}"
        )));
    }
    let omega = unit_ball_volume(n)?;
    let nf = n as f64;
    let lhs = nf * omega.powf(1.0 / nf) * alpha * m.volume().powf((nf - 1.0) / nf);
    let rhs = m.boundary_volume() + nf * curvature_integral(m);

    let mut constants = BTreeMap::new();
    constants.insert("omega_n".to_owned(), omega);
    constants.insert("alpha_n_k".to_owned(), alpha);
    InequalityReport::new(
        "classical-isoperimetric",
        lhs,
        rhs,
        &m.info,
        constants,
        vec![],
    )
}

/// `L^p` Sobolev inequality weighted by the projection Jacobian, `1 < p < n`:
///
/// `s_np (∫ J^{1/(n-1)} |u|^{np/(n-p)})^{(n-p)/(np)}
///    <= (∫ J^{-(p-1)/(n-1)} |∇u|^p)^{1/p}
///       + (n(n-p)/(p(n-1))) (∫ J^{-(p-1)/(n-1)} |H|^p |u|^p)^{1/p}`.
///
/// `s_np` is the Euclidean `L^p` Sobolev constant for dimension `n`, from
/// [`sobolev_constant`](crate::inequalities::sobolev_constant) or an
/// external table. The negative-power weight requires `J` to stay above
/// [`JACOBIAN_FLOOR`] on the support of `u`.
pub fn lp_sobolev(
    m: &SampledImmersion,
    e: &Subspace,
    u: &TestFunction,
    p: f64,
    s_np: f64,
) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    check_lengths(m, u)?;
    let nf = n as f64;
    if !(p.is_finite() && p > 1.0 && p < nf) {
        return Err(Error::ExponentRange {
            p,
            lo: 1.0,
            hi: nf,
        });
    }
    if !(s_np.is_finite() && s_np > 0.0) {
        return Err(Error::SurfaceParameter(format!(
            "Sobolev constant must be positive and finite, got {s_np}"
        )));
    }
    let jac = jacobians(m, e)?;

    let support: Vec<usize> = (0..m.len())
        .filter(|&i| u.values()[i] != 0.0 || u.tangential_gradient()[i].norm() > 0.0)
        .collect();
    let offenders: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| jac[i] < JACOBIAN_FLOOR)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::JacobianBelowFloor {
            floor: JACOBIAN_FLOOR,
            points: offenders,
        });
    }

    let critical = nf * p / (nf - p);
    let mut weighted = 0.0;
    let mut gradient = 0.0;
    let mut curvature = 0.0;
    for &i in &support {
        let w = m.weights[i];
        let v = u.values()[i].abs();
        let neg_weight = jac[i].powf(-(p - 1.0) / (nf - 1.0));
        weighted += w * jac[i].powf(1.0 / (nf - 1.0)) * v.powf(critical);
        gradient += w * neg_weight * u.tangential_gradient()[i].norm().powf(p);
        curvature += w * neg_weight * m.mean_curvature[i].norm().powf(p) * v.powf(p);
    }
    let lhs = s_np * weighted.powf((nf - p) / (nf * p));
    let coefficient = nf * (nf - p) / (p * (nf - 1.0));
    let rhs = gradient.powf(1.0 / p) + coefficient * curvature.powf(1.0 / p);

    let mut constants = BTreeMap::new();
    constants.insert("s_n_p".to_owned(), s_np);
    InequalityReport::new(
        "lp-sobolev",
        lhs,
        rhs,
        &m.info,
        constants,
        vec![CURVATURE_FLAG.to_owned()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{alpha_n1, catalog, sample_immersion};
    use crate::inequalities::sobolev_constant::sobolev_constant;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    fn surface(id: &str, overrides: &[(&str, f64)], res: &[usize]) -> SampledImmersion {
        let chart = catalog::build(id, overrides, res).unwrap();
        sample_immersion(&chart).unwrap()
    }

    #[test]
    fn flat_disc_in_its_own_plane_is_the_equality_case() {
        let m = surface("flat-disc", &[], &[128, 128]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let report = weighted_isoperimetric(&m, &e).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 2.0 * PI, epsilon = 1e-6);
        assert!(report.relative_margin.abs() <= 1e-6);
        assert_eq!(report.surface, "flat-disc");
        assert_abs_diff_eq!(report.constants["omega_n"], PI, epsilon = 1e-15);
    }

    #[test]
    fn tilting_the_disc_opens_a_predictable_margin() {
        let tilt = 0.5f64;
        let m = surface("flat-disc", &[("tilt", tilt)], &[128, 128]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let report = weighted_isoperimetric(&m, &e).unwrap();
        // J is constantly cos(tilt) on a plane, so the left side contracts
        // by its square root while the perimeter stays put.
        assert_abs_diff_eq!(report.lhs, 2.0 * PI * tilt.cos().sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 2.0 * PI, epsilon = 1e-6);
        assert!(report.margin > 0.3);
    }

    #[test]
    fn sphere_cap_satisfies_the_weighted_inequality_strictly() {
        let m = surface("sphere-cap", &[("theta_max", 1.2)], &[96, 96]);
        for e in [
            Subspace::coordinate(3, &[0, 1]).unwrap(),
            Subspace::coordinate(3, &[1, 2]).unwrap(),
        ] {
            let report = weighted_isoperimetric(&m, &e).unwrap();
            assert!(report.margin > 0.0, "margin {}", report.margin);
        }
    }

    #[test]
    fn missing_boundary_is_rejected() {
        // theta_max = pi closes the sphere; no boundary nodes remain.
        let m = surface("sphere-cap", &[("theta_max", PI)], &[64, 64]);
        assert!(m.boundary.is_empty());
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        match weighted_isoperimetric(&m, &e) {
            Err(Error::MissingBoundary) => {}
            other => panic!("expected missing-boundary error, got {other:?}"),
        }
    }

    #[test]
    fn sobolev_l1_is_scale_invariant_in_the_test_function() {
        let m = surface("flat-disc", &[], &[96, 96]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let u = TestFunction::radial_bump(&m, &DVector::zeros(3), 0.8).unwrap();
        let base = weighted_sobolev_l1(&m, &e, &u).unwrap();
        let scaled = weighted_sobolev_l1(&m, &e, &u.scaled(3.7)).unwrap();
        assert_abs_diff_eq!(scaled.lhs, 3.7 * base.lhs, epsilon = 1e-12 * base.lhs);
        assert_abs_diff_eq!(scaled.rhs, 3.7 * base.rhs, epsilon = 1e-12 * base.rhs);
        assert_abs_diff_eq!(
            scaled.relative_margin,
            base.relative_margin,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sharpening_an_indicator_closes_the_sobolev_margin() {
        let m = surface("flat-disc", &[], &[192, 192]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let margins: Vec<f64> = [0.2, 0.12, 0.07]
            .iter()
            .map(|&width| {
                let u = TestFunction::smoothed_indicator(&m, &DVector::zeros(3), 0.7, width)
                    .unwrap();
                weighted_sobolev_l1(&m, &e, &u).unwrap().relative_margin
            })
            .collect();
        assert!(
            margins[0] > margins[1] && margins[1] > margins[2],
            "margins {margins:?}"
        );
        assert!(margins[2] > 0.0);
        // The sharp indicator of the sub-disc reproduces its isoperimetric
        // data, so the margin heads towards zero.
        assert!(margins[2] < 0.05, "margins {margins:?}");
    }

    #[test]
    fn curved_bump_keeps_a_positive_sobolev_margin() {
        let m = surface("sphere-cap", &[("theta_max", 1.2)], &[96, 96]);
        let e = Subspace::coordinate(3, &[1, 2]).unwrap();
        let pole = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let u = TestFunction::radial_bump(&m, &pole, 0.6).unwrap();
        let report = weighted_sobolev_l1(&m, &e, &u).unwrap();
        assert!(report.margin > 0.0, "margin {}", report.margin);
    }

    #[test]
    fn classical_constant_shrinks_the_left_side_of_the_disc_case() {
        let m = surface("flat-disc", &[], &[128, 128]);
        let alpha = alpha_n1(2, 64).unwrap();
        assert_abs_diff_eq!(alpha, 2.0 / 3.0, epsilon = 1e-12);
        let report = classical_isoperimetric(&m, alpha).unwrap();
        assert_abs_diff_eq!(report.lhs, 4.0 * PI / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 2.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(report.constants["alpha_n_k"], alpha, epsilon = 0.0);
    }

    #[test]
    fn minimal_surface_rhs_is_perimeter_only() {
        let m = surface("catenoid", &[], &[96, 48]);
        let report = classical_isoperimetric(&m, 2.0 / 3.0).unwrap();
        assert!(report.margin > 0.0);
        // H vanishes identically on a catenoid; the discrete curvature
        // residual must be negligible next to the boundary term.
        let curvature_part = report.rhs - m.boundary_volume();
        assert!(
            curvature_part <= 1e-3 * report.rhs,
            "curvature part {curvature_part}"
        );
    }

    #[test]
    fn flat_three_ball_reduces_to_the_euclidean_sobolev_inequality() {
        let m = surface("flat-disc", &[("dim", 3.0)], &[24, 24, 48]);
        let e = Subspace::coordinate(4, &[0, 1, 2]).unwrap();
        let u = TestFunction::radial_bump(&m, &DVector::zeros(4), 0.8).unwrap();
        let s = sobolev_constant(3, 2.0, 24).unwrap();
        let report = lp_sobolev(&m, &e, &u, 2.0, s).unwrap();
        assert!(report.margin >= 0.0, "margin {}", report.margin);
        assert_eq!(report.flags, vec![CURVATURE_FLAG.to_string()]);
        // The cubic bump is not the Sobolev extremal, but it is not far
        // off; the margin should be a modest fraction of the right side.
        assert!(report.relative_margin < 0.5, "{}", report.relative_margin);
    }

    #[test]
    fn lp_rhs_approaches_the_l1_rhs_as_p_drops_to_one() {
        let m = surface("flat-disc", &[], &[128, 128]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let u = TestFunction::radial_bump(&m, &DVector::zeros(3), 0.8).unwrap();
        let l1 = weighted_sobolev_l1(&m, &e, &u).unwrap();
        let lp = lp_sobolev(&m, &e, &u, 1.01, sobolev_constant(2, 1.01, 24).unwrap()).unwrap();
        let ratio = lp.rhs / l1.rhs;
        assert!((ratio - 1.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn near_critical_support_is_rejected_with_the_offenders() {
        // Tilt the disc almost perpendicular to the reference plane: the
        // projection Jacobian is cos(tilt) < the floor everywhere.
        let tilt = std::f64::consts::FRAC_PI_2 - 1e-7;
        let m = surface("flat-disc", &[("tilt", tilt)], &[32, 32]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let u = TestFunction::radial_bump(&m, &DVector::zeros(3), 0.6).unwrap();
        match lp_sobolev(&m, &e, &u, 1.5, 2.0) {
            Err(Error::JacobianBelowFloor { floor, points }) => {
                assert_eq!(floor, JACOBIAN_FLOOR);
                assert!(!points.is_empty());
            }
            other => panic!("expected Jacobian floor error, got {other:?}"),
        }
    }

    #[test]
    fn exponents_outside_the_admissible_range_are_rejected() {
        let m = surface("flat-disc", &[], &[32, 32]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let u = TestFunction::radial_bump(&m, &DVector::zeros(3), 0.6).unwrap();
        for bad in [0.5, 1.0, 2.0, 5.0] {
            match lp_sobolev(&m, &e, &u, bad, 2.0) {
                Err(Error::ExponentRange { p, .. }) => assert_eq!(p, bad),
                other => panic!("expected exponent error for p = {bad}, got {other:?}"),
            }
        }
    }

    #[test]
    fn reports_are_invariant_under_ambient_rotations() {
        let rotation = {
            // Product of plane rotations; any fixed special orthogonal map.
            let (a, b, c) = (0.3f64, 0.7f64, 1.1f64);
            let rz = DMatrix::from_row_slice(
                3,
                3,
                &[a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0],
            );
            let ry = DMatrix::from_row_slice(
                3,
                3,
                &[b.cos(), 0.0, b.sin(), 0.0, 1.0, 0.0, -b.sin(), 0.0, b.cos()],
            );
            let rx = DMatrix::from_row_slice(
                3,
                3,
                &[1.0, 0.0, 0.0, 0.0, c.cos(), -c.sin(), 0.0, c.sin(), c.cos()],
            );
            rz * ry * rx
        };
        let chart = catalog::build("sphere-cap", &[("theta_max", 1.2)], &[48, 48]).unwrap();
        let m = sample_immersion(&chart).unwrap();
        let rot = rotation.clone();
        let rotated_chart = crate::geometry::ParametricChart::new(
            chart.domain().to_vec(),
            chart.resolution().to_vec(),
            chart.periodic().to_vec(),
            3,
            std::sync::Arc::new(move |u: &[f64]| {
                let p = chart.eval(u).unwrap();
                (&rot * p).iter().cloned().collect()
            }),
        )
        .unwrap();
        let mr = sample_immersion(&rotated_chart).unwrap();

        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let er = Subspace::new(&rotation * e.basis()).unwrap();
        let plain = weighted_isoperimetric(&m, &e).unwrap();
        let turned = weighted_isoperimetric(&mr, &er).unwrap();
        assert_abs_diff_eq!(plain.lhs, turned.lhs, epsilon = 1e-10);
        assert_abs_diff_eq!(plain.rhs, turned.rhs, epsilon = 1e-10);

        let pole = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let u = TestFunction::radial_bump(&m, &pole, 0.6).unwrap();
        let ur = TestFunction::radial_bump(&mr, &(&rotation * pole), 0.6).unwrap();
        let plain = weighted_sobolev_l1(&m, &e, &u).unwrap();
        let turned = weighted_sobolev_l1(&mr, &er, &ur).unwrap();
        assert_abs_diff_eq!(plain.lhs, turned.lhs, epsilon = 1e-10);
        assert_abs_diff_eq!(plain.rhs, turned.rhs, epsilon = 1e-10);
    }

    #[test]
    fn the_left_side_peaks_when_the_reference_plane_is_parallel() {
        let tilt = 0.3f64;
        let m = surface("flat-disc", &[("tilt", tilt)], &[64, 64]);
        let parallel = Subspace::from_vectors(&[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, tilt.cos(), tilt.sin()]),
        ])
        .unwrap();
        let flat = Subspace::coordinate(3, &[0, 1]).unwrap();
        let lhs_parallel = weighted_isoperimetric(&m, &parallel).unwrap().lhs;
        let lhs_tilted = weighted_isoperimetric(&m, &flat).unwrap().lhs;
        assert!(lhs_parallel > lhs_tilted);
        assert_abs_diff_eq!(lhs_parallel, 2.0 * PI, epsilon = 1e-6);
    }

    #[test]
    fn classical_and_weighted_sides_agree_when_the_jacobian_is_one() {
        let m = surface("flat-disc", &[], &[64, 64]);
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let weighted = weighted_isoperimetric(&m, &e).unwrap();
        let classical = classical_isoperimetric(&m, 1.0).unwrap();
        assert_abs_diff_eq!(
            weighted.lhs,
            classical.lhs,
            epsilon = 1e-12 * classical.lhs
        );
        assert_abs_diff_eq!(weighted.rhs, classical.rhs, epsilon = 0.0);
    }
}
