//! Sampling a parametric chart into quadrature-ready geometry.
//!
//! Each grid-cell centre contributes one node carrying:
//!
//! * its ambient position,
//! * an orthonormal tangent frame (Gram–Schmidt on the centred partials),
//! * the mean curvature vector `H = (1/n) tr_g A`, where the second
//!   fundamental form `A` is the normal part of the second partials,
//! * a quadrature weight `sqrt(det g) * cell volume` (midpoint rule).
//!
//! Non-periodic box faces are sampled the same way one dimension down and
//! yield boundary nodes with outward unit conormals. Faces whose induced
//! metric degenerates (polar seams, collapsed edges) carry no area and are
//! skipped; a degenerate metric at an interior node is an error instead.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::chart::{ParametricChart, SurfaceInfo};
use crate::linalg;

/// Gram determinants at or below this value are treated as degenerate.
pub const METRIC_DEGENERACY_TOL: f64 = 1e-12;
/// Allowed deviation of a stored tangent frame from orthonormality.
pub const FRAME_ORTHO_TOL: f64 = 1e-10;
/// Allowed tangential component of a stored mean-curvature vector.
pub const CURVATURE_ORTHO_TOL: f64 = 1e-8;

/// One boundary quadrature node: position, outward unit conormal (tangent to
/// the surface, normal to the boundary), and its `(n-1)`-volume weight.
#[derive(Debug, Clone)]
pub struct BoundaryNode {
    pub point: DVector<f64>,
    pub conormal: DVector<f64>,
    pub weight: f64,
}

/// A submanifold sampled at quadrature nodes.
#[derive(Debug, Clone)]
pub struct SampledImmersion {
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub points: Vec<DVector<f64>>,
    /// Orthonormal tangent frames, one `ambient x n` matrix per point.
    pub frames: Vec<DMatrix<f64>>,
    pub mean_curvature: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    /// Empty for closed surfaces.
    pub boundary: Vec<BoundaryNode>,
    pub info: SurfaceInfo,
    chart: Option<ParametricChart>,
}

impl SampledImmersion {
    /// Assembles an immersion from raw parts, enforcing the structural
    /// invariants (frame orthonormality, curvature normality, positive
    /// finite weights, consistent dimensions).
    pub fn from_parts(
        ambient_dim: usize,
        intrinsic_dim: usize,
        points: Vec<DVector<f64>>,
        frames: Vec<DMatrix<f64>>,
        mean_curvature: Vec<DVector<f64>>,
        weights: Vec<f64>,
        boundary: Vec<BoundaryNode>,
        info: SurfaceInfo,
        chart: Option<ParametricChart>,
    ) -> Result<Self> {
        let m = Self {
            ambient_dim,
            intrinsic_dim,
            points,
            frames,
            mean_curvature,
            weights,
            boundary,
            info,
            chart,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let len = self.points.len();
        if self.frames.len() != len || self.mean_curvature.len() != len || self.weights.len() != len
        {
            return Err(Error::DimensionMismatch(format!(
                "immersion arrays disagree: {} points, {} frames, {} curvatures, {} weights",
                len,
                self.frames.len(),
                self.mean_curvature.len(),
                self.weights.len()
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != self.ambient_dim || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadAtom { index: i });
            }
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.nrows() != self.ambient_dim || f.ncols() != self.intrinsic_dim {
                return Err(Error::DimensionMismatch(format!(
                    "frame {i} is {}x{}, expected {}x{}",
                    f.nrows(),
                    f.ncols(),
                    self.ambient_dim,
                    self.intrinsic_dim
                )));
            }
            linalg::require_orthonormal(f, FRAME_ORTHO_TOL)?;
        }
        for (i, (h, f)) in self.mean_curvature.iter().zip(&self.frames).enumerate() {
            let scale = 1.0 + h.norm();
            let tangential = (f.transpose() * h).norm();
            if !tangential.is_finite() || tangential > CURVATURE_ORTHO_TOL * scale {
                return Err(Error::DimensionMismatch(format!(
                    "mean curvature at node {i} has tangential component {tangential:.3e}"
                )));
            }
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::BadMass { index: i, mass: w });
            }
        }
        for b in &self.boundary {
            if !b.weight.is_finite() || b.weight < 0.0 {
                return Err(Error::DimensionMismatch(
                    "boundary node with negative or non-finite weight".into(),
                ));
            }
        }
        Ok(())
    }

    /// The chart this immersion was sampled from, when available. Finite
    /// difference operations (intrinsic Laplacians, chart-coordinate test
    /// functions) need it.
    pub fn chart(&self) -> Option<&ParametricChart> {
        self.chart.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total quadrature weight: the sampled `n`-volume of the surface.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sampled `(n-1)`-volume of the boundary.
    pub fn boundary_volume(&self) -> f64 {
        self.boundary.iter().map(|b| b.weight).sum()
    }

    /// Writes the node table as CSV:
    /// `point_id, x0..x{d-1}, weight, h0..h{d-1}, t{r}_{c}` where the `t`
    /// block is the tangent frame row-major (rows are tangent vectors).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let d = self.ambient_dim;
        let n = self.intrinsic_dim;
        let mut header = String::from("point_id");
        for c in 0..d {
            header.push_str(&format!(",x{c}"));
        }
        header.push_str(",weight");
        for c in 0..d {
            header.push_str(&format!(",h{c}"));
        }
        for r in 0..n {
            for c in 0..d {
                header.push_str(&format!(",t{r}_{c}"));
            }
        }
        writeln!(out, "{header}")?;
        for i in 0..self.len() {
            let mut line = format!("{i}");
            for c in 0..d {
                line.push_str(&format!(",{}", self.points[i][c]));
            }
            line.push_str(&format!(",{}", self.weights[i]));
            for c in 0..d {
                line.push_str(&format!(",{}", self.mean_curvature[i][c]));
            }
            for r in 0..n {
                for c in 0..d {
                    line.push_str(&format!(",{}", self.frames[i][(c, r)]));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Samples `chart` at every cell centre, building frames, curvature, weights
/// and boundary data. See the module docs for the discretisation.
pub fn sample_immersion(chart: &ParametricChart) -> Result<SampledImmersion> {
    let n = chart.intrinsic_dim();
    let d = chart.ambient_dim();
    let cell_volume = chart.cell_volume();
    let count = chart.cell_count();

    let mut points = Vec::with_capacity(count);
    let mut frames = Vec::with_capacity(count);
    let mut curvature = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);

    for flat in 0..count {
        let multi = chart.multi_index(flat);
        let u = chart.cell_center(&multi);
        let x = chart.eval(&u)?;
        let partials = chart.partials(&u)?;

        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = partials[i].dot(&partials[j]);
            }
        }
        let det = gram.determinant();
        if !(det > METRIC_DEGENERACY_TOL) {
            return Err(Error::DegenerateMetric {
                cell: multi,
                det,
                tol: METRIC_DEGENERACY_TOL,
            });
        }
        let frame_vectors = linalg::orthonormalize(&partials, &linalg::euclidean_inner)?;
        let frame = linalg::columns_to_matrix(&frame_vectors);

        let second = chart.second_partials(&u)?;
        let gram_inv = gram.clone().try_inverse().ok_or(Error::DegenerateMetric {
            cell: chart.multi_index(flat),
            det,
            tol: METRIC_DEGENERACY_TOL,
        })?;
        let mut h = DVector::zeros(d);
        for i in 0..n {
            for j in 0..n {
                // Normal part of the second partial: subtract the tangential
                // projection onto the orthonormal frame.
                let mut normal = second[i][j].clone();
                for q in &frame_vectors {
                    let c = normal.dot(q);
                    normal.axpy(-c, q, 1.0);
                }
                h.axpy(gram_inv[(i, j)], &normal, 1.0);
            }
        }
        h /= n as f64;

        points.push(x);
        frames.push(frame);
        curvature.push(h);
        weights.push(det.sqrt() * cell_volume);
    }

    let boundary = sample_boundary(chart)?;

    SampledImmersion::from_parts(
        d,
        n,
        points,
        frames,
        curvature,
        weights,
        boundary,
        chart.info.clone(),
        Some(chart.clone()),
    )
}

/// Samples the non-periodic box faces one dimension down. Degenerate faces
/// (zero induced area) are skipped.
fn sample_boundary(chart: &ParametricChart) -> Result<Vec<BoundaryNode>> {
    sample_boundary_with_inner(chart, &|_, a, b| a.dot(b))
}

/// Boundary sampling under a position-dependent ambient inner product
/// `inner(point, a, b)`; the warped-product sampler reuses the face walk
/// with its own metric.
pub(crate) fn sample_boundary_with_inner(
    chart: &ParametricChart,
    inner: &dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> f64,
) -> Result<Vec<BoundaryNode>> {
    let n = chart.intrinsic_dim();
    let widths = chart.cell_widths();
    let mut nodes = Vec::new();
    if n == 0 {
        return Ok(nodes);
    }

    for axis in 0..n {
        if chart.periodic()[axis] {
            continue;
        }
        let other_axes: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
        let face_cells: usize = other_axes.iter().map(|&a| chart.resolution()[a]).product();
        let face_cell_volume: f64 = other_axes.iter().map(|&a| widths[a]).product();

        for &(side, coordinate) in &[
            (-1.0, chart.domain()[axis].0),
            (1.0, chart.domain()[axis].1),
        ] {
            for face_flat in 0..face_cells {
                // Decode the (n-1)-dimensional face index.
                let mut u = vec![0.0; n];
                u[axis] = coordinate;
                let mut rem = face_flat;
                for &a in other_axes.iter().rev() {
                    let r = chart.resolution()[a];
                    let i = rem % r;
                    rem /= r;
                    u[a] = chart.domain()[a].0 + (i as f64 + 0.5) * widths[a];
                }

                let point = chart.eval(&u)?;
                // Face-tangential stencils move along the other axes only, so
                // the same fourth-order interior stencil applies; the boundary
                // quadrature then matches the interior one in accuracy.
                let mut face_partials = Vec::with_capacity(n - 1);
                for &a in &other_axes {
                    face_partials.push(chart.partial(&u, a)?);
                }

                let m = n - 1;
                let mut face_gram = DMatrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        face_gram[(i, j)] = inner(&point, &face_partials[i], &face_partials[j]);
                    }
                }
                let face_det = if m == 0 { 1.0 } else { face_gram.determinant() };
                if !(face_det > METRIC_DEGENERACY_TOL) {
                    // Collapsed face (polar axis, seam): zero area, no node.
                    continue;
                }

                // The conormal is the unit tangent vector orthogonal to the
                // face directions; orthonormalising the one-sided normal
                // partial after the face partials produces exactly that, with
                // a sign following the partial (positive-diagonal convention).
                let inward = -side;
                let axis_partial = chart.one_sided_partial(&u, axis, inward)?;
                let mut all = face_partials.clone();
                all.push(axis_partial);
                let at_point = |a: &DVector<f64>, b: &DVector<f64>| inner(&point, a, b);
                let frame = linalg::orthonormalize(&all, &at_point)?;
                let conormal = &frame[m] * side;

                nodes.push(BoundaryNode {
                    point,
                    conormal,
                    weight: face_det.sqrt() * face_cell_volume,
                });
            }
        }
    }
    Ok(nodes)
}
