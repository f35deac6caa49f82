//! Warping functions for product metrics `dt² + w(t)² dy²`.
//!
//! A [`WarpedMetric`] bundles the positive warp `w`, its declared derivative
//! `w'`, and a preset tag. Derivatives are declared rather than differenced
//! because the Christoffel symbols of the metric are assembled from `w` and
//! `w'` exactly; [`WarpedMetric::validate_range`] cross-checks the
//! declaration against central differences so a mistyped derivative fails
//! fast instead of corrupting curvature.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar function of the distinguished coordinate.
pub type WarpFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative tolerance of the declared-derivative cross-check.
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-5;

/// Step of the central difference used by the cross-check.
const DERIVATIVE_CHECK_STEP: f64 = 1e-5;

/// Number of sample points `validate_range` probes.
const VALIDATION_SAMPLES: usize = 33;

/// The warp of a product metric `dt² + w(t)² dy²`.
#[derive(Clone)]
pub struct WarpedMetric {
    w: WarpFn,
    w_prime: WarpFn,
    preset: String,
    /// Trusted parameter range for tabulated warps; `None` for closed-form
    /// presets valid everywhere.
    table_range: Option<(f64, f64)>,
}

impl fmt::Debug for WarpedMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedMetric")
            .field("preset", &self.preset)
            .field("table_range", &self.table_range)
            .finish()
    }
}

impl WarpedMetric {
    /// The unwarped product: `w ≡ 1`. Every warped quantity then reduces to
    /// its Euclidean counterpart.
    pub fn euclidean() -> Self {
        WarpedMetric {
            w: Arc::new(|_| 1.0),
            w_prime: Arc::new(|_| 0.0),
            preset: "euclidean".to_owned(),
            table_range: None,
        }
    }

    /// `w(t) = e^t`: hyperbolic space written over horospheres.
    pub fn hyperbolic() -> Self {
        WarpedMetric {
            w: Arc::new(f64::exp),
            w_prime: Arc::new(f64::exp),
            preset: "hyperbolic".to_owned(),
            table_range: None,
        }
    }

    /// An arbitrary warp with its declared derivative. The declaration is
    /// trusted until [`Self::validate_range`] (called by the geometry
    /// sampler) cross-checks it.
    pub fn custom(w: WarpFn, w_prime: WarpFn) -> Self {
        WarpedMetric {
            w,
            w_prime,
            preset: "custom".to_owned(),
            table_range: None,
        }
    }

    /// Builds a custom warp from tabulated `(t, w, w')` rows by cubic
    /// Hermite interpolation, which reproduces both columns at the knots.
    /// Rows must be strictly increasing in `t`, with positive finite `w`.
    /// Outside the table the warp continues linearly from the nearest knot;
    /// `validate_range` refuses ranges that leave the table.
    pub fn from_table(rows: &[(f64, f64, f64)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::SurfaceParameter(format!(
                "a tabulated warp needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        for pair in rows.windows(2) {
            if !(pair[0].0 < pair[1].0) {
                return Err(Error::SurfaceParameter(format!(
                    "warp table must be strictly increasing in t: {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        for &(t, w, wp) in rows {
            if !(t.is_finite() && w.is_finite() && wp.is_finite()) {
                return Err(Error::SurfaceParameter(format!(
                    "warp table row ({t}, {w}, {wp}) is not finite"
                )));
            }
            if w <= 0.0 {
                return Err(Error::NonPositiveWarp { t, w });
            }
        }
        let table: Arc<Vec<(f64, f64, f64)>> = Arc::new(rows.to_vec());
        let range = (rows[0].0, rows[rows.len() - 1].0);
        let value_table = Arc::clone(&table);
        let slope_table = Arc::clone(&table);
        Ok(WarpedMetric {
            w: Arc::new(move |t| hermite(&value_table, t).0),
            w_prime: Arc::new(move |t| hermite(&slope_table, t).1),
            preset: "custom".to_owned(),
            table_range: Some(range),
        })
    }

    pub fn preset(&self) -> &str {
        &self.preset
    }

    pub fn w(&self, t: f64) -> f64 {
        (self.w)(t)
    }

    pub fn w_prime(&self, t: f64) -> f64 {
        (self.w_prime)(t)
    }

    /// Checks the warp over `[lo, hi]`: positivity and finiteness of `w`,
    /// and agreement of the declared derivative with a central difference.
    /// For a tabulated warp the range must also stay inside the table.
    pub fn validate_range(&self, lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::SurfaceParameter(format!(
                "invalid warp validation range [{lo}, {hi}]"
            )));
        }
        if let Some((table_lo, table_hi)) = self.table_range {
            if lo < table_lo || hi > table_hi {
                return Err(Error::SurfaceParameter(format!(
                    "range [{lo}, {hi}] leaves the tabulated warp's domain [{table_lo}, {table_hi}]"
                )));
            }
        }
        let samples = if hi > lo { VALIDATION_SAMPLES } else { 1 };
        for i in 0..samples {
            let t = if samples == 1 {
                lo
            } else {
                lo + (hi - lo) * (i as f64 + 0.5) / samples as f64
            };
            let w = self.w(t);
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositiveWarp { t, w });
            }
            let declared = self.w_prime(t);
            if !declared.is_finite() {
                return Err(Error::WarpDerivative {
                    t,
                    declared,
                    fd: f64::NAN,
                });
            }
            let h = DERIVATIVE_CHECK_STEP * (1.0 + t.abs());
            let fd = (self.w(t + h) - self.w(t - h)) / (2.0 * h);
            let scale = 1.0 + declared.abs() + w.abs();
            if (declared - fd).abs() > DERIVATIVE_CHECK_TOL * scale {
                return Err(Error::WarpDerivative { t, declared, fd });
            }
        }
        Ok(())
    }
}

/// Cubic Hermite evaluation of a `(t, w, w')` table: returns `(w, w')` at
/// `t`, extending linearly beyond the ends.
fn hermite(table: &[(f64, f64, f64)], t: f64) -> (f64, f64) {
    let (t0, w0, s0) = table[0];
    if t <= t0 {
        return (w0 + s0 * (t - t0), s0);
    }
    let &(tn, wn, sn) = table.last().expect("table validated non-empty");
    if t >= tn {
        return (wn + sn * (t - tn), sn);
    }
    let k = table.partition_point(|row| row.0 <= t) - 1;
    let (ta, wa, sa) = table[k];
    let (tb, wb, sb) = table[k + 1];
    let dt = tb - ta;
    let s = (t - ta) / dt;
    let (s2, s3) = (s * s, s * s * s);
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * wa
        + (s3 - 2.0 * s2 + s) * dt * sa
        + (-2.0 * s3 + 3.0 * s2) * wb
        + (s3 - s2) * dt * sb;
    let slope = (6.0 * s2 - 6.0 * s) * wa / dt
        + (3.0 * s2 - 4.0 * s + 1.0) * sa
        + (-6.0 * s2 + 6.0 * s) * wb / dt
        + (3.0 * s2 - 2.0 * s) * sb;
    (value, slope)
}
