//! Haar-random subspaces and the Grassmannian average of the plane cosine.
//!
//! The constant computed here,
//!
//! ```text
//! alpha_{n,k} = average over n-planes E in R^{n+k} of |cos(E, F)|^{1/n},
//! ```
//!
//! (with `F` any fixed reference `n`-plane; the Haar average does not depend
//! on it) enters the classical isoperimetric inequality as the price of
//! replacing the projection-weighted volume by the plain volume.
//!
//! Two routes are implemented and cross-checked: Monte Carlo over Haar
//! samples for any `(n, k)`, and, for `k = 1`, the one-dimensional reduction
//!
//! ```text
//! alpha_{n,1} = ∫_0^pi |cos r|^{1/n} sin^{n-1} r dr / ∫_0^pi sin^{n-1} r dr,
//! ```
//!
//! evaluated by Gauss–Legendre quadrature split at `r = pi/2`, where
//! `|cos r|^{1/n}` has a derivative singularity. On each half the
//! substitution `r = pi/2 -/+ s^n` turns the integrand into an analytic
//! function, so the split rule converges to machine precision.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::subspace::{plane_cosine, Subspace};
use crate::linalg;
use crate::quadrature::GaussLegendre;

/// Monte Carlo estimate of a Grassmannian average.
#[derive(Debug, Clone, Copy)]
pub struct AlphaEstimate {
    pub value: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub samples: usize,
}

/// SplitMix64: the finaliser used to derive independent per-sample seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5151_7357_2A5B_17D1)))
}

/// Draws a Haar-distributed `n`-plane in `R^{ambient_dim}`: orthonormalise a
/// standard Gaussian `ambient x n` matrix keeping the positive-diagonal sign
/// convention. Deterministic in `seed`.
pub fn haar_plane_sample(ambient_dim: usize, n: usize, seed: u64) -> Result<Subspace> {
    if n == 0 || n > ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot sample a {n}-plane in R^{ambient_dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_plane_from_rng(ambient_dim, n, &mut rng)
}

fn haar_plane_from_rng(ambient_dim: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Subspace> {
    loop {
        let columns: Vec<DVector<f64>> = (0..n)
            .map(|_| DVector::from_fn(ambient_dim, |_, _| rng.sample(StandardNormal)))
            .collect();
        // A Gaussian draw is almost surely full rank; redraw on the
        // measure-zero failure rather than bias the distribution.
        if let Ok(frame) = linalg::orthonormalize(&columns, &linalg::euclidean_inner) {
            return Subspace::from_vectors(&frame);
        }
    }
}

/// Monte Carlo estimate of `alpha_{n,k}` from `num_samples` Haar draws.
///
/// The seed space is partitioned per sample index, so the estimate is
/// independent of the number of worker threads: sample `i` always uses the
/// RNG stream derived from `(seed, i)`, and the final reduction is a
/// sequential sum in index order.
pub fn alpha_constant(n: usize, k: usize, num_samples: usize, seed: u64) -> Result<AlphaEstimate> {
    if n == 0 || k == 0 {
        return Err(Error::DimensionMismatch(
            "alpha constant needs n >= 1 and k >= 1".into(),
        ));
    }
    if num_samples < 2 {
        return Err(Error::Parse("need at least 2 samples".into()));
    }
    let ambient = n + k;
    let reference = Subspace::coordinate(ambient, &(0..n).collect::<Vec<_>>())?;
    let exponent = 1.0 / n as f64;

    let values: Vec<f64> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, i as u64));
            let e = haar_plane_from_rng(ambient, n, &mut rng)
                .expect("Gaussian frame orthonormalisation cannot fail persistently");
            plane_cosine(&reference, &e)
                .expect("dimensions match by construction")
                .powf(exponent)
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in &values {
        sum += v;
        sum_sq += v * v;
    }
    let nf = num_samples as f64;
    let mean = sum / nf;
    let variance = ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    Ok(AlphaEstimate {
        value: mean,
        std_error: (variance / nf).sqrt(),
        samples: num_samples,
    })
}

/// Default Gauss–Legendre order per half-interval for the `k = 1` reduction.
pub const ALPHA_QUADRATURE_ORDER: usize = 256;

/// `∫_0^pi sin^m r dr` by Gauss–Legendre on the symmetric halves.
pub fn sine_power_integral(m: usize, order: usize) -> Result<f64> {
    let rule = GaussLegendre::new(order)?;
    let half = rule.integrate(0.0, std::f64::consts::FRAC_PI_2, |r| r.sin().powi(m as i32));
    Ok(2.0 * half)
}

/// The `k = 1` constant by quadrature: see the module docs for the
/// substitution that removes the `|cos r|^{1/n}` singularity at `pi/2`.
pub fn alpha_n1(n: usize, order: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DimensionMismatch("alpha_n1 needs n >= 1".into()));
    }
    let nf = n as f64;
    let rule = GaussLegendre::new(order)?;

    // One half of the numerator: ∫_0^{pi/2} |cos r|^{1/n} sin^{n-1} r dr.
    // With x = pi/2 - r and then x = s^n the integrand becomes
    //   n s^{n-1} sin(s^n)^{1/n} cos(s^n)^{n-1},
    // analytic on [0, (pi/2)^{1/n}] because sin(x)^{1/n} = x^{1/n}(sin x / x)^{1/n}.
    let upper = std::f64::consts::FRAC_PI_2.powf(1.0 / nf);
    let half_numerator = |rule: &GaussLegendre| {
        rule.integrate(0.0, upper, |s| {
            let x = s.powi(n as i32);
            nf * s.powi(n as i32 - 1) * x.sin().powf(1.0 / nf) * x.cos().powi(n as i32 - 1)
        })
    };
    // The two halves of [0, pi] contribute equally (the integrand is
    // symmetric about pi/2); evaluate both to keep the split explicit.
    let numerator = half_numerator(&rule) + half_numerator(&rule);
    let denominator = sine_power_integral(n - 1, order)?;
    Ok(numerator / denominator)
}

/// Closed-form lower bound for `alpha_{n,1}`:
/// `cos^{1/n}(pi/2 - 1/n) * (W_{n-1} - 1/(2n)) / W_{n-1}` with
/// `W_m = ∫_0^pi sin^m`.
pub fn alpha_n1_lower_bound(n: usize, order: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DimensionMismatch("bound needs n >= 1".into()));
    }
    let nf = n as f64;
    let w = sine_power_integral(n - 1, order)?;
    let cos_term = (std::f64::consts::FRAC_PI_2 - 1.0 / nf).cos().powf(1.0 / nf);
    Ok(cos_term * (w - 1.0 / (2.0 * nf)) / w)
}
