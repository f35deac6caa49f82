//! Dimensional constants used by the inequality evaluators.

use crate::error::{Error, Result};

/// Volume of the unit ball in `R^n`, by the two-step recurrence
/// `omega_n = 2 pi / n * omega_{n-2}` with `omega_1 = 2`, `omega_2 = pi`.
///
/// The recurrence avoids the Gamma function and is exact in the sense that
/// every value is a product of the two seeds with factors `2 pi / n`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DimensionMismatch(
            "unit ball volume needs dimension >= 1".into(),
        ));
    }
    let mut values = [2.0, std::f64::consts::PI]; // omega_1, omega_2
    if n <= 2 {
        return Ok(values[n - 1]);
    }
    let mut dim = 2;
    while dim < n {
        dim += 1;
        let next = 2.0 * std::f64::consts::PI / dim as f64 * values[0];
        values = [values[1], next];
    }
    Ok(values[1])
}
