//! Gauss–Legendre quadrature.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton's
//! method from the Chebyshev-based initial guess; weights follow from the
//! derivative values. This is the classical construction (Abramowitz &
//! Stegun §25.4.29): a few Newton steps converge to machine precision for
//! every practical order, and the rule integrates polynomials of degree
//! `2n - 1` exactly.
//!
//! The crate leans on this in two places with quite different demands:
//! smooth integrands (powers of sine, radial profiles) where the rule
//! converges exponentially, and endpoint-singular integrands which callers
//! first regularise by substitution (see
//! [`crate::geometry::grassmann::alpha_n1`]).

use crate::error::{Error, Result};

/// A Gauss–Legendre rule of fixed order on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule. `order` must be at least 1.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parse("quadrature order must be positive".into()));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in +/- pairs; compute the non-negative half.
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    let (_, d2) = legendre_and_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        // The middle node of an odd-order rule is exactly zero.
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`Self::nodes`]; they sum to 2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` by the affinely mapped rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// Evaluates `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [1, 2, 5, 32, 256] {
            let rule = GaussLegendre::new(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn five_point_nodes_match_published_values() {
        // Abramowitz & Stegun table 25.4: 5-point nodes and weights.
        let rule = GaussLegendre::new(5).unwrap();
        let expected_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let expected_weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(rule.nodes()[i], expected_nodes[i], epsilon = 1e-14);
            assert_abs_diff_eq!(rule.weights()[i], expected_weights[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn exact_on_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(8).unwrap();
        for degree in 0..=15 {
            let value = rule.integrate(-1.0, 1.0, |x| x.powi(degree));
            let exact = if degree % 2 == 0 {
                2.0 / (degree as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(value, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn integrates_sine_over_half_period() {
        let rule = GaussLegendre::new(32).unwrap();
        let value = rule.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert_abs_diff_eq!(value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn high_order_rule_is_well_formed() {
        let rule = GaussLegendre::new(256).unwrap();
        // Nodes strictly ascending inside (-1, 1), weights positive.
        for w in rule.weights() {
            assert!(*w > 0.0);
        }
        for pair in rule.nodes().windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(rule.nodes()[0] > -1.0 && *rule.nodes().last().unwrap() < 1.0);
    }
}
