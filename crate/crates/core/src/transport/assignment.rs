//! Linear assignment by the Hungarian method with potentials.
//!
//! When both measures have the same number of atoms and uniform masses, the
//! transportation polytope's vertices are permutation matrices, so the
//! optimal plan is an assignment. This `O(n^3)` shortest-augmenting-path
//! solver (Jonker–Volgenant style row addition with dual potentials) is the
//! fast path for that case; the general simplex handles everything else.
//! Throughout, the potentials satisfy `u_i + v_j <= c_ij` with equality on
//! matched pairs — the same optimality certificate the simplex emits.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An optimal assignment with its dual certificate.
#[derive(Debug, Clone)]
pub struct Assignment {
    /// `target[i]` is the column assigned to row `i`.
    pub target: Vec<usize>,
    /// Row potentials.
    pub row_duals: Vec<f64>,
    /// Column potentials.
    pub col_duals: Vec<f64>,
    /// Total assignment cost.
    pub cost: f64,
}

/// Minimises `sum_i c[i, sigma(i)]` over permutations `sigma`.
pub fn solve_assignment(cost: &DMatrix<f64>) -> Result<Assignment> {
    let n = cost.nrows();
    if n == 0 || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment needs a square cost matrix, got {}x{}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::DimensionMismatch("non-finite cost entry".into()));
    }

    // Index n plays the role of the virtual row/column in the classical
    // formulation: `matched_row[n]` temporarily holds the row being inserted
    // and `v[n]` absorbs dual shifts.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![n; n + 1];
    let mut predecessor = vec![0usize; n + 1];

    for row in 0..n {
        matched_row[n] = row;
        let mut current_col = n;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];
        // Grow the alternating tree until an unmatched column is reached.
        loop {
            visited[current_col] = true;
            let active_row = matched_row[current_col];
            let mut delta = f64::INFINITY;
            let mut next_col = 0;
            for col in 0..n {
                if visited[col] {
                    continue;
                }
                let slack = cost[(active_row, col)] - u[active_row] - v[col];
                if slack < min_slack[col] {
                    min_slack[col] = slack;
                    predecessor[col] = current_col;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    next_col = col;
                }
            }
            for col in 0..=n {
                if visited[col] {
                    u[matched_row[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            current_col = next_col;
            if matched_row[current_col] == n {
                break;
            }
        }
        // Augment along the alternating path.
        while current_col != n {
            let prev = predecessor[current_col];
            matched_row[current_col] = matched_row[prev];
            current_col = prev;
        }
    }

    let mut target = vec![0usize; n];
    for col in 0..n {
        target[matched_row[col]] = col;
    }
    let cost_total = (0..n).map(|i| cost[(i, target[i])]).sum();
    Ok(Assignment {
        target,
        row_duals: u[..n].to_vec(),
        col_duals: v[..n].to_vec(),
        cost: cost_total,
    })
}
