//! Primal network simplex for the discrete transportation problem.
//!
//! Minimises `sum_ij c_ij f_ij` over non-negative flows with prescribed row
//! sums (supplies) and column sums (demands). The basis is a spanning tree of
//! the bipartite supply/demand graph, maintained explicitly:
//!
//! * start from the north-west-corner flow,
//! * price with Dantzig's rule (most negative reduced cost, ties broken
//!   lexicographically) and fall back to Bland's rule — which cannot cycle —
//!   after a long streak of degenerate pivots,
//! * find the pivot cycle by walking the tree path between the endpoints of
//!   the entering arc.
//!
//! Termination yields tree duals `u, v` with `u_i + v_j <= c_ij` up to the
//! pricing tolerance on all arcs and equality on the support, which is the
//! optimality certificate the caller repackages.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest allowed value of `rows * cols`; beyond this the dense tableau and
/// pricing scans stop being desk-scale.
pub const MAX_CELLS: usize = 4_000_000;

/// Relative mismatch tolerated between total supply and total demand.
pub const BALANCE_TOL: f64 = 1e-10;

/// Pricing tolerance relative to the largest |cost| entry: arcs with reduced
/// cost above `-OPT_TOL * scale` count as non-improving.
pub const OPT_TOL: f64 = 1e-12;

/// Consecutive degenerate pivots before switching from Dantzig to Bland
/// pricing, as a multiple of `rows + cols`.
const DEGENERATE_STREAK_FACTOR: usize = 3;

/// An optimal basic solution of the transportation problem.
#[derive(Debug, Clone)]
pub struct SimplexSolution {
    /// Positive flows `(row, col, amount)`, sorted by `(row, col)`.
    pub flow: Vec<(usize, usize, f64)>,
    /// Row duals `u` (one per supply).
    pub row_duals: Vec<f64>,
    /// Column duals `v` (one per demand).
    pub col_duals: Vec<f64>,
    /// Number of simplex pivots performed.
    pub iterations: usize,
    /// Minimal transport cost.
    pub cost: f64,
}

/// Solves the balanced transportation problem given a dense cost matrix.
///
/// Supplies and demands must be strictly positive with equal totals (within
/// [`BALANCE_TOL`] relative); demands are rescaled to balance exactly so the
/// flow marginals close to round-off.
pub fn solve_transportation(
    cost: &DMatrix<f64>,
    supply: &[f64],
    demand: &[f64],
) -> Result<SimplexSolution> {
    let (m, n) = (supply.len(), demand.len());
    if cost.nrows() != m || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix is {}x{} but marginals are {}x{}",
            cost.nrows(),
            cost.ncols(),
            m,
            n
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyMeasure);
    }
    if m * n > MAX_CELLS {
        return Err(Error::ProblemTooLarge {
            size: m * n,
            limit: MAX_CELLS,
        });
    }
    for (index, &s) in supply.iter().enumerate() {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::BadMass { index, mass: s });
        }
    }
    for (index, &d) in demand.iter().enumerate() {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::BadMass { index, mass: d });
        }
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::DimensionMismatch("non-finite cost entry".into()));
    }
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > BALANCE_TOL * total_supply.max(total_demand) {
        return Err(Error::MassMismatch {
            source_total: total_supply,
            target_total: total_demand,
        });
    }
    let balance = total_supply / total_demand;
    let demand: Vec<f64> = demand.iter().map(|d| d * balance).collect();

    let mut state = State::new(cost, supply, &demand);
    state.northwest_corner(supply, &demand);

    let scale = 1.0 + cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = OPT_TOL * scale;
    let degenerate_limit = DEGENERATE_STREAK_FACTOR * (m + n);
    let iteration_limit = 20_000 + 10 * (m + n) * (m + n).min(2000);

    let mut iterations = 0;
    let mut degenerate_streak = 0;
    loop {
        state.compute_duals();
        let entering = if degenerate_streak > degenerate_limit {
            state.find_entering_bland(tol)
        } else {
            state.find_entering_dantzig(tol)
        };
        let Some(arc) = entering else { break };
        iterations += 1;
        if iterations > iteration_limit {
            return Err(Error::SolverStalled { iterations });
        }
        let theta = state.pivot(arc);
        if theta <= 0.0 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
    }

    let mut flow = Vec::new();
    let mut total_cost = 0.0;
    for arc in 0..m * n {
        let f = state.flow[arc];
        if state.in_basis[arc] && f > 0.0 {
            let (i, j) = (arc / n, arc % n);
            flow.push((i, j, f));
            total_cost += cost[(i, j)] * f;
        }
    }
    Ok(SimplexSolution {
        flow,
        row_duals: state.u,
        col_duals: state.v,
        iterations,
        cost: total_cost,
    })
}

struct State<'a> {
    cost: &'a DMatrix<f64>,
    m: usize,
    n: usize,
    flow: Vec<f64>,
    in_basis: Vec<bool>,
    /// Tree adjacency: node -> basis arc ids. Nodes `0..m` are rows, `m..m+n`
    /// are columns; arc `a` joins row `a / n` and column `m + a % n`.
    adjacency: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(cost: &'a DMatrix<f64>, supply: &[f64], demand: &[f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        Self {
            cost,
            m,
            n,
            flow: vec![0.0; m * n],
            in_basis: vec![false; m * n],
            adjacency: vec![Vec::new(); m + n],
            u: vec![0.0; m],
            v: vec![0.0; n],
        }
    }

    fn add_arc(&mut self, arc: usize) {
        self.in_basis[arc] = true;
        let (i, j) = (arc / self.n, arc % self.n);
        self.adjacency[i].push(arc);
        self.adjacency[self.m + j].push(arc);
    }

    fn remove_arc(&mut self, arc: usize) {
        self.in_basis[arc] = false;
        let (i, j) = (arc / self.n, arc % self.n);
        self.adjacency[i].retain(|&a| a != arc);
        self.adjacency[self.m + j].retain(|&a| a != arc);
    }

    /// Initial basic flow: sweep rows and columns from the north-west corner,
    /// saturating whichever marginal runs out first. Exactly `m + n - 1` arcs
    /// enter the basis (some possibly at zero flow).
    fn northwest_corner(&mut self, supply: &[f64], demand: &[f64]) {
        let mut remaining_supply = supply.to_vec();
        let mut remaining_demand = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let arc = i * self.n + j;
            let moved = remaining_supply[i].min(remaining_demand[j]);
            self.flow[arc] = moved.max(0.0);
            self.add_arc(arc);
            remaining_supply[i] -= moved;
            remaining_demand[j] -= moved;
            if i == self.m - 1 && j == self.n - 1 {
                break;
            }
            // Advance exactly one index per step so the arc count lands on
            // m + n - 1 even through degenerate ties.
            if remaining_supply[i] <= remaining_demand[j] && i < self.m - 1 || j == self.n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(
            self.in_basis.iter().filter(|&&b| b).count(),
            self.m + self.n - 1
        );
    }

    /// Tree duals: fix `u_0 = 0` and propagate `u_i + v_j = c_ij` over basis
    /// arcs by breadth-first search.
    fn compute_duals(&mut self) {
        let nodes = self.m + self.n;
        let mut visited = vec![false; nodes];
        let mut queue = std::collections::VecDeque::new();
        self.u[0] = 0.0;
        visited[0] = true;
        queue.push_back(0usize);
        while let Some(node) = queue.pop_front() {
            for &arc in &self.adjacency[node] {
                let (i, j) = (arc / self.n, arc % self.n);
                let (row_node, col_node) = (i, self.m + j);
                let other = if node == row_node { col_node } else { row_node };
                if visited[other] {
                    continue;
                }
                if other == col_node {
                    self.v[j] = self.cost[(i, j)] - self.u[i];
                } else {
                    self.u[i] = self.cost[(i, j)] - self.v[j];
                }
                visited[other] = true;
                queue.push_back(other);
            }
        }
        debug_assert!(visited.iter().all(|&b| b), "basis is not a spanning tree");
    }

    /// Most negative reduced cost, ties broken by smallest `(row, col)`.
    fn find_entering_dantzig(&self, tol: f64) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.m {
            for j in 0..self.n {
                let arc = i * self.n + j;
                if self.in_basis[arc] {
                    continue;
                }
                let reduced = self.cost[(i, j)] - self.u[i] - self.v[j];
                let better = match best {
                    None => reduced < -tol,
                    Some((r, _)) => reduced < r,
                };
                if better && reduced < -tol {
                    best = Some((reduced, arc));
                }
            }
        }
        best.map(|(_, arc)| arc)
    }

    /// First improving arc in lexicographic order (Bland's anti-cycling rule).
    fn find_entering_bland(&self, tol: f64) -> Option<usize> {
        for i in 0..self.m {
            for j in 0..self.n {
                let arc = i * self.n + j;
                if !self.in_basis[arc] && self.cost[(i, j)] - self.u[i] - self.v[j] < -tol {
                    return Some(arc);
                }
            }
        }
        None
    }

    /// Tree path between two nodes as a list of arcs.
    fn tree_path(&self, from: usize, to: usize) -> Vec<usize> {
        let nodes = self.m + self.n;
        let mut parent_arc = vec![usize::MAX; nodes];
        let mut visited = vec![false; nodes];
        let mut queue = std::collections::VecDeque::new();
        visited[from] = true;
        queue.push_back(from);
        'bfs: while let Some(node) = queue.pop_front() {
            for &arc in &self.adjacency[node] {
                let (i, j) = (arc / self.n, arc % self.n);
                let other = if node == i { self.m + j } else { i };
                if !visited[other] {
                    visited[other] = true;
                    parent_arc[other] = arc;
                    if other == to {
                        break 'bfs;
                    }
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = to;
        while node != from {
            let arc = parent_arc[node];
            path.push(arc);
            let (i, j) = (arc / self.n, arc % self.n);
            node = if node == i { self.m + j } else { i };
        }
        path.reverse();
        path
    }

    /// Pivots the entering arc into the basis and returns the moved flow.
    fn pivot(&mut self, entering: usize) -> f64 {
        let (i, j) = (entering / self.n, entering % self.n);
        // Path from the entering arc's row to its column; together with the
        // entering arc it closes the unique basis cycle. Walking from the row
        // end, path arcs alternate minus, plus, minus, ...
        let path = self.tree_path(i, self.m + j);
        let mut leaving: Option<(f64, usize)> = None;
        for (pos, &arc) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let f = self.flow[arc];
                let replace = match leaving {
                    None => true,
                    Some((theta, best)) => f < theta || (f == theta && arc < best),
                };
                if replace {
                    leaving = Some((f, arc));
                }
            }
        }
        let (theta, leaving_arc) = leaving.expect("pivot cycle has a leaving arc");
        for (pos, &arc) in path.iter().enumerate() {
            if pos % 2 == 0 {
                self.flow[arc] = (self.flow[arc] - theta).max(0.0);
            } else {
                self.flow[arc] += theta;
            }
        }
        self.flow[leaving_arc] = 0.0;
        self.remove_arc(leaving_arc);
        self.flow[entering] = theta;
        self.add_arc(entering);
        theta
    }
}
