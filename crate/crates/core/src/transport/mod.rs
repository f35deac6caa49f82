//! Exact optimal transport between discrete measures, and the
//! project–transport–compose construction for measures on submanifolds.
//!
//! [`solve_exact`] returns an optimal plan for the quadratic cost together
//! with dual potentials and a cyclical-monotonicity certificate. Uniform
//! equal-size instances route to the assignment solver; everything else goes
//! through the transportation simplex. [`composed_solution`] realises the
//! two-stage transport — orthogonal projection onto a subspace followed by
//! optimal transport inside it — and reports the exact Pythagorean cost
//! split the two stages satisfy.

pub mod assignment;
pub mod simplex;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::unit_ball_volume;
use crate::error::{Error, Result};
use crate::geometry::subspace::Subspace;
use crate::measures::{
    certify_monotone, glue, CyclePolicy, DiscreteMeasure, MonotoneCertificate, PlanEntry,
    TransferencePlan,
};

pub use assignment::{solve_assignment, Assignment};
pub use simplex::{solve_transportation, SimplexSolution};

/// Relative tolerance for detecting uniform masses (assignment fast path)
/// and for checking that two measures carry equal total mass.
pub const MASS_TOL: f64 = 1e-12;

/// Atoms of a composition target may sit at most this far off the subspace,
/// relative to their norm.
pub const SUBSPACE_SUPPORT_TOL: f64 = 1e-9;

/// Dual potentials certifying optimality: `source[i] + target[j] <= c_ij`
/// everywhere, with equality wherever the plan puts mass.
#[derive(Debug, Clone)]
pub struct DualPotentials {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

/// Summary of one exact solve.
#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Optimal quadratic transport cost (squared 2-Wasserstein distance for
    /// normalised measures).
    pub cost: f64,
    /// Entries in the optimal plan.
    pub support_size: usize,
    /// Primal cost minus the dual objective; near zero at an optimum.
    pub dual_gap: f64,
    /// Cyclical-monotonicity check of the returned support.
    pub monotone_certificate: MonotoneCertificate,
    /// Simplex pivots (zero when the assignment fast path ran).
    pub iterations: usize,
}

/// An optimal plan with its certificates.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub plan: TransferencePlan,
    pub potentials: DualPotentials,
    pub report: SolverReport,
}

/// Squared-distance cost matrix between two supports.
pub fn cost_matrix(source: &DiscreteMeasure, target: &DiscreteMeasure) -> DMatrix<f64> {
    let mut cost = DMatrix::zeros(source.len(), target.len());
    for (i, x) in source.points().iter().enumerate() {
        for (j, y) in target.points().iter().enumerate() {
            cost[(i, j)] = (x - y).norm_squared();
        }
    }
    cost
}

fn is_uniform(measure: &DiscreteMeasure) -> bool {
    let mean = measure.total_mass() / measure.len() as f64;
    measure
        .masses()
        .iter()
        .all(|&m| (m - mean).abs() <= MASS_TOL * mean)
}

/// Solves the quadratic-cost transport problem exactly.
///
/// The measures must have equal total mass within [`MASS_TOL`] (relative)
/// and live in the same ambient dimension. The support of the returned plan
/// is certified cyclically monotone according to `policy`.
pub fn solve_exact(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    policy: CyclePolicy,
) -> Result<ExactSolution> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "source lives in R^{}, target in R^{}",
            source.dim(),
            target.dim()
        )));
    }
    let (ts, tt) = (source.total_mass(), target.total_mass());
    if (ts - tt).abs() > MASS_TOL * ts.max(tt) {
        return Err(Error::MassMismatch {
            source_total: ts,
            target_total: tt,
        });
    }
    let cost = cost_matrix(source, target);

    let (entries, potentials, iterations, total_cost);
    if source.len() == target.len() && is_uniform(source) && is_uniform(target) {
        let solved = solve_assignment(&cost)?;
        let mass = ts / source.len() as f64;
        entries = solved
            .target
            .iter()
            .enumerate()
            .map(|(i, &j)| PlanEntry {
                src: i,
                dst: j,
                mass,
            })
            .collect::<Vec<_>>();
        total_cost = solved.cost * mass;
        potentials = DualPotentials {
            source: solved.row_duals,
            target: solved.col_duals,
        };
        iterations = 0;
    } else {
        let solved = solve_transportation(&cost, source.masses(), target.masses())?;
        entries = solved
            .flow
            .iter()
            .map(|&(i, j, f)| PlanEntry {
                src: i,
                dst: j,
                mass: f,
            })
            .collect::<Vec<_>>();
        total_cost = solved.cost;
        potentials = DualPotentials {
            source: solved.row_duals,
            target: solved.col_duals,
        };
        iterations = solved.iterations;
    }

    let plan = TransferencePlan::new(source.clone(), target.clone(), entries)?;
    let dual_value: f64 = source
        .masses()
        .iter()
        .zip(&potentials.source)
        .map(|(m, u)| m * u)
        .sum::<f64>()
        + target
            .masses()
            .iter()
            .zip(&potentials.target)
            .map(|(m, v)| m * v)
            .sum::<f64>();
    let monotone_certificate = certify_monotone(&plan, policy);
    let support_size = plan.support_size();
    Ok(ExactSolution {
        plan,
        potentials,
        report: SolverReport {
            cost: total_cost,
            support_size,
            dual_gap: total_cost - dual_value,
            monotone_certificate,
            iterations,
        },
    })
}

/// 2-Wasserstein distance. Skips monotonicity certification; use
/// [`solve_exact`] when the certificate matters.
pub fn wasserstein2(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<f64> {
    let solution = solve_exact(
        source,
        target,
        CyclePolicy::Sampled {
            cycles: 0,
            max_len: 2,
            seed: 0,
        },
    )?;
    Ok(solution.report.cost.max(0.0).sqrt())
}

/// The deterministic plan transporting `measure` to its orthogonal projection
/// onto `subspace` (atoms about to coincide are merged). The plan's cost is
/// the integrated squared distance to the subspace.
pub fn projection_plan(
    measure: &DiscreteMeasure,
    subspace: &Subspace,
) -> Result<(DiscreteMeasure, TransferencePlan)> {
    let (projected, assignment) = measure.push_forward(|p| subspace.project(p))?;
    let entries = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| PlanEntry {
            src: i,
            dst: j,
            mass: measure.masses()[i],
        })
        .collect();
    let plan = TransferencePlan::new(measure.clone(), projected.clone(), entries)?;
    Ok((projected, plan))
}

/// Diagnostic for whether a deterministic (single-destination) optimal
/// transport can exist after projecting onto a subspace.
#[derive(Debug, Clone)]
pub struct MongeFeasibility {
    /// Source atoms the projection identifies, grouped by image atom; only
    /// groups with at least two members are listed.
    pub collision_groups: Vec<Vec<usize>>,
    /// True when the projection is injective on the support.
    pub injective: bool,
    /// Human-readable summary of the obstruction (or its absence).
    pub note: String,
}

/// Reports projection collisions of the support of `measure` onto
/// `subspace`.
///
/// When atoms collide, the projected measure cannot remember where mass came
/// from: a transport map defined on the projected support moves the merged
/// atom as one, and plans from the original measure may have to split it.
pub fn monge_problem_solvability_note(
    measure: &DiscreteMeasure,
    subspace: &Subspace,
) -> Result<MongeFeasibility> {
    let (projected, assignment) = measure.push_forward(|p| subspace.project(p))?;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); projected.len()];
    for (src, &img) in assignment.iter().enumerate() {
        groups[img].push(src);
    }
    let collision_groups: Vec<Vec<usize>> =
        groups.into_iter().filter(|g| g.len() >= 2).collect();
    let injective = collision_groups.is_empty();
    let note = if injective {
        format!(
            "projection is injective on the {} support atoms; the composed \
             transport is induced by a point map wherever the within-subspace \
             stage is",
            measure.len()
        )
    } else {
        let collided: usize = collision_groups.iter().map(|g| g.len()).sum();
        format!(
            "projection identifies {collided} of {} support atoms into {} \
             image points; mass arriving there may need to split, so the \
             composed optimal transport need not be induced by a point map",
            measure.len(),
            collision_groups.len()
        )
    };
    Ok(MongeFeasibility {
        collision_groups,
        injective,
        note,
    })
}

/// The project–transport–compose solution of a transport problem whose
/// target lies inside a subspace.
#[derive(Debug, Clone)]
pub struct ComposedSolution {
    /// Pushforward of the source under the orthogonal projection.
    pub projected: DiscreteMeasure,
    /// Deterministic plan from the source onto its projection.
    pub projection: TransferencePlan,
    /// Optimal transport from the projected measure to the target, inside
    /// the subspace.
    pub inner: ExactSolution,
    /// The glued `(source, target)` plan.
    pub plan: TransferencePlan,
    /// Cost of the projection leg.
    pub projection_cost: f64,
    /// Cost of the within-subspace leg.
    pub inner_cost: f64,
    /// Cost of the composed plan.
    pub total_cost: f64,
    /// `total - (projection + inner)`; zero up to round-off because the two
    /// legs are orthogonal.
    pub pythagoras_residual: f64,
}

/// Projects `source` onto `subspace`, transports optimally to `target`
/// within the subspace, and glues the two legs into one plan.
///
/// Every atom of `target` must lie in the subspace: the orthogonal split
/// `|x - z|^2 = |x - Px|^2 + |Px - z|^2` (for `z` in the subspace) is what
/// makes the composed cost the exact sum of the stage costs.
pub fn composed_solution(
    source: &DiscreteMeasure,
    subspace: &Subspace,
    target: &DiscreteMeasure,
    policy: CyclePolicy,
) -> Result<ComposedSolution> {
    for (index, y) in target.points().iter().enumerate() {
        let off = (y - subspace.project(y)).norm();
        if off > SUBSPACE_SUPPORT_TOL * (1.0 + y.norm()) {
            return Err(Error::DimensionMismatch(format!(
                "target atom {index} lies {off:.3e} off the subspace"
            )));
        }
    }
    let (projected, projection) = projection_plan(source, subspace)?;
    let inner = solve_exact(&projected, target, policy)?;
    let triple = glue(&projection, &inner.plan)?;
    let plan = triple.compose()?;

    let projection_cost = projection.cost();
    let inner_cost = inner.report.cost;
    let total_cost = plan.cost();
    Ok(ComposedSolution {
        projected,
        projection,
        pythagoras_residual: total_cost - (projection_cost + inner_cost),
        inner,
        plan,
        projection_cost,
        inner_cost,
        total_cost,
    })
}

/// How to discretise the uniform measure on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallSampling {
    /// Centres of a cubic lattice of spacing `(vol(B^n)/atoms)^{1/n}` that
    /// fall inside the ball; deterministic, atom count approximate.
    Grid,
    /// Rejection sampling from the cube; exactly the requested atom count.
    MonteCarlo { seed: u64 },
}

/// Smallest atom count a ball discretisation accepts.
pub const BALL_MIN_ATOMS: usize = 10;

/// A discretised uniform unit ball sitting inside a subspace of the ambient
/// space. The atoms are ambient points; [`Self::coords`] recovers their
/// intrinsic coordinates.
#[derive(Debug, Clone)]
pub struct BallTarget {
    pub subspace: Subspace,
    pub measure: DiscreteMeasure,
}

impl BallTarget {
    /// Intrinsic coordinates of the atoms in the subspace's basis.
    pub fn coords(&self) -> Vec<DVector<f64>> {
        self.measure
            .points()
            .iter()
            .map(|p| self.subspace.coords(p))
            .collect()
    }
}

/// A discrete stand-in for the uniform probability measure on the unit ball
/// of the subspace `e`, centred at the origin, with roughly (grid) or
/// exactly (Monte Carlo) `atoms` atoms of equal mass. Atoms are embedded in
/// the ambient space through the subspace's basis, so the measure can serve
/// directly as a transport target for measures living off the subspace.
pub fn ball_target(e: &Subspace, atoms: usize, sampling: BallSampling) -> Result<BallTarget> {
    if atoms < BALL_MIN_ATOMS {
        return Err(Error::TooFewAtoms {
            requested: atoms,
            minimum: BALL_MIN_ATOMS,
        });
    }
    let dim = e.dim();
    let coords = match sampling {
        BallSampling::Grid => {
            let spacing = (unit_ball_volume(dim)? / atoms as f64).powf(1.0 / dim as f64);
            let half_cells = (1.0 / spacing).ceil() as i64 + 1;
            let mut coords = Vec::new();
            let mut index = vec![-half_cells; dim];
            'cells: loop {
                let p: DVector<f64> = DVector::from_iterator(
                    dim,
                    index.iter().map(|&k| (k as f64 + 0.5) * spacing),
                );
                if p.norm() <= 1.0 {
                    coords.push(p);
                }
                for axis in (0..dim).rev() {
                    index[axis] += 1;
                    if index[axis] < half_cells {
                        continue 'cells;
                    }
                    index[axis] = -half_cells;
                }
                break;
            }
            coords
        }
        BallSampling::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut coords = Vec::with_capacity(atoms);
            while coords.len() < atoms {
                let p: DVector<f64> =
                    DVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(-1.0..1.0)));
                if p.norm() <= 1.0 {
                    coords.push(p);
                }
            }
            coords
        }
    };
    let measure = DiscreteMeasure::uniform(coords.iter().map(|c| e.embed(c)).collect())?;
    Ok(BallTarget {
        subspace: e.clone(),
        measure,
    })
}
