//! Gluing two plans along a shared middle marginal.
//!
//! Given couplings `rho12` of `(mu1, mu2)` and `rho23` of `(mu2, mu3)`, the
//! glued triple coupling puts mass
//!
//! ```text
//! gamma(i, j, k) = rho12(i, j) * rho23(j, k) / mu2(j)
//! ```
//!
//! on `(x_i, y_j, z_k)`: conditionally on passing through `y_j`, the first
//! and last legs are independent. Its `(1,3)` marginal — the composition of
//! the two plans — is again a coupling of `(mu1, mu3)`, which is how a
//! projection step and a within-subspace transport combine into a single
//! transport. For discrete measures the construction is exact arithmetic on
//! the entries; no approximation is involved.

use crate::error::{Error, Result};
use crate::measures::discrete::DiscreteMeasure;
use crate::measures::plan::{PlanEntry, TransferencePlan};

/// Maximum relative discrepancy tolerated between the target marginal of the
/// first plan and the source marginal of the second, atom by atom.
pub const MIDDLE_TOL: f64 = 1e-10;

/// One sparse entry of a triple coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleEntry {
    pub first: usize,
    pub middle: usize,
    pub last: usize,
    pub mass: f64,
}

/// A coupling of three measures obtained by gluing two plans.
#[derive(Debug, Clone)]
pub struct TripleCoupling {
    first: DiscreteMeasure,
    middle: DiscreteMeasure,
    last: DiscreteMeasure,
    entries: Vec<TripleEntry>,
}

/// Glues `rho12` and `rho23` along their shared middle marginal.
///
/// The middle measures must agree atom-for-atom: same support points (exact)
/// and masses within [`MIDDLE_TOL`] relative to the total. Index `j` of
/// `rho12.target()` is identified with index `j` of `rho23.source()`.
pub fn glue(rho12: &TransferencePlan, rho23: &TransferencePlan) -> Result<TripleCoupling> {
    let mid_a = rho12.target();
    let mid_b = rho23.source();
    if mid_a.len() != mid_b.len() || mid_a.dim() != mid_b.dim() {
        return Err(Error::MiddleMeasureMismatch(format!(
            "middle supports differ: {} atoms in R^{} vs {} atoms in R^{}",
            mid_a.len(),
            mid_a.dim(),
            mid_b.len(),
            mid_b.dim()
        )));
    }
    let scale = mid_a.total_mass().max(1.0);
    for j in 0..mid_a.len() {
        if mid_a.points()[j] != mid_b.points()[j] {
            return Err(Error::MiddleMeasureMismatch(format!(
                "middle atom {j} differs between the two plans"
            )));
        }
        let deviation = (mid_a.masses()[j] - mid_b.masses()[j]).abs();
        if deviation > MIDDLE_TOL * scale {
            return Err(Error::MiddleMeasureMismatch(format!(
                "middle mass {j} differs by {deviation:.3e}"
            )));
        }
    }

    // Bucket both plans by middle index, then take the product within each
    // bucket, dividing by the middle mass.
    let mut by_middle_12: Vec<Vec<&PlanEntry>> = vec![Vec::new(); mid_a.len()];
    for e in rho12.entries() {
        by_middle_12[e.dst].push(e);
    }
    let mut by_middle_23: Vec<Vec<&PlanEntry>> = vec![Vec::new(); mid_a.len()];
    for e in rho23.entries() {
        by_middle_23[e.src].push(e);
    }
    let mut entries = Vec::new();
    for j in 0..mid_a.len() {
        let mass_j = mid_a.masses()[j];
        for left in &by_middle_12[j] {
            for right in &by_middle_23[j] {
                entries.push(TripleEntry {
                    first: left.src,
                    middle: j,
                    last: right.dst,
                    mass: left.mass * right.mass / mass_j,
                });
            }
        }
    }
    Ok(TripleCoupling {
        first: rho12.source().clone(),
        middle: mid_a.clone(),
        last: rho23.target().clone(),
        entries,
    })
}

impl TripleCoupling {
    pub fn first(&self) -> &DiscreteMeasure {
        &self.first
    }

    pub fn middle(&self) -> &DiscreteMeasure {
        &self.middle
    }

    pub fn last(&self) -> &DiscreteMeasure {
        &self.last
    }

    pub fn entries(&self) -> &[TripleEntry] {
        &self.entries
    }

    /// The `(1,2)` marginal as a plan (should reproduce the glued `rho12`).
    pub fn marginal_12(&self) -> Result<TransferencePlan> {
        let entries = self
            .entries
            .iter()
            .map(|e| PlanEntry {
                src: e.first,
                dst: e.middle,
                mass: e.mass,
            })
            .collect();
        TransferencePlan::new(self.first.clone(), self.middle.clone(), entries)
    }

    /// The `(2,3)` marginal as a plan (should reproduce the glued `rho23`).
    pub fn marginal_23(&self) -> Result<TransferencePlan> {
        let entries = self
            .entries
            .iter()
            .map(|e| PlanEntry {
                src: e.middle,
                dst: e.last,
                mass: e.mass,
            })
            .collect();
        TransferencePlan::new(self.middle.clone(), self.last.clone(), entries)
    }

    /// The `(1,3)` marginal: the composed transport from the first measure to
    /// the last, forgetting the middle stop.
    pub fn compose(&self) -> Result<TransferencePlan> {
        let entries = self
            .entries
            .iter()
            .map(|e| PlanEntry {
                src: e.first,
                dst: e.last,
                mass: e.mass,
            })
            .collect();
        TransferencePlan::new(self.first.clone(), self.last.clone(), entries)
    }
}
