//! Couplings between two discrete measures.
//!
//! A [`TransferencePlan`] owns copies of its marginals and a sparse list of
//! `(source, target, mass)` entries. The constructor verifies that row and
//! column sums reproduce the marginal masses, so any plan that exists is a
//! genuine coupling. Costs are always squared Euclidean distances; other
//! costs enter through the warped-geometry layer, which re-embeds points
//! before building plans.

use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::measures::discrete::DiscreteMeasure;

/// Maximum allowed deviation between a plan's row/column sums and the
/// declared marginal masses, relative to the marginal's total mass.
pub const MARGINAL_TOL: f64 = 1e-10;

/// One sparse entry of a plan: `mass` travels from source atom `src` to
/// target atom `dst`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub src: usize,
    pub dst: usize,
    pub mass: f64,
}

/// A coupling of two discrete measures.
#[derive(Debug, Clone)]
pub struct TransferencePlan {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    entries: Vec<PlanEntry>,
}

impl TransferencePlan {
    /// Builds a plan and verifies both marginals. Entries with non-positive
    /// or non-finite mass are rejected; entries are stored sorted by
    /// `(src, dst)` and duplicates are merged.
    pub fn new(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        mut entries: Vec<PlanEntry>,
    ) -> Result<Self> {
        for e in &entries {
            if e.src >= source.len() {
                return Err(Error::PointIndex {
                    index: e.src,
                    len: source.len(),
                });
            }
            if e.dst >= target.len() {
                return Err(Error::PointIndex {
                    index: e.dst,
                    len: target.len(),
                });
            }
            if !(e.mass.is_finite() && e.mass > 0.0) {
                return Err(Error::BadMass {
                    index: e.src,
                    mass: e.mass,
                });
            }
        }
        entries.sort_by_key(|e| (e.src, e.dst));
        entries.dedup_by(|later, earlier| {
            if later.src == earlier.src && later.dst == earlier.dst {
                earlier.mass += later.mass;
                true
            } else {
                false
            }
        });

        let mut row = vec![0.0; source.len()];
        let mut col = vec![0.0; target.len()];
        for e in &entries {
            row[e.src] += e.mass;
            col[e.dst] += e.mass;
        }
        let scale = source.total_mass().max(target.total_mass()).max(1.0);
        for (sums, masses, side) in [
            (&row, source.masses(), "source"),
            (&col, target.masses(), "target"),
        ] {
            let deviation = sums
                .iter()
                .zip(masses)
                .map(|(s, m)| (s - m).abs())
                .fold(0.0f64, f64::max);
            if deviation > MARGINAL_TOL * scale {
                return Err(Error::MarginalMismatch {
                    side: side.into(),
                    deviation,
                    tol: MARGINAL_TOL * scale,
                });
            }
        }
        Ok(Self {
            source,
            target,
            entries,
        })
    }

    /// The coupling of a measure with itself along the identity map.
    pub fn identity(measure: &DiscreteMeasure) -> Self {
        let entries = measure
            .masses()
            .iter()
            .enumerate()
            .map(|(i, &mass)| PlanEntry {
                src: i,
                dst: i,
                mass,
            })
            .collect();
        Self {
            source: measure.clone(),
            target: measure.clone(),
            entries,
        }
    }

    /// The product coupling `mu (x) nu / total`, which transports every atom
    /// to every atom. Useful as a feasible but far-from-optimal reference.
    pub fn independent(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<Self> {
        let total = target.total_mass();
        let mut entries = Vec::with_capacity(source.len() * target.len());
        for (i, &mi) in source.masses().iter().enumerate() {
            for (j, &mj) in target.masses().iter().enumerate() {
                entries.push(PlanEntry {
                    src: i,
                    dst: j,
                    mass: mi * mj / total,
                });
            }
        }
        Self::new(source.clone(), target.clone(), entries)
    }

    /// The plan induced by a deterministic assignment `src -> map[src]`
    /// carrying each source atom's full mass.
    pub fn from_map(
        source: &DiscreteMeasure,
        target: &DiscreteMeasure,
        map: &[usize],
    ) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::DimensionMismatch(format!(
                "map has {} entries for {} source atoms",
                map.len(),
                source.len()
            )));
        }
        let entries = map
            .iter()
            .enumerate()
            .map(|(i, &j)| PlanEntry {
                src: i,
                dst: j,
                mass: source.masses()[i],
            })
            .collect();
        Self::new(source.clone(), target.clone(), entries)
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    /// Number of atoms of the product space that carry mass.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// True when every source atom ships to exactly one target atom.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = vec![false; self.source.len()];
        for e in &self.entries {
            if seen[e.src] {
                return false;
            }
            seen[e.src] = true;
        }
        true
    }

    /// Quadratic transport cost `sum_{ij} pi_{ij} |x_i - y_j|^2`.
    pub fn cost(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let d = self.source.points()[e.src].clone() - &self.target.points()[e.dst];
                e.mass * d.norm_squared()
            })
            .sum()
    }

    /// The position of mass travelling from `src` to `dst` at time `t` of the
    /// straight-line displacement, `(1-t) x + t y`.
    fn displaced(&self, e: &PlanEntry, t: f64) -> DVector<f64> {
        self.source.points()[e.src].clone() * (1.0 - t) + self.target.points()[e.dst].clone() * t
    }

    /// Displacement interpolation: each plan entry's mass moves along the
    /// segment between its endpoints. `t` must lie in `[0, 1]`; coincident
    /// intermediate atoms are merged.
    pub fn interpolate(&self, t: f64) -> Result<DiscreteMeasure> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InterpolationParameter(t));
        }
        let points: Vec<DVector<f64>> = self.entries.iter().map(|e| self.displaced(e, t)).collect();
        let masses: Vec<f64> = self.entries.iter().map(|e| e.mass).collect();
        let raw = DiscreteMeasure::new(points, masses)?;
        let (merged, _) = raw.push_forward(|p| p.clone())?;
        Ok(merged)
    }

    /// Writes entries in the `src_id,dst_id,mass` format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "src_id,dst_id,mass")?;
        for e in &self.entries {
            writeln!(out, "{},{},{:.17e}", e.src, e.dst, e.mass)?;
        }
        Ok(())
    }

    /// Reads entries written by [`Self::write_csv`] and validates them
    /// against the given marginals.
    pub fn read_csv<R: BufRead>(
        source: &DiscreteMeasure,
        target: &DiscreteMeasure,
        input: R,
    ) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty plan file".into()))??;
        if header.trim() != "src_id,dst_id,mass" {
            return Err(Error::Parse(format!("unexpected plan header `{header}`")));
        }
        let mut entries = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad plan row `{line}`")));
            }
            entries.push(PlanEntry {
                src: fields[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad src id `{}`", fields[0])))?,
                dst: fields[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dst id `{}`", fields[1])))?,
                mass: fields[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad mass `{}`", fields[2])))?,
            });
        }
        Self::new(source.clone(), target.clone(), entries)
    }
}

/// Quadratic cost of a plan; free-function form of
/// [`TransferencePlan::cost`].
pub fn plan_cost(plan: &TransferencePlan) -> f64 {
    plan.cost()
}

/// Displacement interpolation at time `t`; free-function form of
/// [`TransferencePlan::interpolate`].
pub fn displacement_interpolation(plan: &TransferencePlan, t: f64) -> Result<DiscreteMeasure> {
    plan.interpolate(t)
}

/// Which marginal atoms a plan's support covers.
///
/// A coupling must touch every atom of both marginals, because every atom
/// carries positive mass and row/column sums reproduce the marginals. The
/// check is therefore expected to pass for any constructed plan; it exists so
/// plans assembled by other means (gluing, file round-trips, solver output)
/// can be audited independently of the constructor.
#[derive(Debug, Clone)]
pub struct SupportCoverage {
    /// Source atom ids that never appear in the support.
    pub missing_sources: Vec<usize>,
    /// Target atom ids that never appear in the support.
    pub missing_targets: Vec<usize>,
}

impl SupportCoverage {
    /// True when every marginal atom appears in the support.
    pub fn covered(&self) -> bool {
        self.missing_sources.is_empty() && self.missing_targets.is_empty()
    }
}

/// Checks that every atom of both marginals occurs in the plan's support.
pub fn support_lemma_check(plan: &TransferencePlan) -> SupportCoverage {
    let mut src_seen = vec![false; plan.source().len()];
    let mut dst_seen = vec![false; plan.target().len()];
    for e in plan.entries() {
        src_seen[e.src] = true;
        dst_seen[e.dst] = true;
    }
    let absent = |seen: Vec<bool>| {
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(i, _)| i)
            .collect()
    };
    SupportCoverage {
        missing_sources: absent(src_seen),
        missing_targets: absent(dst_seen),
    }
}
