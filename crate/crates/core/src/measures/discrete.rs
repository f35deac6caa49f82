//! Finitely supported measures in Euclidean space.
//!
//! A [`DiscreteMeasure`] is a list of atoms with strictly positive masses.
//! Atoms are addressed by their index, which doubles as the `id` column of
//! the CSV interchange format (`id,x0,...,x{d-1},mass`). Nothing here assumes
//! unit total mass; couplings check compatibility of totals where they need
//! it.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::immersion::SampledImmersion;

/// Two atoms closer than this (in the Euclidean norm, per merge operation)
/// are treated as the same point when a pushforward collapses support.
pub const MERGE_TOL: f64 = 1e-12;

/// A measure `sum_i m_i delta_{x_i}` with finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<DVector<f64>>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from atoms and masses, validating that the support is
    /// non-empty, every atom is finite and of a common dimension, and every
    /// mass is strictly positive.
    pub fn new(points: Vec<DVector<f64>>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms but {} masses",
                points.len(),
                masses.len()
            )));
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "atom {} has dimension {}, expected {}",
                    index,
                    p.len(),
                    dim
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadAtom { index });
            }
        }
        for (index, &mass) in masses.iter().enumerate() {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::BadMass { index, mass });
            }
        }
        Ok(Self { points, masses })
    }

    /// The quadrature measure of a sampled immersion: one atom per sample
    /// node, weighted by the Riemannian cell volume.
    pub fn from_immersion(immersion: &SampledImmersion) -> Self {
        Self {
            points: immersion.points.clone(),
            masses: immersion.weights.clone(),
        }
    }

    /// Uniform masses `1/n` on the given points.
    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let mass = 1.0 / n as f64;
        Self::new(points, vec![mass; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension of the support.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn point(&self, index: usize) -> Result<&DVector<f64>> {
        self.points.get(index).ok_or(Error::PointIndex {
            index,
            len: self.points.len(),
        })
    }

    pub fn mass(&self, index: usize) -> Result<f64> {
        self.masses.get(index).copied().ok_or(Error::PointIndex {
            index,
            len: self.masses.len(),
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Rescales all masses so the total becomes one.
    pub fn normalized(&self) -> Self {
        let total = self.total_mass();
        Self {
            points: self.points.clone(),
            masses: self.masses.iter().map(|m| m / total).collect(),
        }
    }

    /// Mass-weighted mean of the atoms.
    pub fn barycenter(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (p, &m) in self.points.iter().zip(&self.masses) {
            out += p * m;
        }
        out / self.total_mass()
    }

    /// Pushforward under a point map, merging images that coincide within
    /// [`MERGE_TOL`]. Returns the image measure together with, for every
    /// source atom, the index of its image atom. The first occurrence of each
    /// image point is kept as the representative.
    pub fn push_forward<F>(&self, map: F) -> Result<(Self, Vec<usize>)>
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        let mut reps: Vec<DVector<f64>> = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        let mut assignment = Vec::with_capacity(self.len());
        // A coarse spatial hash keeps the merge loop near-linear; candidates
        // still undergo the exact distance test below.
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let bucket_width = 1e-6;
        for (index, p) in self.points.iter().enumerate() {
            let image = map(p);
            if image.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadAtom { index });
            }
            let key: Vec<i64> = image.iter().map(|c| (c / bucket_width).round() as i64).collect();
            let mut found = None;
            'search: for delta in neighbour_offsets(image.len()) {
                let shifted: Vec<i64> = key.iter().zip(&delta).map(|(k, d)| k + d).collect();
                if let Some(candidates) = buckets.get(&shifted) {
                    for &r in candidates {
                        if (&reps[r] - &image).norm() <= MERGE_TOL {
                            found = Some(r);
                            break 'search;
                        }
                    }
                }
            }
            match found {
                Some(r) => {
                    masses[r] += self.masses[index];
                    assignment.push(r);
                }
                None => {
                    let r = reps.len();
                    reps.push(image);
                    masses.push(self.masses[index]);
                    buckets.entry(key).or_default().push(r);
                    assignment.push(r);
                }
            }
        }
        Ok((
            Self {
                points: reps,
                masses,
            },
            assignment,
        ))
    }

    /// Writes the measure in the `id,x0,...,x{d-1},mass` format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dim();
        let mut header = String::from("id");
        for c in 0..d {
            header.push_str(&format!(",x{c}"));
        }
        header.push_str(",mass");
        writeln!(out, "{header}")?;
        for (i, (p, m)) in self.points.iter().zip(&self.masses).enumerate() {
            let coords: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(out, "{},{},{:.17e}", i, coords.join(","), m)?;
        }
        Ok(())
    }

    /// Reads a measure written by [`Self::write_csv`]. Rows may appear in any
    /// order; ids must form `0..n`.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows: Vec<(usize, DVector<f64>, f64)> = Vec::new();
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty measure file".into()))??;
        let columns: Vec<&str> = header.trim().split(',').collect();
        if columns.first() != Some(&"id") || columns.last() != Some(&"mass") || columns.len() < 3 {
            return Err(Error::Parse(format!("unexpected measure header `{header}`")));
        }
        let dim = columns.len() - 2;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse(format!("bad measure row `{line}`")));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad id `{}`", fields[0])))?;
            let coords: Vec<f64> = fields[1..=dim]
                .iter()
                .map(|f| f.parse().map_err(|_| Error::Parse(format!("bad coordinate `{f}`"))))
                .collect::<Result<_>>()?;
            let mass: f64 = fields[dim + 1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad mass `{}`", fields[dim + 1])))?;
            rows.push((id, DVector::from_vec(coords), mass));
        }
        rows.sort_by_key(|r| r.0);
        for (expect, row) in rows.iter().enumerate() {
            if row.0 != expect {
                return Err(Error::Parse(format!(
                    "measure ids are not contiguous: expected {expect}, found {}",
                    row.0
                )));
            }
        }
        Self::new(
            rows.iter().map(|r| r.1.clone()).collect(),
            rows.iter().map(|r| r.2).collect(),
        )
    }
}

/// Offsets `{-1,0,1}^d` used to probe neighbouring hash buckets.
fn neighbour_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * 3);
        for prefix in &out {
            for d in [-1i64, 0, 1] {
                let mut v = prefix.clone();
                v.push(d);
                next.push(v);
            }
        }
        out = next;
    }
    out
}
