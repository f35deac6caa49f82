//! Machine-readable inequality verification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceInfo;

/// Outcome of evaluating one inequality on one sampled surface.
///
/// `margin = rhs - lhs` is the signed slack: non-negative when the
/// inequality holds, and `relative_margin = margin / rhs` makes margins
/// comparable across surfaces of different size. Serialisation preserves the
/// declared field order, and `params`/`constants` are ordered maps, so equal
/// reports produce byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// Which inequality was evaluated.
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; non-negative when the inequality holds.
    pub margin: f64,
    /// `margin / rhs`.
    pub relative_margin: f64,
    /// Catalog id of the surface (or `custom`).
    pub surface: String,
    /// Surface parameters.
    pub params: BTreeMap<String, f64>,
    /// Grid resolution per chart axis.
    pub resolution: Vec<usize>,
    /// Named constants entering the statement (unit-ball volumes, plane
    /// averages, Sobolev constants).
    pub constants: BTreeMap<String, f64>,
    /// Evaluation conventions a reader must know to reproduce the numbers.
    pub flags: Vec<String>,
}

impl InequalityReport {
    /// Assembles a report and enforces its invariants: every numeric field
    /// finite and `rhs > 0`.
    pub fn new(
        name: &str,
        lhs: f64,
        rhs: f64,
        info: &SurfaceInfo,
        constants: BTreeMap<String, f64>,
        flags: Vec<String>,
    ) -> Result<Self> {
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::ReportInvariant(format!(
                "{name}: non-finite sides lhs = {lhs}, rhs = {rhs}"
            )));
        }
        if rhs <= 0.0 {
            return Err(Error::ReportInvariant(format!(
                "{name}: rhs = {rhs} must be positive"
            )));
        }
        if constants.values().any(|c| !c.is_finite()) {
            return Err(Error::ReportInvariant(format!(
                "{name}: non-finite constant among {constants:?}"
            )));
        }
        let margin = rhs - lhs;
        Ok(Self {
            name: name.to_owned(),
            lhs,
            rhs,
            margin,
            relative_margin: margin / rhs,
            surface: info.id.clone(),
            params: info.params.clone(),
            resolution: info.resolution.clone(),
            constants,
            flags,
        })
    }

    /// Pretty JSON with the declared key order.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Header of the batch CSV format (one row per report).
    pub fn csv_header() -> &'static str {
        "name,lhs,rhs,margin,relative_margin,surface,params,resolution,constants,flags"
    }

    /// One batch-CSV row; maps and lists are `;`-joined `key=value` pairs so
    /// the row stays a single line.
    pub fn csv_row(&self) -> String {
        let join_map = |m: &BTreeMap<String, f64>| {
            m.iter()
                .map(|(k, v)| format!("{k}={v:.17e}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        let resolution = self
            .resolution
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{},{},{}",
            self.name,
            self.lhs,
            self.rhs,
            self.margin,
            self.relative_margin,
            self.surface,
            join_map(&self.params),
            resolution,
            join_map(&self.constants),
            self.flags.join(";")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> SurfaceInfo {
        SurfaceInfo {
            id: "flat-disc".into(),
            params: [("radius".to_string(), 1.0)].into_iter().collect(),
            resolution: vec![32, 32],
        }
    }

    #[test]
    fn margins_are_derived_from_the_sides() {
        let r = InequalityReport::new("demo", 2.0, 2.5, &info(), BTreeMap::new(), vec![]).unwrap();
        assert_eq!(r.margin, 0.5);
        assert_eq!(r.relative_margin, 0.2);
        assert_eq!(r.surface, "flat-disc");
        assert_eq!(r.resolution, vec![32, 32]);
    }

    #[test]
    fn invalid_sides_are_rejected() {
        assert!(InequalityReport::new("demo", 1.0, 0.0, &info(), BTreeMap::new(), vec![]).is_err());
        assert!(
            InequalityReport::new("demo", f64::NAN, 1.0, &info(), BTreeMap::new(), vec![]).is_err()
        );
        assert!(
            InequalityReport::new("demo", 1.0, f64::INFINITY, &info(), BTreeMap::new(), vec![])
                .is_err()
        );
    }

    #[test]
    fn json_keys_appear_in_schema_order() {
        let r = InequalityReport::new("demo", 2.0, 2.5, &info(), BTreeMap::new(), vec![]).unwrap();
        let json = r.to_json().unwrap();
        let order = [
            "\"name\"",
            "\"lhs\"",
            "\"rhs\"",
            "\"margin\"",
            "\"relative_margin\"",
            "\"surface\"",
            "\"params\"",
            "\"resolution\"",
            "\"constants\"",
            "\"flags\"",
        ];
        let positions: Vec<usize> = order.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "order: {json}");
        let back: InequalityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_rows_are_single_lines_matching_the_header() {
        let mut constants = BTreeMap::new();
        constants.insert("omega_n".to_string(), std::f64::consts::PI);
        let r = InequalityReport::new(
            "demo",
            2.0,
            2.5,
            &info(),
            constants,
            vec!["curvature-term-pth-power".into()],
        )
        .unwrap();
        let row = r.csv_row();
        assert!(!row.contains('\n'));
        assert_eq!(
            row.split(',').count(),
            InequalityReport::csv_header().split(',').count()
        );
        assert!(row.contains("omega_n="));
        assert!(row.ends_with("curvature-term-pth-power"));
    }
}
