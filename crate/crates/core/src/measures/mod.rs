//! Discrete measures, couplings, gluing, and optimality certificates.

pub mod discrete;
pub mod glue;
pub mod monotone;
pub mod plan;

pub use discrete::{DiscreteMeasure, MERGE_TOL};
pub use glue::{glue, TripleCoupling, TripleEntry, MIDDLE_TOL};
pub use monotone::{
    certify_monotone, is_cyclically_monotone, CyclePolicy, MonotoneCertificate, MONOTONE_TOL,
};
pub use plan::{
    displacement_interpolation, plan_cost, support_lemma_check, PlanEntry, SupportCoverage,
    TransferencePlan, MARGINAL_TOL,
};
