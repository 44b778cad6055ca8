//! Closed-form distortion of Scheme B.

pub mod distance;
pub mod distortion;
pub mod pmf;

pub use distance::{build_distance_set, distance_bound, neighbor_distances, ConstellationTable, DistanceEntry};
pub use distortion::{
    analytic_distortion, moment_tables, scheme_b_report, sdr_db, DistortionComponents, DistortionModel,
    DistortionReport, DistortionTerms, MomentBundle, Quadratic, UserAnalysis, UserDistortion,
};
pub use pmf::{joint_pmf, CellSummary, JointPmfTable, PmfEntry};
