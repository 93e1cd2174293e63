//! Global invariants: projective volume, projection multiplicity, critical points of coordinate
//! functions and the growth of energy on tubular ends.

mod critical;
mod multiplicity;
mod tubular;
mod volume;

pub use critical::{
    find_critical_points, index_theorem_check, CriticalPointRecord, IndexCheck, INDEX_SLACK, MERGE_RADIUS, R_LOC,
};
pub use multiplicity::{
    multiplicity_csv, projected_reach, projection_multiplicity_integral, MultiplicityPoint, ProjectionPlane,
};
pub use tubular::{tubular_growth_check, TubularReport, CONDITION_TOLERANCE};
pub use volume::{projective_volume, ProjectiveVolumeEstimate, OMEGA_2};
