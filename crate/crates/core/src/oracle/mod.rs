//! Reference implementations used to check the estimator: exact GED,
//! simulations of the likelihood's sampling processes, and assignment-based
//! baselines.

pub mod assignment;
pub mod ged;
pub mod montecarlo;

pub use assignment::{greedy_assignment_estimate, lsap_lower_bound};
pub use ged::{apply_edit, exact_ged, ged_within, BoundedGed, EditOp, GedOutcome};
pub use montecarlo::{mc_omega, random_query, McEstimate, OmegaQuery};
