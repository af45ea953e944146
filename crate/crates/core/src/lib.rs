//! Graph similarity search that estimates graph edit distance (GED) from graph
//! branch distance (GBD).
//!
//! A corpus is indexed into branch multisets ([`graph::compute_branches`]).
//! Offline, [`priors::PriorStore`] fits a Gaussian mixture to sampled branch
//! distances and tabulates an edit-distance prior. Online,
//! [`search::SearchEngine`] combines those priors with the likelihood of
//! [`model`] into the posterior probability that a graph lies within `τ̂`
//! edits of the query.
//!
//! [`oracle`] holds exact and Monte Carlo references plus assignment
//! baselines, [`syngen`] generates corpora with known distances and
//! [`metrics`] scores search results.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod priors;
pub mod search;
pub mod syngen;

pub use error::{Error, Result};
pub use graph::{compute_branches, gbd, BranchIndex, Graph, LabelAlphabet};
pub use metrics::{evaluate, EvalReport};
pub use model::{lambda1, lambda1_batch, z_function, ModelParams};
pub use priors::{PriorOptions, PriorStore};
pub use search::{SearchConfig, SearchEngine, Variant};
