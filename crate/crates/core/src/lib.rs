//! Sanity checks for agentic data-analysis pipelines.
//!
//! Agents are asked to score a yes/no research question on a 0 to 100 scale
//! under perturbed versions of a dataset. Scores from the original data (the
//! alternative arm) are compared with scores obtained after every column has
//! been independently permuted (the null arm). A pipeline that sees signal
//! should score the alternative arm above 50 (the Yes check) and separate the
//! two distributions (the Overlap check).

#[macro_use]
pub mod seed;

pub mod agent;
pub mod checks;
pub mod cli;
pub mod error;
pub mod perturb;
pub mod signal;
pub mod stats;
pub mod tabular;

pub use error::{Error, Result};
