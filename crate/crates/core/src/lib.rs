//! Network A/B testing under interference.
//!
//! The crate follows the five steps of a networked experiment analysis:
//!
//! 1. data sampling ([`graph`], [`dataset`]): small-world networks, Bernoulli
//!    treatment assignment and persistence of `(G, Z, Y)` triplets;
//! 2. probabilistic model ([`ising`], [`ggm`]): an Ising/logistic Markov random
//!    field over ±1 responses and a Gaussian additive linear model;
//! 3. parameter inference ([`inference`]): maximum pseudo-likelihood by
//!    no-intercept logistic IRLS or ordinary least squares;
//! 4. average treatment effect ([`effects`]): two counterfactual Gibbs chains
//!    (all-A vs all-B), an exact enumeration oracle and the naive baseline;
//! 5. hypothesis test ([`bootstrap`]): refitting under shuffled assignments.
//!
//! [`scenario`] wires the steps together for the command-line tool.

pub mod bootstrap;
pub mod dataset;
pub mod effects;
pub mod error;
pub mod ggm;
pub mod gibbs;
pub mod graph;
pub mod inference;
pub mod ising;
mod linalg;
pub mod plot;
pub mod rng;
pub mod scenario;

pub use dataset::{ExperimentDataset, Response, Triplet};
pub use error::{Error, Result};
pub use ggm::GgmParams;
pub use graph::{Assignment, Graph};
pub use ising::IsingParams;
