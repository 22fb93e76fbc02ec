//! Pointwise anti-concentration bounds for the maximum of d identically distributed
//! random variables, with the copula entering only through its diagonal section.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`. Monte Carlo, configuration and inference reporting are `f64` only.

pub mod bounds;
pub mod config;
pub mod diagonals;
pub mod error;
pub mod inference;
pub mod marginals;
pub mod montecarlo;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Marginal = marginals::MarginalDistribution<f64>;
pub type Diagonal = diagonals::DiagonalSection<f64>;
pub type Generator = diagonals::ArchimedeanGenerator<f64>;
pub type Query = bounds::BoundQuery<f64>;
pub type Bound = bounds::BoundResult<f64>;
pub type Coupling = inference::CouplingProfile<f64>;
pub type Scenario = inference::InferenceScenario<f64>;
