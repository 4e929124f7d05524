//! Threshold equilibria of a binary-action global game in which the state is
//! Gamma distributed and each agent observes an independent Poisson count.
//!
//! The crate covers conjugate inference ([`dist`]), the conditional cost and
//! benefit estimates behind best responses ([`estimators`]), the finite-agent
//! game ([`equilibrium`]), the mean-field potential ([`meanfield`]) and forward
//! simulation ([`simulation`]).

pub mod checks;
pub mod dist;
pub mod equilibrium;
pub mod error;
pub mod estimators;
pub mod mc;
pub mod meanfield;
pub mod params;
pub mod policy;
pub mod quadrature;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use mc::McEstimate;
pub use params::{AgentCount, ModelParams, RawParams};
pub use policy::{PolicyKind, Threshold, ThresholdPolicy, ThresholdProfile};
