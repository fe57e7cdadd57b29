//! Analysis of 1:1 matched cohort studies and exposure-discordant twin
//! studies with binary exposures and binary outcomes.
//!
//! The crate provides:
//!
//! - a paired-data model with CSV ingestion and the standard pair-table
//!   summaries ([`cohort`]),
//! - the six classical estimators for such data — an explicit covariate
//!   model, conditional logistic regression, marginal-likelihood mixed
//!   models on discordant pairs or on all pairs, and the crude
//!   (standardized/marginal) odds-ratio analyses — together with Wald and
//!   likelihood-ratio tests ([`estimators`]),
//! - generative models and analytic oracles for simulation studies
//!   ([`simulation`]),
//! - a Monte Carlo harness that reproduces the reference simulation
//!   results: the main comparison table, power/level curves and the
//!   sensitivity suite ([`experiments`]).
//!
//! All types are immutable after construction and every operation is a
//! pure function, so everything here is safe to call concurrently (for
//! example from parallel simulation replicates).

pub mod cohort;
pub mod estimators;
pub mod experiments;
pub mod numerics;
pub mod simulation;

#[cfg(test)]
pub(crate) mod testutil;
