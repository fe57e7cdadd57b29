//! Generative models for matched-cohort and twin simulations, with the
//! analytic oracles (joint-distribution solvers, asymptotic limits and
//! standardized targets) that the Monte Carlo harness checks against.

mod generate;
mod joint;
mod seed;

pub use generate::{
    generate_covariate_sample, generate_discordant_outcome_sample, generate_twin_sample,
    CovariateSimConfig, TwinSimConfig,
};
pub use joint::{
    clr_limit, marginal_psi_m, solve_exposure_joint, solve_outcome_joint, theta_independence,
    true_psi, ExposureJoint, OutcomeJoint,
};
pub use seed::{derive_seed_stream, ReplicateRng};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}
