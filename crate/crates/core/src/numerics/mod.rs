//! Shared numerical machinery: logistic-model fitting by IRLS, smooth
//! maximization, Gauss–Hermite quadrature and clustered sandwich
//! covariances.

mod design;
mod logistic;
mod optimize;
mod quadrature;
mod sandwich;

pub use design::{DesignSpec, Term};
pub use logistic::{fit_logistic, FitResult, LogisticOptions};
pub use optimize::{maximize, MaximizeOptions, Maximum, Objective};
pub use quadrature::{hermite_rule, AdaptiveGh, LogIntegral, QuadratureRule};
pub use sandwich::sandwich_cov;

use thiserror::Error;

/// Default gradient max-norm tolerance for optimizers.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration cap for optimizers.
pub const DEFAULT_MAX_ITER: usize = 200;
/// Coefficients beyond this magnitude on the logit scale are numerically
/// saturated and treated as evidence of separation.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("design matrix is rank deficient; collinear columns: {0:?}")]
    RankDeficient(Vec<usize>),
    #[error("separation detected: coefficient magnitude exceeded {bound} (max |coef| = {max_coef:.3})")]
    Separation { bound: f64, max_coef: f64 },
    #[error("no convergence after {iterations} iterations (gradient max-norm {grad_norm:.3e} at best point)")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        best: Vec<f64>,
        best_value: f64,
    },
    #[error("objective is not finite at {at:?}")]
    NonFinite { at: Vec<f64> },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("invalid data: {0}")]
    BadData(String),
}

pub(crate) fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// log(1 + e^x) without overflow.
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
