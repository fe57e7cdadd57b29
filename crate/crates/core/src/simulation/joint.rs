//! Closed-form joint distributions and analytic limits.

use serde::Serialize;

use super::{generate::TwinSimConfig, SimError};
use crate::numerics::{expit, hermite_rule, logit};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Joint distribution of a pair's exposures (X1, X2), symmetric in the
/// members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureJoint {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl ExposureJoint {
    pub fn pr_discordant(&self) -> f64 {
        self.p01 + self.p10
    }

    /// Odds ratio of the 2x2 exposure table.
    pub fn cross_ratio(&self) -> f64 {
        self.p11 * self.p00 / (self.p01 * self.p10)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }
}

/// Solve the pair-exposure joint from the partner-conditional odds `rho`
/// (Pr(X1=1|X2=0) odds, equal in both directions by symmetry) and the
/// pair cross-ratio `phi`.
///
/// The two constraints have the closed form p01 = p10 = rho p00 and
/// p11 = phi rho^2 p00, normalized to sum to one.
pub fn solve_exposure_joint(rho: f64, phi: f64) -> Result<ExposureJoint, SimError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(SimError::BadParameter(format!("rho must be positive, got {rho}")));
    }
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(SimError::BadParameter(format!("phi must be positive, got {phi}")));
    }
    let p00 = 1.0 / (1.0 + 2.0 * rho + phi * rho * rho);
    let p01 = rho * p00;
    let p11 = phi * rho * rho * p00;
    Ok(ExposureJoint { p00, p01, p10: p01, p11 })
}

/// The intercept-mean slope that makes the two exposures conditionally
/// independent given the shared intercept: 2 sqrt(log phi).
pub fn theta_independence(phi: f64) -> Result<f64, SimError> {
    if !(phi >= 1.0) {
        return Err(SimError::BadParameter(format!(
            "phi must be at least 1 for conditional independence, got {phi}"
        )));
    }
    Ok(2.0 * phi.ln().sqrt())
}

/// Joint distribution of (Y_exposed, Y_unexposed) within discordant pairs,
/// indexed first by the exposed member's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeJoint {
    pub pi00: f64,
    pub pi01: f64,
    pub pi10: f64,
    pub pi11: f64,
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl OutcomeJoint {
    pub fn as_array(&self) -> [f64; 4] {
        [self.pi00, self.pi01, self.pi10, self.pi11]
    }

    /// Marginal event probability of the exposed member.
    pub fn p1_marginal(&self) -> f64 {
        self.pi10 + self.pi11
    }

    /// Marginal event probability of the unexposed member.
    pub fn p0_marginal(&self) -> f64 {
        self.pi01 + self.pi11
    }
}

/// Solve the discordant-pair outcome joint from the variation-independent
/// parameters: `p` (exposed event probability given the unexposed member
/// had none), `q` (the mirror image), and the cross-ratio `c`.
///
/// Up to normalization pi00 = 1, pi10 = p/(1-p), pi01 = q/(1-q) and
/// pi11 = c p q / ((1-p)(1-q)).
pub fn solve_outcome_joint(p: f64, q: f64, c: f64) -> Result<OutcomeJoint, SimError> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(SimError::BadParameter(format!("{name} must lie in (0,1), got {v}")));
        }
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(SimError::BadParameter(format!("c must be positive, got {c}")));
    }
    let u10 = p / (1.0 - p);
    let u01 = q / (1.0 - q);
    let u11 = c * u10 * u01;
    let norm = 1.0 + u10 + u01 + u11;
    Ok(OutcomeJoint {
        pi00: 1.0 / norm,
        pi01: u01 / norm,
        pi10: u10 / norm,
        pi11: u11 / norm,
        p,
        q,
        c,
    })
}

/// Asymptotic limit of the conditional-logistic estimate under the
/// discordant-outcome model: log{p(1-q) / (q(1-p))}.
pub fn clr_limit(p: f64, q: f64) -> Result<f64, SimError> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(SimError::BadParameter(format!("{name} must lie in (0,1), got {v}")));
        }
    }
    Ok((p * (1.0 - q) / (q * (1.0 - p))).ln())
}

/// The true conditional log odds ratio under the discordant-outcome model
/// (equal to the standardized and marginal ones there): the
/// conditional-logistic limit plus a dependence correction driven by `c`.
pub fn true_psi(p: f64, q: f64, c: f64) -> Result<f64, SimError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(SimError::BadParameter(format!("c must be positive, got {c}")));
    }
    Ok(clr_limit(p, q)? + ((1.0 - q + q * c) / (1.0 - p + p * c)).ln())
}

/// Marginal log odds ratio implied by a twin-model configuration, computed
/// by quadrature: the outcome probability of an individual with exposure x
/// mixes expit(b + psi_c x) over the intercept distribution induced by the
/// partner's exposure.
pub fn marginal_psi_m(config: &TwinSimConfig) -> Result<f64, SimError> {
    let joint = solve_exposure_joint(config.rho, config.phi)?;
    let theta = config.resolved_theta()?;
    let rule = hermite_rule(60).expect("fixed valid order");
    let sqrt2_sigma = std::f64::consts::SQRT_2 * config.sigma;

    // E[expit(b + shift)] with b ~ N(mu, sigma^2)
    let mean_expit = |mu: f64, shift: f64| -> f64 {
        rule.integrate(|x| expit(mu + sqrt2_sigma * x + shift)) / SQRT_PI
    };

    // partner exposure mixes the pair-mean, hence the intercept mean
    let p1 = (joint.p11 * mean_expit(theta, config.psi_c)
        + joint.p10 * mean_expit(theta / 2.0, config.psi_c))
        / (joint.p11 + joint.p10);
    let p0 = (joint.p01 * mean_expit(theta / 2.0, 0.0) + joint.p00 * mean_expit(0.0, 0.0))
        / (joint.p01 + joint.p00);
    Ok(logit(p1) - logit(p0))
}
