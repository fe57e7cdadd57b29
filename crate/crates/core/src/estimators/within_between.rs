//! Within-between decomposition for binary paired data: logistic
//! regression of the outcome on the member exposure plus the pair-mean
//! exposure (linear form) or one parameter per pair-mean level (saturated
//! form). The member-exposure coefficient is the "within" effect.

use nalgebra::DMatrix;

use super::{Estimand, EstimateReport, EstimatorError, Method};
use crate::cohort::PairedCohort;
use crate::numerics::{fit_logistic, LogisticOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WithinBetweenForm {
    /// `beta_0 + beta_W x_j + beta_B' xbar`.
    Linear,
    /// `beta_W x_j + m(xbar)` with one parameter per observed xbar level.
    /// Saturated in the pair table, so beta_W equals the crude discordant
    /// log odds ratio.
    Saturated,
}

pub fn fit_within_between(
    cohort: &PairedCohort,
    form: WithinBetweenForm,
) -> Result<EstimateReport, EstimatorError> {
    let n_disc = cohort.pairs().iter().filter(|p| p.is_exposure_discordant()).count();
    if n_disc == 0 {
        return Err(EstimatorError::Identifiability(
            "no exposure-discordant pairs: the within effect is inestimable".into(),
        ));
    }

    let mut levels: Vec<f64> = Vec::new();
    for pair in cohort.pairs() {
        let xbar = pair.mean_exposure();
        if !levels.contains(&xbar) {
            levels.push(xbar);
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let single_level = levels.len() == 1;

    let n = 2 * cohort.n_pairs();
    let (ncols, names): (usize, Vec<String>) = match form {
        WithinBetweenForm::Linear => {
            if single_level {
                // xbar is constant; the between term is collinear with the
                // intercept and is dropped.
                (2, vec!["beta0".into(), "beta_w".into()])
            } else {
                (3, vec!["beta0".into(), "beta_w".into(), "beta_b_prime".into()])
            }
        }
        WithinBetweenForm::Saturated => {
            let mut names = vec!["beta_w".to_string()];
            names.extend(levels.iter().map(|l| format!("m[{l}]")));
            (1 + levels.len(), names)
        }
    };

    let mut x = DMatrix::zeros(n, ncols);
    let mut y = Vec::with_capacity(n);
    let mut clusters = Vec::with_capacity(n);
    let mut row = 0;
    for (pair_idx, pair) in cohort.pairs().iter().enumerate() {
        let xbar = pair.mean_exposure();
        for m in &pair.members {
            match form {
                WithinBetweenForm::Linear => {
                    x[(row, 0)] = 1.0;
                    x[(row, 1)] = m.exposure_f64();
                    if !single_level {
                        x[(row, 2)] = xbar;
                    }
                }
                WithinBetweenForm::Saturated => {
                    x[(row, 0)] = m.exposure_f64();
                    let level = levels.iter().position(|l| *l == xbar).unwrap();
                    x[(row, 1 + level)] = 1.0;
                }
            }
            y.push(m.outcome_f64());
            clusters.push(pair_idx);
            row += 1;
        }
    }

    let fit = fit_logistic(&x, &y, Some(&clusters), &LogisticOptions::default())?;
    let k = match form {
        WithinBetweenForm::Linear => 1,
        WithinBetweenForm::Saturated => 0,
    };
    let se = fit.se_robust(k).expect("clustered fit always carries a sandwich");
    let method = match form {
        WithinBetweenForm::Linear => Method::WithinBetweenLinear,
        WithinBetweenForm::Saturated => Method::WithinBetweenSaturated,
    };
    let mut report = EstimateReport::new(method, Estimand::BetaW, fit.coefficients[k], se);
    for (j, name) in names.iter().enumerate() {
        if j != k {
            report = report.with_nuisance(name.clone(), fit.coefficients[j]);
        }
    }
    report = report.with_nuisance("se_model", fit.se_model(k));
    report.diagnostics.converged = fit.converged;
    report.diagnostics.iterations = fit.iterations;
    if single_level && form == WithinBetweenForm::Linear {
        report
            .diagnostics
            .notes
            .push("pair-mean exposure is constant; between term dropped".into());
    }
    Ok(report)
}
