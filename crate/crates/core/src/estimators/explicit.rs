//! Explicit covariate model: an individual-level logistic regression of
//! the outcome on observed confounders plus exposure, pooling both pair
//! members and clustering the variance on pairs.

use super::{Estimand, EstimateReport, EstimatorError, Method};
use crate::cohort::PairedCohort;
use crate::numerics::{fit_logistic, DesignSpec, LogisticOptions, NumericsError};

/// Fit the explicit model. The exposure is appended as the final regressor
/// and its coefficient is the conditional log odds-ratio estimate.
///
/// The headline standard error is the pair-clustered sandwich, which stays
/// valid when outcomes are dependent within pairs; the model-based one is
/// reported as `se_model`.
pub fn fit_explicit(
    cohort: &PairedCohort,
    design: &DesignSpec,
) -> Result<EstimateReport, EstimatorError> {
    let (x, y, pair_ids) = design.build_with_exposure(cohort).map_err(|e| match e {
        NumericsError::BadData(msg) => EstimatorError::Data(msg),
        other => EstimatorError::Numerics(other),
    })?;
    let fit = fit_logistic(&x, &y, Some(&pair_ids), &LogisticOptions::default())?;

    let k = x.ncols() - 1;
    let estimate = fit.coefficients[k];
    let se_robust = fit
        .se_robust(k)
        .ok_or_else(|| EstimatorError::Numerics(NumericsError::Singular("sandwich".into())))?;

    let mut report = EstimateReport::new(Method::Explicit, Estimand::PsiC, estimate, se_robust);
    for (j, name) in design.feature_names().into_iter().enumerate() {
        report = report.with_nuisance(name, fit.coefficients[j]);
    }
    report = report.with_nuisance("se_model", fit.se_model(k));
    report.diagnostics.converged = fit.converged;
    report.diagnostics.iterations = fit.iterations;
    Ok(report)
}
