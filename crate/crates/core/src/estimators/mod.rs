//! The analysis methods for 1:1 matched cohort and twin data, each
//! producing an [`EstimateReport`] tagged with its target estimand.
//!
//! Methods targeting the conditional log odds ratio: the explicit
//! covariate model, conditional logistic regression and the mixed
//! (marginal-likelihood) models. Methods targeting a standardized or
//! marginal log odds ratio: the crude discordant-pair analysis, the
//! within-between decomposition and the all-pair crude analysis.

mod clr;
mod crude;
mod explicit;
mod lrt;
mod mixed;
mod within_between;

pub use clr::fit_clr;
pub use crude::{fit_crude_all, fit_crude_discordant, standardized_risks, CrudeOptions, StandardizedRisks};
pub use explicit::fit_explicit;
pub use lrt::{lrt_discordant, LrtHypothesis, LrtResult};
pub use mixed::{fit_mixed_all, fit_mixed_discordant, fit_mixed_discordant_table, MixedAllVariant, MixedOptions};
pub use within_between::{fit_within_between, WithinBetweenForm};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::cohort::CohortError;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("degenerate table: {0}")]
    DegenerateTable(String),
    #[error("no information in the data: {0}")]
    NoInformation(String),
    #[error("parameter not identifiable: {0}")]
    Identifiability(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Cohort(#[from] CohortError),
}

/// Analysis method identifiers, also used as stable serialization names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Explicit,
    Clr,
    MixedDiscordant,
    CrudeDiscordant,
    CrudeAll,
    MixedAllWb,
    MixedAllNaive,
    WithinBetweenLinear,
    WithinBetweenSaturated,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Explicit => "explicit",
            Method::Clr => "clr",
            Method::MixedDiscordant => "mixed-discordant",
            Method::CrudeDiscordant => "crude-discordant",
            Method::CrudeAll => "crude-all",
            Method::MixedAllWb => "mixed-all-wb",
            Method::MixedAllNaive => "mixed-all-naive",
            Method::WithinBetweenLinear => "within-between-linear",
            Method::WithinBetweenSaturated => "within-between-saturated",
        }
    }
}

/// The parameter a method estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimand {
    /// Conditional log odds ratio (constant across confounder levels).
    PsiC,
    /// Log odds ratio standardized to the matched/discordant population.
    PsiS,
    /// Marginal (unadjusted) log odds ratio.
    PsiM,
    /// Within effect of the within-between decomposition; equals the
    /// standardized log odds ratio for discordant pairs.
    BetaW,
}

impl Estimand {
    pub fn name(&self) -> &'static str {
        match self {
            Estimand::PsiC => "psi_c",
            Estimand::PsiS => "psi_s",
            Estimand::PsiM => "psi_m",
            Estimand::BetaW => "beta_w",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A point estimate on the log odds-ratio scale with its standard error,
/// 95% confidence interval and method metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub estimand: Estimand,
    pub estimate: f64,
    pub se: f64,
    pub ci95: (f64, f64),
    pub wald_z: f64,
    /// Auxiliary parameter estimates by name (nuisance coefficients,
    /// random-effect scale, alternative standard errors).
    pub nuisance: Vec<(String, f64)>,
    pub diagnostics: Diagnostics,
}

impl EstimateReport {
    pub fn new(method: Method, estimand: Estimand, estimate: f64, se: f64) -> Self {
        Self {
            method,
            estimand,
            estimate,
            se,
            ci95: (estimate - 1.96 * se, estimate + 1.96 * se),
            wald_z: if se > 0.0 { estimate / se } else { f64::NAN },
            nuisance: Vec::new(),
            diagnostics: Diagnostics { converged: true, iterations: 0, notes: Vec::new() },
        }
    }

    pub fn with_nuisance(mut self, name: impl Into<String>, value: f64) -> Self {
        self.nuisance.push((name.into(), value));
        self
    }

    pub fn nuisance_value(&self, name: &str) -> Option<f64> {
        self.nuisance.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Two-sided p-value of the Wald statistic.
    pub fn p_value(&self) -> f64 {
        two_sided_p(self.wald_z)
    }

    pub fn tsv_header() -> &'static str {
        "method\testimand\testimate\tse\tci_low\tci_high\tz\tp\tnuisance"
    }

    pub fn to_tsv_row(&self) -> String {
        let nuisance = self
            .nuisance
            .iter()
            .map(|(n, v)| format!("{n}={v:.6}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            self.method.name(),
            self.estimand.name(),
            self.estimate,
            self.se,
            self.ci95.0,
            self.ci95.1,
            self.wald_z,
            self.p_value(),
            nuisance
        )
    }

    /// Flat JSON object with the same fields as the TSV row.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("method".into(), self.method.name().into());
        map.insert("estimand".into(), self.estimand.name().into());
        map.insert("estimate".into(), self.estimate.into());
        map.insert("se".into(), self.se.into());
        map.insert("ci_low".into(), self.ci95.0.into());
        map.insert("ci_high".into(), self.ci95.1.into());
        map.insert("z".into(), self.wald_z.into());
        map.insert("p".into(), self.p_value().into());
        for (name, value) in &self.nuisance {
            map.insert(format!("nuisance.{name}"), (*value).into());
        }
        map.insert("converged".into(), self.diagnostics.converged.into());
        if !self.diagnostics.notes.is_empty() {
            map.insert("notes".into(), self.diagnostics.notes.join("; ").into());
        }
        serde_json::Value::Object(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaldTest {
    pub z: f64,
    pub p: f64,
}

/// Wald test of a zero log odds ratio from a fitted report.
pub fn wald_test(report: &EstimateReport) -> Result<WaldTest, EstimatorError> {
    if !(report.se > 0.0) {
        return Err(EstimatorError::NoInformation("standard error is zero".into()));
    }
    let z = report.estimate / report.se;
    Ok(WaldTest { z, p: two_sided_p(z) })
}

pub(crate) fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wald_null_point() {
        let r = EstimateReport::new(Method::Clr, Estimand::PsiC, 0.0, 0.5);
        let t = wald_test(&r).unwrap();
        assert_eq!(t.z, 0.0);
        assert_relative_eq!(t.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wald_quantile_definition() {
        let r = EstimateReport::new(Method::Clr, Estimand::PsiC, 1.96 * 0.4, 0.4);
        let t = wald_test(&r).unwrap();
        assert_relative_eq!(t.p, 0.05, epsilon = 1e-3);
    }

    #[test]
    fn wald_rejects_zero_se() {
        let r = EstimateReport::new(Method::Clr, Estimand::PsiC, 1.0, 0.0);
        assert!(wald_test(&r).is_err());
    }

    #[test]
    fn ci_is_plus_minus_1_96_se() {
        let r = EstimateReport::new(Method::CrudeAll, Estimand::PsiM, 1.2, 0.3);
        assert_relative_eq!(r.ci95.0, 1.2 - 1.96 * 0.3, epsilon = 1e-15);
        assert_relative_eq!(r.ci95.1, 1.2 + 1.96 * 0.3, epsilon = 1e-15);
        assert_relative_eq!(r.wald_z, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn report_serialization_is_flat() {
        let r = EstimateReport::new(Method::Clr, Estimand::PsiC, 0.5, 0.25)
            .with_nuisance("sigma", 1.5);
        let row = r.to_tsv_row();
        assert!(row.starts_with("clr\tpsi_c\t0.500000\t0.250000"));
        assert!(row.ends_with("sigma=1.500000"));
        let json = r.to_json();
        assert_eq!(json["method"], "clr");
        assert_eq!(json["nuisance.sigma"], 1.5);
    }
}
