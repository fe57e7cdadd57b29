//! Conditional logistic regression for 1:1 matched pairs.
//!
//! Conditioning on the number of events within each pair removes the
//! pair-specific intercept; only pairs discordant in both exposure and
//! outcome contribute, and the estimate has the closed form log(U/V).

use super::{CrudeOptions, Estimand, EstimateReport, EstimatorError, Method};
use crate::cohort::DiscordantTable;

/// Conditional-likelihood estimate of the conditional log odds ratio from
/// a discordant-pair table: log(U/V) with standard error sqrt(1/U + 1/V).
pub fn fit_clr(table: &DiscordantTable) -> Result<EstimateReport, EstimatorError> {
    fit_clr_opts(table, &CrudeOptions::default())
}

pub fn fit_clr_opts(
    table: &DiscordantTable,
    opts: &CrudeOptions,
) -> Result<EstimateReport, EstimatorError> {
    if table.u == 0 && table.v == 0 {
        return Err(EstimatorError::NoInformation(
            "no pairs discordant in both exposure and outcome (U = V = 0)".into(),
        ));
    }
    let (u, v) = if opts.continuity_correction {
        (table.u as f64 + 0.5, table.v as f64 + 0.5)
    } else {
        if table.u == 0 || table.v == 0 {
            return Err(EstimatorError::DegenerateTable(format!(
                "U = {}, V = {}: the estimate is infinite; consider an exact interval",
                table.u, table.v
            )));
        }
        (table.u as f64, table.v as f64)
    };
    let estimate = (u / v).ln();
    let se = (1.0 / u + 1.0 / v).sqrt();
    let mut report = EstimateReport::new(Method::Clr, Estimand::PsiC, estimate, se);
    if opts.continuity_correction {
        report.diagnostics.notes.push("continuity correction +0.5 applied".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn direct_evaluation() {
        let t = DiscordantTable::new(0, 4, 2, 0);
        let r = fit_clr(&t).unwrap();
        assert_relative_eq!(r.estimate, 2.0f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(r.se, 0.75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn symmetric_null() {
        let t = DiscordantTable::new(3, 10, 10, 7);
        let r = fit_clr(&t).unwrap();
        assert_relative_eq!(r.estimate, 0.0);
        assert_relative_eq!(r.se, 0.2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn zero_cell_is_degenerate() {
        let t = DiscordantTable::new(2, 5, 0, 1);
        assert!(matches!(fit_clr(&t), Err(EstimatorError::DegenerateTable(_))));
        // but the continuity-corrected variant is finite
        let r = fit_clr_opts(&t, &CrudeOptions { continuity_correction: true }).unwrap();
        assert_relative_eq!(r.estimate, (5.5f64 / 0.5).ln(), epsilon = 1e-12);
    }

    #[test]
    fn empty_discordant_outcome_cells() {
        let t = DiscordantTable::new(4, 0, 0, 6);
        assert!(matches!(fit_clr(&t), Err(EstimatorError::NoInformation(_))));
    }
}
