//! Crude (unmodelled) odds-ratio analyses: the exposure-discordant crude
//! analysis targeting a standardized log odds ratio, its separately
//! estimable standardized risks, and the all-pair crude analysis targeting
//! the marginal log odds ratio with a pair-clustered sandwich variance.

use serde::Serialize;

use super::{Estimand, EstimateReport, EstimatorError, Method};
use crate::cohort::{AllPairSummary, DiscordantTable};

#[derive(Debug, Clone, Copy, Default)]
pub struct CrudeOptions {
    /// Add 0.5 to each table cell before estimation (off by default;
    /// degenerate tables are reported as errors instead).
    pub continuity_correction: bool,
}

/// Crude log odds ratio of the discordant-pair table, estimating the log
/// odds ratio standardized to the matched population.
///
/// The variance adds a pairing adjustment to the classical four-term
/// formula; it equals the pair-clustered sandwich variance.
pub fn fit_crude_discordant(table: &DiscordantTable) -> Result<EstimateReport, EstimatorError> {
    fit_crude_discordant_opts(table, &CrudeOptions::default())
}

pub fn fit_crude_discordant_opts(
    table: &DiscordantTable,
    opts: &CrudeOptions,
) -> Result<EstimateReport, EstimatorError> {
    if table.n() == 0 {
        return Err(EstimatorError::NoInformation("empty table".into()));
    }
    let margins = [table.n11(), table.n01(), table.n10(), table.n00()];
    let (correction, note) = if opts.continuity_correction && margins.contains(&0) {
        (0.5, true)
    } else {
        if margins.contains(&0) {
            return Err(EstimatorError::DegenerateTable(format!(
                "zero margin in (n11, n01, n10, n00) = {margins:?}"
            )));
        }
        (0.0, false)
    };
    let n11 = table.n11() as f64 + correction;
    let n01 = table.n01() as f64 + correction;
    let n10 = table.n10() as f64 + correction;
    let n00 = table.n00() as f64 + correction;
    let n = table.n() as f64 + 2.0 * correction;
    let t = table.t as f64;

    let estimate = (n11 * n00 / (n01 * n10)).ln();
    let var = 1.0 / n11 + 1.0 / n01 + 1.0 / n10 + 1.0 / n00
        - 2.0 * n * (n * t - n11 * n10) / (n11 * n00 * n01 * n10);
    let se = var.sqrt();

    let mut report = EstimateReport::new(Method::CrudeDiscordant, Estimand::PsiS, estimate, se)
        .with_nuisance("p1_star", n11 / n)
        .with_nuisance("p0_star", n10 / n);
    if note {
        report.diagnostics.notes.push("continuity correction +0.5 applied".into());
    }
    Ok(report)
}

/// Standardized outcome risks of the discordant-pair table. Unlike odds
/// ratios these compose into any standardized effect measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizedRisks {
    pub p1_star: f64,
    pub p0_star: f64,
    pub risk_difference: f64,
    pub risk_ratio: f64,
    pub log_or: f64,
}

pub fn standardized_risks(table: &DiscordantTable) -> Result<StandardizedRisks, EstimatorError> {
    let n = table.n();
    if n == 0 {
        return Err(EstimatorError::NoInformation("empty table".into()));
    }
    let n = n as f64;
    let p1 = table.n11() as f64 / n;
    let p0 = table.n10() as f64 / n;
    Ok(StandardizedRisks {
        p1_star: p1,
        p0_star: p0,
        risk_difference: p1 - p0,
        risk_ratio: p1 / p0,
        log_or: (p1 / (1.0 - p1)).ln() - (p0 / (1.0 - p0)).ln(),
    })
}

/// Crude log odds ratio over all individuals of a twin cohort, estimating
/// the marginal (confounded) log odds ratio.
///
/// The standard error is the pair-clustered M-estimator sandwich built from
/// the summary's pair-structure statistics; on a purely discordant cohort
/// it collapses to the discordant-pair formula exactly.
pub fn fit_crude_all(summary: &AllPairSummary) -> Result<EstimateReport, EstimatorError> {
    let r = &summary.r;
    if r.r11 == 0 || r.r10 == 0 || r.r01 == 0 || r.r00 == 0 {
        return Err(EstimatorError::DegenerateTable(format!(
            "zero individual cell in (r11, r10, r01, r00) = ({}, {}, {}, {})",
            r.r11, r.r10, r.r01, r.r00
        )));
    }
    let estimate =
        ((r.r11 as f64 * r.r00 as f64) / (r.r01 as f64 * r.r10 as f64)).ln();

    let q = summary.q_hat;
    let p0 = summary.p0_hat;
    let p1 = summary.p1_hat;
    // Score-equation bread entries for the two logit parameters.
    let a0 = 2.0 * (1.0 - q) * p0 * (1.0 - p0);
    let a1 = 2.0 * q * p1 * (1.0 - p1);
    // Cross moments centered at the overall prevalences. The stratum
    // covariances are shifted by the stratum-vs-overall mean gap.
    let g00 = summary.c00_hat + (summary.ybar00 - p0) * (summary.ybar00 - p0);
    let g11 = summary.c11_hat + (summary.ybar11 - p1) * (summary.ybar11 - p1);
    let gd = summary.cd_hat
        + (summary.ybar_d_exposed - p1) * (summary.ybar_d_unexposed - p0);
    let v00 = a0 + 2.0 * summary.q00_hat * g00;
    let v11 = a1 + 2.0 * summary.q11_hat * g11;
    let v01 = summary.qd_hat * gd;
    let avar = v00 / (a0 * a0) + v11 / (a1 * a1) - 2.0 * v01 / (a0 * a1);
    let se = (avar / summary.n_pairs as f64).sqrt();

    let mut report = EstimateReport::new(Method::CrudeAll, Estimand::PsiM, estimate, se)
        .with_nuisance("p0", p0)
        .with_nuisance("p1", p1)
        .with_nuisance("q", q);
    for stratum in &summary.empty_strata {
        report
            .diagnostics
            .notes
            .push(format!("empty {stratum} stratum: its covariance term contributes 0"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{tabulate_all, tabulate_discordant};
    use crate::testutil::{cohort, discordant_cohort, pair};
    use approx::assert_relative_eq;

    #[test]
    fn direct_evaluation_of_estimate_and_se() {
        let t = DiscordantTable::new(10, 20, 10, 60);
        let r = fit_crude_discordant(&t).unwrap();
        // margins n11=30 n10=20 n01=70 n00=80
        assert_relative_eq!(r.estimate, (12.0f64 / 7.0).ln(), epsilon = 1e-12);
        let var = 1.0 / 30.0 + 1.0 / 70.0 + 1.0 / 20.0 + 1.0 / 80.0
            - 2.0 * 100.0 * (100.0 * 10.0 - 30.0 * 20.0) / (30.0 * 80.0 * 70.0 * 20.0);
        assert_relative_eq!(r.se, var.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r.se, 0.293785, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_margins_give_zero() {
        let t = DiscordantTable::new(0, 7, 7, 11);
        let r = fit_crude_discordant(&t).unwrap();
        assert_relative_eq!(r.estimate, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pairing_adjustment_vanishes_when_nt_matches_margin_product() {
        // n T = n11 * n10 with t=6,u=6,v=2,w=2
        let t = DiscordantTable::new(6, 6, 2, 2);
        let r = fit_crude_discordant(&t).unwrap();
        let four_term: f64 = 1.0 / 12.0 + 1.0 / 4.0 + 1.0 / 8.0 + 1.0 / 8.0;
        assert_relative_eq!(r.se, four_term.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn zero_margin_is_degenerate() {
        let t = DiscordantTable::new(0, 5, 3, 0); // n01 = 3, n00 = 5, fine; n10?
        // n10 = v + t = 3, n11 = 5; all margins positive here, so build a real one:
        let t2 = DiscordantTable::new(0, 0, 3, 5); // n11 = 0
        assert!(fit_crude_discordant(&t2).is_err());
        assert!(fit_crude_discordant(&t).is_ok());
    }

    #[test]
    fn standardized_risks_symmetric_table() {
        let t = DiscordantTable::new(25, 25, 25, 25);
        let s = standardized_risks(&t).unwrap();
        assert_relative_eq!(s.p1_star, 0.5);
        assert_relative_eq!(s.p0_star, 0.5);
        assert_relative_eq!(s.risk_difference, 0.0);
        assert_relative_eq!(s.risk_ratio, 1.0);
    }

    #[test]
    fn standardized_risks_direct_proportions() {
        let t = DiscordantTable::new(10, 20, 10, 60);
        let s = standardized_risks(&t).unwrap();
        assert_relative_eq!(s.p1_star, 0.30, epsilon = 1e-12);
        assert_relative_eq!(s.p0_star, 0.20, epsilon = 1e-12);
        assert_relative_eq!(s.risk_difference, 0.10, epsilon = 1e-12);
    }

    #[test]
    fn log_or_identity_with_crude_estimate() {
        for (t, u, v, w) in [(10, 20, 10, 60), (3, 9, 4, 1), (25, 25, 25, 25)] {
            let table = DiscordantTable::new(t, u, v, w);
            let s = standardized_risks(&table).unwrap();
            let r = fit_crude_discordant(&table).unwrap();
            assert_relative_eq!(s.log_or, r.estimate, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_pair_reduces_to_discordant_on_matched_cohorts() {
        let c = discordant_cohort(10, 20, 10, 60);
        let all = fit_crude_all(&tabulate_all(&c)).unwrap();
        let disc = fit_crude_discordant(&tabulate_discordant(&c).unwrap()).unwrap();
        assert_relative_eq!(all.estimate, disc.estimate, epsilon = 1e-12);
        assert_relative_eq!(all.se, disc.se, epsilon = 1e-12);
    }

    #[test]
    fn independent_pairs_collapse_to_four_term_formula() {
        // every stratum holds one pair of each outcome pattern, so all
        // plug-in covariances and mean gaps vanish
        let mut pairs = Vec::new();
        let mut k = 0;
        for (e, patterns) in [
            ((true, false), vec![(true, true), (true, false), (false, true), (false, false)]),
            ((false, false), vec![(true, true), (true, false), (false, true), (false, false)]),
            ((true, true), vec![(true, true), (true, false), (false, true), (false, false)]),
        ] {
            for o in patterns {
                pairs.push(pair(&format!("p{k}"), e, o));
                k += 1;
            }
        }
        let summary = tabulate_all(&cohort(pairs));
        let r = fit_crude_all(&summary).unwrap();
        let four_term: f64 = 4.0 / 6.0;
        assert_relative_eq!(r.se * r.se, four_term, epsilon = 1e-12);
        assert_relative_eq!(r.estimate, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_individual_cell_rejected() {
        let c = discordant_cohort(5, 5, 0, 0); // unexposed never event-free? r00 = u+w = 5... build truly zero cell:
        let summary = tabulate_all(&c);
        // r01 = v + w = 0 here
        assert!(fit_crude_all(&summary).is_err());
    }

    #[test]
    fn continuity_correction_only_on_request() {
        let t = DiscordantTable::new(0, 0, 3, 5);
        assert!(fit_crude_discordant(&t).is_err());
        let r = fit_crude_discordant_opts(&t, &CrudeOptions { continuity_correction: true })
            .unwrap();
        assert!(r.estimate.is_finite());
        assert!(!r.diagnostics.notes.is_empty());
    }
}
