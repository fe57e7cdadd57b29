//! Likelihood-ratio tests on the multinomial pair table.
//!
//! Two null hypotheses about the joint outcome distribution of discordant
//! pairs: equal off-diagonal cell probabilities (the conditional null) and
//! equal marginal odds for the exposed and unexposed member (the
//! standardized null). The constraints coincide on the 2x2 pair table, so
//! the two statistics are identical; both enums are kept so callers can
//! state which hypothesis they test.

use serde::Serialize;

use super::{two_sided_p, EstimatorError};
use crate::cohort::DiscordantTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LrtHypothesis {
    /// Zero conditional log odds ratio: p01 = p10.
    ConditionalNull,
    /// Equal marginal outcome odds for exposed and unexposed members.
    StandardizedNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrtResult {
    pub hypothesis: LrtHypothesis,
    pub statistic: f64,
    /// Chi-squared (1 df) p-value.
    pub p: f64,
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// -2 log likelihood ratio of the restricted vs unrestricted multinomial
/// over the four pair-outcome cells.
///
/// The restricted maximum pools the two outcome-discordant cells; the
/// concordant cells keep their sample proportions under either hypothesis.
pub fn lrt_discordant(
    table: &DiscordantTable,
    hypothesis: LrtHypothesis,
) -> Result<LrtResult, EstimatorError> {
    if table.n() == 0 {
        return Err(EstimatorError::NoInformation("empty table".into()));
    }
    let u = table.u as f64;
    let v = table.v as f64;
    // 2 * [u log u + v log v - (u+v) log((u+v)/2)], with 0 log 0 = 0
    let pooled = u + v;
    let statistic = 2.0 * (xlogx(u) + xlogx(v) - xlogx(pooled) + pooled * 2.0f64.ln());
    let statistic = statistic.max(0.0);
    Ok(LrtResult { hypothesis, statistic, p: two_sided_p(statistic.sqrt()) })
}
