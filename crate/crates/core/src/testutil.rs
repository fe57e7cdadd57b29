//! Builders shared by unit tests.

use crate::cohort::{Pair, PairedCohort, SubjectRecord};

pub fn subject(pair_id: &str, member: u8, exposure: bool, outcome: bool) -> SubjectRecord {
    SubjectRecord { pair_id: pair_id.into(), member, exposure, outcome, covariates: vec![] }
}

pub fn pair(id: &str, exposures: (bool, bool), outcomes: (bool, bool)) -> Pair {
    Pair {
        members: [
            subject(id, 1, exposures.0, outcomes.0),
            subject(id, 2, exposures.1, outcomes.1),
        ],
    }
}

pub fn cohort(pairs: Vec<Pair>) -> PairedCohort {
    PairedCohort::new(pairs, vec![], "test").unwrap()
}

/// A purely discordant cohort realizing the given pair-outcome counts
/// (both-events, exposed-only, unexposed-only, no-events).
pub fn discordant_cohort(t: u64, u: u64, v: u64, w: u64) -> PairedCohort {
    let mut pairs = Vec::new();
    let mut k = 0usize;
    for (count, outcomes) in [
        (t, (true, true)),
        (u, (true, false)),
        (v, (false, true)),
        (w, (false, false)),
    ] {
        for _ in 0..count {
            pairs.push(pair(&format!("p{k}"), (true, false), outcomes));
            k += 1;
        }
    }
    cohort(pairs)
}
