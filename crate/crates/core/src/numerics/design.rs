//! Regression design built from named subject covariates.

use nalgebra::DMatrix;

use super::NumericsError;
use crate::cohort::PairedCohort;

/// One regressor of an explicit covariate model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Intercept,
    /// A named subject covariate.
    Covariate(String),
    /// Product of two named covariates.
    Interaction(String, String),
}

impl Term {
    fn name(&self) -> String {
        match self {
            Term::Intercept => "(intercept)".into(),
            Term::Covariate(c) => c.clone(),
            Term::Interaction(a, b) => format!("{a}*{b}"),
        }
    }
}

/// An ordered list of regressors plus the row builder mapping each subject
/// (with its pair context) to a feature vector of fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    terms: Vec<Term>,
}

impl DesignSpec {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    /// Intercept plus the given covariates.
    pub fn with_covariates(names: &[&str]) -> Self {
        let mut terms = vec![Term::Intercept];
        terms.extend(names.iter().map(|n| Term::Covariate((*n).to_string())));
        Self { terms }
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.terms.iter().map(Term::name).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Parse a comma-separated covariate list, `a*b` denoting a product.
    /// An intercept is always included first.
    pub fn parse(list: &str) -> Result<Self, NumericsError> {
        let mut terms = vec![Term::Intercept];
        for raw in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match raw.split_once('*') {
                Some((a, b)) => {
                    terms.push(Term::Interaction(a.trim().to_string(), b.trim().to_string()))
                }
                None => terms.push(Term::Covariate(raw.to_string())),
            }
        }
        Ok(Self { terms })
    }

    /// Build the feature matrix for every subject of the cohort, in pair
    /// order, with the member exposure appended as the final column.
    /// Returns the matrix, the responses and the pair index of each row.
    pub fn build_with_exposure(
        &self,
        cohort: &PairedCohort,
    ) -> Result<(DMatrix<f64>, Vec<f64>, Vec<usize>), NumericsError> {
        let mut cols = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let resolved = match term {
                Term::Intercept => Vec::new(),
                Term::Covariate(name) => vec![resolve(cohort, name)?],
                Term::Interaction(a, b) => vec![resolve(cohort, a)?, resolve(cohort, b)?],
            };
            cols.push(resolved);
        }
        let n = 2 * cohort.n_pairs();
        let p = self.terms.len() + 1;
        let mut x = DMatrix::zeros(n, p);
        let mut y = Vec::with_capacity(n);
        let mut pair_of_row = Vec::with_capacity(n);
        let mut row = 0;
        for (pair_idx, pair) in cohort.pairs().iter().enumerate() {
            for m in &pair.members {
                for (j, (term, idx)) in self.terms.iter().zip(&cols).enumerate() {
                    x[(row, j)] = match term {
                        Term::Intercept => 1.0,
                        Term::Covariate(_) => m.covariates[idx[0]],
                        Term::Interaction(_, _) => m.covariates[idx[0]] * m.covariates[idx[1]],
                    };
                }
                x[(row, p - 1)] = m.exposure_f64();
                y.push(m.outcome_f64());
                pair_of_row.push(pair_idx);
                row += 1;
            }
        }
        Ok((x, y, pair_of_row))
    }
}

fn resolve(cohort: &PairedCohort, name: &str) -> Result<usize, NumericsError> {
    cohort.covariate_index(name).ok_or_else(|| {
        NumericsError::BadData(format!(
            "covariate {name:?} not present (available: {:?})",
            cohort.covariate_names()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{Pair, PairedCohort, SubjectRecord};

    fn cohort_with_cov() -> PairedCohort {
        let make = |id: &str, member: u8, exposure: bool, outcome: bool, z: f64| SubjectRecord {
            pair_id: id.into(),
            member,
            exposure,
            outcome,
            covariates: vec![z],
        };
        PairedCohort::new(
            vec![Pair {
                members: [make("a", 1, true, true, 0.5), make("a", 2, false, false, -0.5)],
            }],
            vec!["z".into()],
            "test",
        )
        .unwrap()
    }

    #[test]
    fn builds_rows_with_exposure_last() {
        let c = cohort_with_cov();
        let spec = DesignSpec::with_covariates(&["z"]);
        let (x, y, pairs) = spec.build_with_exposure(&c).unwrap();
        assert_eq!(x.nrows(), 2);
        assert_eq!(x.ncols(), 3);
        // exposed member first after normalization
        assert_eq!(x[(0, 0)], 1.0);
        assert_eq!(x[(0, 1)], 0.5);
        assert_eq!(x[(0, 2)], 1.0);
        assert_eq!(y, vec![1.0, 0.0]);
        assert_eq!(pairs, vec![0, 0]);
    }

    #[test]
    fn missing_covariate_is_an_error() {
        let c = cohort_with_cov();
        let spec = DesignSpec::with_covariates(&["nope"]);
        assert!(spec.build_with_exposure(&c).is_err());
    }

    #[test]
    fn parse_interactions() {
        let spec = DesignSpec::parse("v,w,v*w").unwrap();
        assert_eq!(
            spec.feature_names(),
            vec!["(intercept)", "v", "w", "v*w"]
        );
    }
}
