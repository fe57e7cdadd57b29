//! Synthetic cohort generators.

use rand::Rng;
use rand_distr::StandardNormal;

use super::joint::{solve_exposure_joint, solve_outcome_joint, theta_independence};
use super::SimError;
use crate::cohort::{Pair, PairedCohort, SubjectRecord};
use crate::numerics::expit;

/// Configuration of the twin generative model: pair exposures from the
/// (rho, phi) joint, a shared normal intercept whose mean is theta times
/// the pair-mean exposure, and outcomes drawn independently given the
/// intercept with conditional log odds ratio psi_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinSimConfig {
    pub rho: f64,
    pub phi: f64,
    /// Intercept-mean slope; `None` selects the value that makes the
    /// exposures conditionally independent given the intercept.
    pub theta: Option<f64>,
    pub psi_c: f64,
    pub n_pairs: usize,
    pub seed: u64,
    /// Intercept standard deviation (1 in the reference model).
    pub sigma: f64,
    /// Keep the latent intercept as an observed covariate named "b".
    pub retain_random_effect: bool,
}

impl TwinSimConfig {
    pub fn new(
        rho: f64,
        phi: f64,
        theta: Option<f64>,
        psi_c: f64,
        n_pairs: usize,
        seed: u64,
    ) -> Self {
        Self { rho, phi, theta, psi_c, n_pairs, seed, sigma: 1.0, retain_random_effect: false }
    }

    pub fn retain_random_effect(mut self, keep: bool) -> Self {
        self.retain_random_effect = keep;
        self
    }

    pub fn resolved_theta(&self) -> Result<f64, SimError> {
        match self.theta {
            Some(t) => Ok(t),
            None => theta_independence(self.phi),
        }
    }
}

fn bern(rng: &mut impl Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

/// Draw a twin cohort. The latent intercept is discarded unless
/// `retain_random_effect` is set.
pub fn generate_twin_sample(
    config: &TwinSimConfig,
    rng: &mut impl Rng,
) -> Result<PairedCohort, SimError> {
    if config.n_pairs == 0 {
        return Err(SimError::BadParameter("n_pairs must be at least 1".into()));
    }
    if !(config.sigma >= 0.0) {
        return Err(SimError::BadParameter("sigma must be nonnegative".into()));
    }
    let joint = solve_exposure_joint(config.rho, config.phi)?;
    let theta = config.resolved_theta()?;
    let cum = {
        let a = joint.as_array();
        [a[0], a[0] + a[1], a[0] + a[1] + a[2]]
    };

    let covariate_names: Vec<String> =
        if config.retain_random_effect { vec!["b".into()] } else { vec![] };
    let mut pairs = Vec::with_capacity(config.n_pairs);
    for i in 0..config.n_pairs {
        let u: f64 = rng.gen();
        let (x1, x2) = if u < cum[0] {
            (false, false)
        } else if u < cum[1] {
            (false, true)
        } else if u < cum[2] {
            (true, false)
        } else {
            (true, true)
        };
        let xbar = (x1 as u8 + x2 as u8) as f64 / 2.0;
        let z: f64 = rng.sample(StandardNormal);
        let b = theta * xbar + config.sigma * z;
        let y1 = bern(rng, expit(b + config.psi_c * (x1 as u8 as f64)));
        let y2 = bern(rng, expit(b + config.psi_c * (x2 as u8 as f64)));
        let covs: Vec<f64> = if config.retain_random_effect { vec![b] } else { vec![] };
        let id = format!("p{i}");
        pairs.push(Pair {
            members: [
                SubjectRecord {
                    pair_id: id.clone(),
                    member: 1,
                    exposure: x1,
                    outcome: y1,
                    covariates: covs.clone(),
                },
                SubjectRecord { pair_id: id, member: 2, exposure: x2, outcome: y2, covariates: covs },
            ],
        });
    }
    Ok(PairedCohort::new(pairs, covariate_names, "twin-sim").expect("generated pairs are valid"))
}

/// Draw exposure-discordant pairs with (Y_exposed, Y_unexposed) multinomial
/// under the (p, q, c) outcome joint.
pub fn generate_discordant_outcome_sample(
    p: f64,
    q: f64,
    c: f64,
    n_pairs: usize,
    rng: &mut impl Rng,
) -> Result<PairedCohort, SimError> {
    if n_pairs == 0 {
        return Err(SimError::BadParameter("n_pairs must be at least 1".into()));
    }
    let joint = solve_outcome_joint(p, q, c)?;
    let a = joint.as_array(); // pi00, pi01, pi10, pi11
    let cum = [a[0], a[0] + a[1], a[0] + a[1] + a[2]];

    let mut pairs = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let u: f64 = rng.gen();
        let (ye, yu) = if u < cum[0] {
            (false, false)
        } else if u < cum[1] {
            (false, true)
        } else if u < cum[2] {
            (true, false)
        } else {
            (true, true)
        };
        let id = format!("p{i}");
        pairs.push(Pair {
            members: [
                SubjectRecord {
                    pair_id: id.clone(),
                    member: 1,
                    exposure: true,
                    outcome: ye,
                    covariates: vec![],
                },
                SubjectRecord { pair_id: id, member: 2, exposure: false, outcome: yu, covariates: vec![] },
            ],
        });
    }
    Ok(PairedCohort::new(pairs, vec![], "discordant-outcome-sim").expect("generated pairs are valid"))
}

/// Configuration of the observed-covariate model: Z = (V, W) with V
/// standard normal and W Bernoulli(1/2); exposures i.i.d. given Z with a
/// logistic model in (V, W, VW), and outcomes likewise given exposure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateSimConfig {
    pub alpha: [f64; 4],
    pub gamma: [f64; 4],
    pub psi_c: f64,
    pub n_pairs: usize,
    pub seed: u64,
}

impl CovariateSimConfig {
    /// The parameter set used by the reference sensitivity experiments.
    pub fn reference(n_pairs: usize, seed: u64) -> Self {
        Self {
            alpha: [2.0, 1.0, 1.0, -1.5],
            gamma: [-2.0, -1.0, -1.0, 1.5],
            psi_c: 1.3,
            n_pairs,
            seed,
        }
    }
}

/// Draw a twin cohort with observed covariates V and W.
pub fn generate_covariate_sample(
    config: &CovariateSimConfig,
    rng: &mut impl Rng,
) -> Result<PairedCohort, SimError> {
    if config.n_pairs == 0 {
        return Err(SimError::BadParameter("n_pairs must be at least 1".into()));
    }
    let [a0, a1, a2, a3] = config.alpha;
    let [g0, g1, g2, g3] = config.gamma;
    let mut pairs = Vec::with_capacity(config.n_pairs);
    for i in 0..config.n_pairs {
        let v: f64 = rng.sample(StandardNormal);
        let w = if bern(rng, 0.5) { 1.0 } else { 0.0 };
        let x_logit = a0 + a1 * v + a2 * w + a3 * v * w;
        let x1 = bern(rng, expit(x_logit));
        let x2 = bern(rng, expit(x_logit));
        let y_base = g0 + g1 * v + g2 * w + g3 * v * w;
        let y1 = bern(rng, expit(y_base + config.psi_c * (x1 as u8 as f64)));
        let y2 = bern(rng, expit(y_base + config.psi_c * (x2 as u8 as f64)));
        let id = format!("p{i}");
        let covs = vec![v, w];
        pairs.push(Pair {
            members: [
                SubjectRecord {
                    pair_id: id.clone(),
                    member: 1,
                    exposure: x1,
                    outcome: y1,
                    covariates: covs.clone(),
                },
                SubjectRecord { pair_id: id, member: 2, exposure: x2, outcome: y2, covariates: covs },
            ],
        });
    }
    Ok(PairedCohort::new(pairs, vec!["v".into(), "w".into()], "covariate-sim")
        .expect("generated pairs are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{tabulate_all, tabulate_discordant};
    use crate::simulation::derive_seed_stream;

    #[test]
    fn determinism_per_stream() {
        let config = TwinSimConfig::new(0.5, 4.0, None, 0.3, 50, 9);
        let a = generate_twin_sample(&config, &mut derive_seed_stream(9, 0)).unwrap();
        let b = generate_twin_sample(&config, &mut derive_seed_stream(9, 0)).unwrap();
        assert_eq!(a, b);
        let c = generate_twin_sample(&config, &mut derive_seed_stream(9, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn no_effect_no_confounding_gives_null_log_or() {
        let config = TwinSimConfig::new(0.5, 4.0, Some(0.0), 0.0, 20_000, 3);
        let cohort = generate_twin_sample(&config, &mut derive_seed_stream(3, 0)).unwrap();
        let s = tabulate_all(&cohort);
        let log_or = ((s.r.r11 as f64 * s.r.r00 as f64)
            / (s.r.r01 as f64 * s.r.r10 as f64))
            .ln();
        // MC tolerance ~ 3 * 2/sqrt(n_individuals)
        assert!(log_or.abs() < 0.05, "log OR {log_or}");
    }

    #[test]
    fn discordance_rate_matches_joint() {
        let config = TwinSimConfig::new(0.5, 4.0, None, 0.0, 20_000, 11);
        let cohort = generate_twin_sample(&config, &mut derive_seed_stream(11, 0)).unwrap();
        let s = tabulate_all(&cohort);
        let expect = 1.0 / 3.0;
        let mc_se = (expect * (1.0 - expect) / 20_000f64).sqrt();
        assert!(
            (s.qd_hat - expect).abs() < 3.0 * mc_se,
            "qd {} vs {expect}",
            s.qd_hat
        );
    }

    #[test]
    fn retained_intercept_is_shared_within_pairs() {
        let config = TwinSimConfig::new(0.5, 4.0, None, 0.0, 10, 5).retain_random_effect(true);
        let cohort = generate_twin_sample(&config, &mut derive_seed_stream(5, 0)).unwrap();
        assert_eq!(cohort.covariate_names(), &["b".to_string()]);
        for pair in cohort.pairs() {
            assert_eq!(pair.members[0].covariates[0], pair.members[1].covariates[0]);
        }
    }

    #[test]
    fn outcome_sample_frequencies_match_joint() {
        let joint = solve_outcome_joint(0.3, 0.1, 4.0).unwrap();
        let cohort =
            generate_discordant_outcome_sample(0.3, 0.1, 4.0, 40_000, &mut derive_seed_stream(1, 0))
                .unwrap();
        let t = tabulate_discordant(&cohort).unwrap();
        let n = t.n() as f64;
        for (obs, expect) in [
            (t.w as f64 / n, joint.pi00),
            (t.v as f64 / n, joint.pi01),
            (t.u as f64 / n, joint.pi10),
            (t.t as f64 / n, joint.pi11),
        ] {
            let mc_se = (expect * (1.0 - expect) / n).sqrt();
            assert!((obs - expect).abs() < 4.0 * mc_se, "{obs} vs {expect}");
        }
    }

    #[test]
    fn covariate_sample_shares_z_within_pairs() {
        let config = CovariateSimConfig::reference(20, 2);
        let cohort = generate_covariate_sample(&config, &mut derive_seed_stream(2, 0)).unwrap();
        assert_eq!(cohort.covariate_names(), &["v".to_string(), "w".to_string()]);
        for pair in cohort.pairs() {
            assert_eq!(pair.members[0].covariates, pair.members[1].covariates);
            assert!(pair.members[0].covariates[1] == 0.0 || pair.members[0].covariates[1] == 1.0);
        }
    }

    #[test]
    fn zero_pairs_rejected() {
        let config = TwinSimConfig::new(0.5, 4.0, None, 0.0, 0, 1);
        assert!(generate_twin_sample(&config, &mut derive_seed_stream(1, 0)).is_err());
    }
}
