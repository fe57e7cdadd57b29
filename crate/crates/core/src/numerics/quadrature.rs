//! Gauss–Hermite quadrature (weight exp(-x^2)) and an adaptive,
//! mode-recentered wrapper for one-dimensional marginal likelihoods.

use nalgebra::DMatrix;

use super::NumericsError;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Approximate the integral of `f(x) exp(-x^2)` over the real line.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Hermite nodes and weights by the Golub–Welsch eigenvalue method.
///
/// Supported orders are 2..=100.
pub fn hermite_rule(order: usize) -> Result<QuadratureRule, NumericsError> {
    if !(2..=100).contains(&order) {
        return Err(NumericsError::BadParameter(format!(
            "quadrature order must be in [2, 100], got {order}"
        )));
    }
    // Jacobi matrix of the Hermite recurrence: zero diagonal,
    // off-diagonal beta_k = sqrt(k/2).
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, SQRT_PI * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // The rule is symmetric; enforce it exactly so that downstream symmetry
    // identities hold to machine precision.
    let n = pairs.len();
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = 0.5 * (pairs[k].0 - pairs[i].0);
        let w = 0.5 * (pairs[k].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }

    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Result of one adaptive integral: the log of the integral plus the
/// integrand evaluations needed for posterior expectations.
#[derive(Debug, Clone)]
pub struct LogIntegral {
    pub log_value: f64,
    /// Abscissae in the original variable.
    pub points: Vec<f64>,
    /// Normalized posterior weights matching `points` (sum to 1).
    pub posterior: Vec<f64>,
}

impl LogIntegral {
    /// Posterior expectation of `g` under the integrand.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.posterior).map(|(&b, &w)| w * g(b)).sum()
    }
}

/// Adaptive Gauss–Hermite evaluator for integrals of exp(h(b)) db with
/// strictly concave h. Nodes are recentered at the mode of h and rescaled
/// by its curvature, which keeps modest orders accurate even when the
/// integrand is far from the prior center.
#[derive(Debug, Clone)]
pub struct AdaptiveGh {
    rule: QuadratureRule,
    /// ln w_k + x_k^2, the log of the exp-corrected weights.
    log_w_exp: Vec<f64>,
}

impl AdaptiveGh {
    pub fn new(order: usize) -> Result<Self, NumericsError> {
        let rule = hermite_rule(order)?;
        let log_w_exp = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w.ln() + x * x)
            .collect();
        Ok(Self { rule, log_w_exp })
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// Integrate exp(h(b)) db where h is strictly concave with derivative
    /// `dh` and second derivative `d2h`. `start` seeds the Newton search
    /// for the mode.
    pub fn log_integral(
        &self,
        h: impl Fn(f64) -> f64,
        dh: impl Fn(f64) -> f64,
        d2h: impl Fn(f64) -> f64,
        start: f64,
    ) -> LogIntegral {
        // Newton with step halving; h is concave so this is globally stable.
        let mut b = start;
        let mut hb = h(b);
        for _ in 0..80 {
            let g = dh(b);
            let curv = -d2h(b);
            let mut step = g / curv;
            if !step.is_finite() {
                break;
            }
            let mut cand = b + step;
            let mut hc = h(cand);
            let mut halvings = 0;
            while (!hc.is_finite() || hc < hb) && halvings < 40 {
                step *= 0.5;
                cand = b + step;
                hc = h(cand);
                halvings += 1;
            }
            if !hc.is_finite() {
                break;
            }
            b = cand;
            hb = hc;
            if (g / curv).abs() < 1e-14 * (1.0 + b.abs()) {
                break;
            }
        }
        let scale = (2.0 / -d2h(b)).sqrt(); // sqrt(2) * sigma_hat

        let n = self.rule.order();
        let mut points = Vec::with_capacity(n);
        let mut logs = Vec::with_capacity(n);
        let mut max_log = f64::NEG_INFINITY;
        for k in 0..n {
            let bk = b + scale * self.rule.nodes[k];
            let lk = self.log_w_exp[k] + h(bk);
            points.push(bk);
            logs.push(lk);
            if lk > max_log {
                max_log = lk;
            }
        }
        let mut sum = 0.0;
        let mut posterior: Vec<f64> = logs.iter().map(|&l| (l - max_log).exp()).collect();
        for w in &posterior {
            sum += w;
        }
        for w in &mut posterior {
            *w /= sum;
        }
        LogIntegral { log_value: scale.ln() + max_log + sum.ln(), points, posterior }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn order_two_is_the_textbook_rule() {
        let r = hermite_rule(2).unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(r.nodes[0], -inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(r.nodes[1], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(r.weights[0], SQRT_PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.weights[1], SQRT_PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn order_out_of_range_rejected() {
        assert!(hermite_rule(1).is_err());
        assert!(hermite_rule(101).is_err());
    }

    #[test]
    fn polynomial_exactness() {
        for order in [2usize, 5, 21, 40] {
            let r = hermite_rule(order).unwrap();
            // integral of x^2 exp(-x^2) = sqrt(pi)/2
            assert_relative_eq!(r.integrate(|x| x * x), SQRT_PI / 2.0, epsilon = 1e-12);
            // total mass sqrt(pi)
            assert_relative_eq!(r.integrate(|_| 1.0), SQRT_PI, epsilon = 1e-12);
        }
    }

    /// Monte Carlo oracle: E[expit(b)] for b ~ N(0,1) from 200k draws; the
    /// order-30 rule must agree within 3 MC standard errors.
    #[test]
    fn expit_moment_matches_monte_carlo() {
        let r = hermite_rule(30).unwrap();
        let quad = r.integrate(|x| crate::numerics::expit(2.0_f64.sqrt() * x)) / SQRT_PI;

        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let b: f64 = rng.sample(StandardNormal);
            let v = crate::numerics::expit(b);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let mc_se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (quad - mean).abs() < 3.0 * mc_se,
            "quad {quad} vs mc {mean} +- {mc_se}"
        );
    }

    #[test]
    fn adaptive_matches_gaussian_integral() {
        // integral of N(b; mu, s^2) db = 1 for the density as exp(h)
        let (mu, s) = (3.2, 0.7);
        let gh = AdaptiveGh::new(9).unwrap();
        let li = gh.log_integral(
            |b| -0.5 * ((b - mu) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln(),
            |b| -(b - mu) / (s * s),
            |_| -1.0 / (s * s),
            0.0,
        );
        assert_relative_eq!(li.log_value, 0.0, epsilon = 1e-10);
        // posterior mean of b is mu
        assert_relative_eq!(li.expect(|b| b), mu, epsilon = 1e-8);
    }
}
