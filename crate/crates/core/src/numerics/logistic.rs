//! Bernoulli-logit maximum likelihood via iteratively reweighted least
//! squares, with model-based and pair-clustered sandwich covariances.

use nalgebra::{DMatrix, DVector};

use super::{expit, log1p_exp, sandwich_cov, NumericsError, SEPARATION_BOUND};

#[derive(Debug, Clone)]
pub struct LogisticOptions {
    /// Gradient (score) max-norm at which IRLS stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        // Tighter than the generic optimizer default: the saturated-model
        // identities downstream assert coefficient agreement at 1e-8, which
        // needs the score driven well below that.
        Self { tol: 1e-10, max_iter: 100 }
    }
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: DVector<f64>,
    /// Inverse observed information.
    pub covariance_model: DMatrix<f64>,
    /// Cluster sandwich covariance, when cluster ids were supplied.
    pub covariance_robust: Option<DMatrix<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn se_model(&self, j: usize) -> f64 {
        self.covariance_model[(j, j)].sqrt()
    }

    pub fn se_robust(&self, j: usize) -> Option<f64> {
        self.covariance_robust.as_ref().map(|c| c[(j, j)].sqrt())
    }
}

fn check_rank(x: &DMatrix<f64>) -> Result<(), NumericsError> {
    let p = x.ncols();
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let scale = r[(0, 0)].abs().max(1e-300);
    let rank = (0..p.min(x.nrows()))
        .take_while(|&i| r[(i, i)].abs() > 1e-10 * scale)
        .count();
    if rank < p {
        // Permutation maps pivoted positions back to original columns; the
        // trailing ones are the (near-)collinear set.
        let mut order = nalgebra::RowDVector::<usize>::from_fn(p, |_, j| j);
        qr.p().permute_columns(&mut order);
        let mut bad: Vec<usize> = order.iter().skip(rank).copied().collect();
        bad.sort_unstable();
        return Err(NumericsError::RankDeficient(bad));
    }
    Ok(())
}

fn loglik(eta: &DVector<f64>, y: &[f64]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| yi * e - log1p_exp(e))
        .sum()
}

/// Fit a Bernoulli-logit model by IRLS.
///
/// `y` must be 0/1 with both classes present and `x` must have full column
/// rank. When `clusters` is given, a cluster-robust sandwich covariance is
/// computed in addition to the model-based one; with paired data the pair
/// index is the natural cluster id.
pub fn fit_logistic(
    x: &DMatrix<f64>,
    y: &[f64],
    clusters: Option<&[usize]>,
    opts: &LogisticOptions,
) -> Result<FitResult, NumericsError> {
    let n = x.nrows();
    let p = x.ncols();
    if n != y.len() {
        return Err(NumericsError::BadData(format!(
            "{} rows but {} responses",
            n,
            y.len()
        )));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(NumericsError::BadData("responses must be 0 or 1".into()));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(NumericsError::BadData(
            "responses must contain both a 0 and a 1".into(),
        ));
    }
    if let Some(c) = clusters {
        if c.len() != n {
            return Err(NumericsError::BadData("cluster id per row required".into()));
        }
    }
    check_rank(x)?;

    let mut beta = DVector::zeros(p);
    let mut eta = x * &beta;
    let mut ll = loglik(&eta, y);
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let mu: DVector<f64> = eta.map(expit);
        let resid = DVector::from_iterator(n, y.iter().zip(mu.iter()).map(|(&yi, &m)| yi - m));
        let score = x.transpose() * &resid;
        grad_norm = score.amax();
        if grad_norm < opts.tol {
            converged = true;
            iterations = iter - 1;
            break;
        }

        let w: DVector<f64> = mu.map(|m| (m * (1.0 - m)).max(1e-12));
        let mut xw = x.clone();
        for i in 0..n {
            xw.row_mut(i).scale_mut(w[i]);
        }
        let info = x.transpose() * &xw;
        let step = info
            .clone()
            .cholesky()
            .ok_or_else(|| NumericsError::Singular("information matrix".into()))?
            .solve(&score);

        // Step-halving keeps the likelihood monotone on poorly scaled data.
        let mut alpha = 1.0;
        loop {
            let cand = &beta + alpha * &step;
            let cand_eta = x * &cand;
            let cand_ll = loglik(&cand_eta, y);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 {
                beta = cand;
                eta = cand_eta;
                ll = cand_ll;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-10 {
                return Err(NumericsError::NonConvergence {
                    iterations: iter,
                    grad_norm,
                    best: beta.iter().copied().collect(),
                    best_value: ll,
                });
            }
        }

        let max_coef = beta.amax();
        if max_coef > SEPARATION_BOUND {
            return Err(NumericsError::Separation { bound: SEPARATION_BOUND, max_coef });
        }
    }

    if !converged {
        return Err(NumericsError::NonConvergence {
            iterations,
            grad_norm,
            best: beta.iter().copied().collect(),
            best_value: ll,
        });
    }

    let mu: DVector<f64> = eta.map(expit);
    let w: DVector<f64> = mu.map(|m| m * (1.0 - m));
    let mut xw = x.clone();
    for i in 0..n {
        xw.row_mut(i).scale_mut(w[i]);
    }
    let info = x.transpose() * &xw;
    let covariance_model = info
        .clone()
        .cholesky()
        .ok_or_else(|| NumericsError::Singular("information matrix".into()))?
        .inverse();

    let covariance_robust = match clusters {
        None => None,
        Some(ids) => {
            let n_clusters = ids.iter().copied().max().map_or(0, |m| m + 1);
            let mut scores = DMatrix::zeros(n_clusters, p);
            for i in 0..n {
                let cid = ids[i];
                let w_i = y[i] - mu[i];
                for j in 0..p {
                    scores[(cid, j)] += x[(i, j)] * w_i;
                }
            }
            Some(sandwich_cov(&scores, &info)?)
        }
    };

    Ok(FitResult {
        coefficients: beta,
        covariance_model,
        covariance_robust,
        loglik: ll,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn design(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn intercept_only_symmetric() {
        let x = design(&[&[1.0], &[1.0]]);
        let fit = fit_logistic(&x, &[0.0, 1.0], None, &LogisticOptions::default()).unwrap();
        assert_relative_eq!(fit.coefficients[0], 0.0, epsilon = 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn perfect_separation_detected() {
        let x = design(&[&[1.0, -2.0], &[1.0, -1.0], &[1.0, 1.0], &[1.0, 2.0]]);
        let err = fit_logistic(&x, &[0.0, 0.0, 1.0, 1.0], None, &LogisticOptions::default())
            .unwrap_err();
        assert!(matches!(err, NumericsError::Separation { .. }), "{err}");
    }

    /// Oracle: on grouped 2x2 data the saturated logit coefficients are the
    /// log-odds / log-odds-ratio of the table, computed directly from cell
    /// counts.
    #[test]
    fn grouped_two_by_two_matches_table_log_odds() {
        // counts: x=0 -> 30 events / 70 non-events; x=1 -> 55 / 45
        let (a, b, c, d) = (30usize, 70usize, 55usize, 45usize);
        let mut rows: Vec<[f64; 2]> = Vec::new();
        let mut y = Vec::new();
        for (cnt, xv, yv) in [(a, 0.0, 1.0), (b, 0.0, 0.0), (c, 1.0, 1.0), (d, 1.0, 0.0)] {
            for _ in 0..cnt {
                rows.push([1.0, xv]);
                y.push(yv);
            }
        }
        let x = DMatrix::from_row_slice(rows.len(), 2, &rows.concat());
        let fit = fit_logistic(&x, &y, None, &LogisticOptions::default()).unwrap();
        let expect_intercept = (a as f64 / b as f64).ln();
        let expect_slope = (c as f64 * b as f64 / (d as f64 * a as f64)).ln();
        assert_relative_eq!(fit.coefficients[0], expect_intercept, epsilon = 1e-9);
        assert_relative_eq!(fit.coefficients[1], expect_slope, epsilon = 1e-9);
        // Model-based variance of the log-OR equals the classical four-term sum.
        let four_term: f64 = 1.0 / a as f64 + 1.0 / b as f64 + 1.0 / c as f64 + 1.0 / d as f64;
        assert_relative_eq!(fit.covariance_model[(1, 1)], four_term, max_relative = 1e-8);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        // column 2 duplicates column 1
        let x = design(&[
            &[1.0, 0.5, 0.5],
            &[1.0, 1.0, 1.0],
            &[1.0, -1.0, -1.0],
            &[1.0, 2.0, 2.0],
        ]);
        let err =
            fit_logistic(&x, &[0.0, 1.0, 0.0, 1.0], None, &LogisticOptions::default()).unwrap_err();
        match err {
            NumericsError::RankDeficient(cols) => {
                assert!(cols.contains(&1) || cols.contains(&2), "{cols:?}")
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn score_at_optimum_below_tolerance() {
        let x = design(&[
            &[1.0, 0.1],
            &[1.0, 0.9],
            &[1.0, -0.4],
            &[1.0, 1.3],
            &[1.0, 0.2],
            &[1.0, -1.1],
        ]);
        let y = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let opts = LogisticOptions::default();
        let fit = fit_logistic(&x, &y, None, &opts).unwrap();
        let mu: Vec<f64> = (x * &fit.coefficients).iter().map(|&e| expit(e)).collect();
        let mut score = [0.0; 2];
        for i in 0..y.len() {
            for j in 0..2 {
                score[j] += x[(i, j)] * (y[i] - mu[i]);
            }
        }
        assert!(score.iter().all(|s| s.abs() < opts.tol));
    }
}
