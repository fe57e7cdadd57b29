//! Cluster-robust sandwich covariance.

use nalgebra::DMatrix;

use super::NumericsError;

/// Sandwich covariance `bread^-1 * (sum of cluster score outer products) * bread^-T`.
///
/// `score_by_cluster` holds one row per cluster: the summed score
/// contributions of that cluster's observations, evaluated at the fitted
/// parameters. `bread` is the (symmetric) negative Jacobian of the total
/// score, e.g. the observed information of a likelihood fit.
pub fn sandwich_cov(
    score_by_cluster: &DMatrix<f64>,
    bread: &DMatrix<f64>,
) -> Result<DMatrix<f64>, NumericsError> {
    let p = bread.nrows();
    if bread.ncols() != p || score_by_cluster.ncols() != p {
        return Err(NumericsError::BadData("dimension mismatch between scores and bread".into()));
    }
    let meat = score_by_cluster.transpose() * score_by_cluster;
    let inv = bread
        .clone()
        .try_inverse()
        .ok_or_else(|| NumericsError::Singular("bread matrix".into()))?;
    Ok(&inv * meat * inv.transpose())
}
