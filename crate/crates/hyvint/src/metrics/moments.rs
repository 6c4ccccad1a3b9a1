//! Membership moment statistics and their RMSE comparison.

use ndarray::{Array1, Array2};

use crate::hypercore::IncidenceStructure;
use crate::metrics::MetricsError;

/// Empirical mean membership vector and covariance matrix of the incidence
/// columns: mu = (1/m) B 1, Sigma = (1/m) B Bt - mu mut.
pub fn empirical_mean_cov(h: &IncidenceStructure) -> Result<(Array1<f64>, Array2<f64>), MetricsError> {
    let m = h.m();
    if m == 0 {
        return Err(MetricsError::NoEdges);
    }
    let b = h.dense();
    let mu = b.sum_axis(ndarray::Axis(1)) / m as f64;
    let mut sigma = b.dot(&b.t()) / m as f64;
    for i in 0..h.n() {
        for j in 0..h.n() {
            sigma[[i, j]] -= mu[i] * mu[j];
        }
    }
    Ok((mu, sigma))
}

/// RMSE_mean = ||mu_ref - mu_gen||_2 / sqrt(n); RMSE_cov = ||Sigma_ref -
/// Sigma_gen||_F / n. The generated structure may have a different edge count
/// but must share the node set.
pub fn rmse_pair(
    reference: &IncidenceStructure,
    generated: &IncidenceStructure,
) -> Result<(f64, f64), MetricsError> {
    if reference.n() != generated.n() {
        return Err(MetricsError::NodeCountMismatch {
            reference: reference.n(),
            generated: generated.n(),
        });
    }
    let n = reference.n() as f64;
    let (mu_r, sig_r) = empirical_mean_cov(reference)?;
    let (mu_g, sig_g) = empirical_mean_cov(generated)?;
    let rmse_mean = (&mu_r - &mu_g).mapv(|d| d * d).sum().sqrt() / n.sqrt();
    let rmse_cov = (&sig_r - &sig_g).mapv(|d| d * d).sum().sqrt() / n;
    Ok((rmse_mean, rmse_cov))
}
