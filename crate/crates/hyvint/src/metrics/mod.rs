//! Evaluation metrics comparing a generated hypergraph against a reference:
//! membership-moment RMSEs, Wasserstein-1 structural losses, and
//! novelty/diversity ratios.

mod moments;
mod novelty;
mod structural;
mod w1;

use crate::hypercore::IncidenceStructure;
use thiserror::Error;

pub use moments::{empirical_mean_cov, rmse_pair};
pub use novelty::{novelty_diversity, NoveltyDiversity, PJD_EXACT_LIMIT};
pub use structural::{
    betweenness_centrality, bfs_distances, closeness_centrality, harmonic_centrality,
    laplacian_spectrum, normalized_laplacian, structural_losses, StructuralLosses,
};
pub use w1::w1_empirical;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("structure has no hyperedges")]
    NoEdges,
    #[error("node counts differ: reference {reference}, generated {generated}")]
    NodeCountMismatch { reference: usize, generated: usize },
    #[error("empty sample for distribution distance")]
    EmptySample,
    #[error("eigensolver: {0}")]
    Eigen(#[from] crate::numkit::LinalgError),
}

/// The full metric panel for one (reference, generated) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rmse_mean: f64,
    pub rmse_cov: f64,
    pub l_deg: f64,
    pub l_size: f64,
    pub l_spec: f64,
    pub l_cent_closeness: f64,
    pub l_cent_harmonic: f64,
    pub l_cent_betweenness: f64,
    pub uhr: f64,
    pub nhr: f64,
    pub pjd: f64,
    pub nhr_defined: bool,
    pub pjd_defined: bool,
    pub pjd_subsampled: bool,
}

pub fn compute_report(
    reference: &IncidenceStructure,
    generated: &IncidenceStructure,
) -> Result<MetricsReport, MetricsError> {
    let (rmse_mean, rmse_cov) = rmse_pair(reference, generated)?;
    let s = structural_losses(reference, generated)?;
    let nd = novelty_diversity(reference, generated);
    Ok(MetricsReport {
        rmse_mean,
        rmse_cov,
        l_deg: s.l_deg,
        l_size: s.l_size,
        l_spec: s.l_spec,
        l_cent_closeness: s.l_cent_closeness,
        l_cent_harmonic: s.l_cent_harmonic,
        l_cent_betweenness: s.l_cent_betweenness,
        uhr: nd.uhr,
        nhr: nd.nhr,
        pjd: nd.pjd,
        nhr_defined: nd.nhr_defined,
        pjd_defined: nd.pjd_defined,
        pjd_subsampled: nd.pjd_subsampled,
    })
}

impl MetricsReport {
    /// Flat key=value block, one metric per line.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: f64| out.push_str(&format!("{k}={v:e}\n"));
        push("rmse_mean", self.rmse_mean);
        push("rmse_cov", self.rmse_cov);
        push("l_deg", self.l_deg);
        push("l_size", self.l_size);
        push("l_spec", self.l_spec);
        push("l_cent_c", self.l_cent_closeness);
        push("l_cent_h", self.l_cent_harmonic);
        push("l_cent_b", self.l_cent_betweenness);
        push("uhr", self.uhr);
        push("nhr", self.nhr);
        push("pjd", self.pjd);
        out.push_str(&format!("nhr_defined={}\n", self.nhr_defined));
        out.push_str(&format!("pjd_defined={}\n", self.pjd_defined));
        out.push_str(&format!("pjd_subsampled={}\n", self.pjd_subsampled));
        out
    }

    pub fn csv_header() -> &'static str {
        "dataset,method,K,n,m,seed,rmse_mean,rmse_cov,l_deg,l_size,l_spec,l_cent_c,l_cent_h,l_cent_b,uhr,nhr,pjd,filtered_edges,runtime_s"
    }

    /// One CSV row in the header's column order.
    #[allow(clippy::too_many_arguments)]
    pub fn csv_row(
        &self,
        dataset: &str,
        method: &str,
        k: usize,
        n: usize,
        m: usize,
        seed: u64,
        filtered_edges: usize,
        runtime_s: f64,
    ) -> String {
        format!(
            "{dataset},{method},{k},{n},{m},{seed},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{filtered_edges},{runtime_s:e}",
            self.rmse_mean,
            self.rmse_cov,
            self.l_deg,
            self.l_size,
            self.l_spec,
            self.l_cent_closeness,
            self.l_cent_harmonic,
            self.l_cent_betweenness,
            self.uhr,
            self.nhr,
            self.pjd,
        )
    }
}
