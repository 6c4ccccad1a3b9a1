//! Synthetic hypergraph generation: truncated Gaussian mixture embeddings,
//! uniform activity parameters, and incidence draws under either the
//! exponential-intensity link or a logistic link.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid config: K, n, m must all be at least 1")]
    BadConfig,
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Range the per-edge activity is drawn from; the shifted regime produces
/// denser hypergraphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoRange {
    /// Unif[0, 1]
    Unit,
    /// Unif[1, 2]
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// p = 1 - e^{-lambda}
    Poisson,
    /// p = sigma(beta . theta + alpha); edge activity is unused here
    Sigmoid,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub rho_range: RhoRange,
    pub link: Link,
    pub seed: u64,
}

/// All latent parameters behind one synthetic hypergraph, kept for oracle
/// comparisons against fitted models.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub alpha: Vec<f64>,
    pub rho: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

const STREAM_ALPHA: u64 = 0x5301;
const STREAM_RHO: u64 = 0x5302;
const STREAM_THETA: u64 = 0x5303;
const STREAM_BETA: u64 = 0x5304;
const STREAM_EDGE_BASE: u64 = 0x5300_0000;

fn sample_embeddings_with_components(
    k: usize,
    count: usize,
    sign: f64,
    rng: &mut Rng,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let sqrt_k = (k as f64).sqrt();
    let hi = 2.0 / sqrt_k;
    let mut vecs = Vec::with_capacity(count);
    let mut comps = Vec::with_capacity(count);
    for _ in 0..count {
        let comp = rng.gen_index(k);
        let v: Vec<f64> = (0..k)
            .map(|d| {
                let mean = (1.0 + if d == comp { sign } else { 0.0 }) / sqrt_k;
                rng.sample_truncated_gaussian(mean, 0.0, hi)
                    .expect("interval mass is far from negligible")
            })
            .collect();
        vecs.push(v);
        comps.push(comp);
    }
    (vecs, comps)
}

/// Node embeddings: mixture component k shifts the mean up by e_k/sqrt(K),
/// each coordinate truncated to [0, 2/sqrt(K)].
pub fn sample_node_embeddings(k: usize, count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    sample_embeddings_with_components(k, count, 1.0, rng).0
}

/// Edge embeddings: same mixture but shifted down by e_k/sqrt(K).
pub fn sample_edge_embeddings(k: usize, count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    sample_embeddings_with_components(k, count, -1.0, rng).0
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Incidence sampling at fixed latents; each edge uses an independent
/// substream keyed by (seed, edge index).
pub fn sample_incidence_from_truth(
    truth: &GroundTruth,
    link: Link,
    seed: u64,
) -> IncidenceStructure {
    let n = truth.alpha.len();
    let m = truth.rho.len();
    let mut edges = Vec::with_capacity(m);
    for j in 0..m {
        let mut rng = Rng::stream(seed, STREAM_EDGE_BASE + j as u64);
        let mut members = Vec::new();
        for i in 0..n {
            let dot: f64 = truth.theta[i].iter().zip(&truth.beta[j]).map(|(t, b)| t * b).sum();
            let p = match link {
                Link::Poisson => {
                    let lambda = truth.alpha[i] * truth.rho[j] * dot;
                    -(-lambda).exp_m1()
                }
                Link::Sigmoid => logistic(dot + truth.alpha[i]),
            };
            if rng.uniform() < p {
                members.push(i);
            }
        }
        edges.push(members);
    }
    IncidenceStructure::new(n, edges).expect("members sorted and in range")
}

/// Draws all latents from the configured distributions and samples one
/// hypergraph, returning both.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(IncidenceStructure, GroundTruth), SynthError> {
    if cfg.k < 1 || cfg.n < 1 || cfg.m < 1 {
        return Err(SynthError::BadConfig);
    }
    let mut alpha_rng = Rng::stream(cfg.seed, STREAM_ALPHA);
    let alpha: Vec<f64> = (0..cfg.n).map(|_| alpha_rng.uniform()).collect();
    let mut rho_rng = Rng::stream(cfg.seed, STREAM_RHO);
    let rho: Vec<f64> = (0..cfg.m)
        .map(|_| match cfg.rho_range {
            RhoRange::Unit => rho_rng.uniform(),
            RhoRange::Shifted => 1.0 + rho_rng.uniform(),
        })
        .collect();
    let mut theta_rng = Rng::stream(cfg.seed, STREAM_THETA);
    let theta = sample_node_embeddings(cfg.k, cfg.n, &mut theta_rng);
    let mut beta_rng = Rng::stream(cfg.seed, STREAM_BETA);
    let beta = sample_edge_embeddings(cfg.k, cfg.m, &mut beta_rng);

    let truth = GroundTruth { alpha, rho, theta, beta };
    let structure = sample_incidence_from_truth(&truth, cfg.link, cfg.seed);
    Ok((structure, truth))
}

/// Persists ground-truth latents as a plain `role index k value` table.
pub fn save_ground_truth(path: &Path, truth: &GroundTruth) -> Result<(), SynthError> {
    let mut out = String::new();
    let _ = writeln!(out, "# hyvint ground truth v1");
    let _ = writeln!(out, "# role index k value");
    for (i, a) in truth.alpha.iter().enumerate() {
        let _ = writeln!(out, "alpha {i} 0 {a:e}");
    }
    for (j, r) in truth.rho.iter().enumerate() {
        let _ = writeln!(out, "rho {j} 0 {r:e}");
    }
    for (i, row) in truth.theta.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let _ = writeln!(out, "theta {i} {k} {v:e}");
        }
    }
    for (j, row) in truth.beta.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let _ = writeln!(out, "beta {j} {k} {v:e}");
        }
    }
    fs::write(path, out).map_err(|e| SynthError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> SynthConfig {
        SynthConfig {
            k: 2,
            n: 40,
            m: 40,
            rho_range: RhoRange::Unit,
            link: Link::Poisson,
            seed,
        }
    }

    #[test]
    fn embeddings_stay_in_support() {
        for k in [1usize, 2, 4] {
            let hi = 2.0 / (k as f64).sqrt();
            let mut rng = Rng::seeded(k as u64);
            for v in sample_node_embeddings(k, 500, &mut rng)
                .into_iter()
                .chain(sample_edge_embeddings(k, 500, &mut rng))
            {
                assert_eq!(v.len(), k);
                assert!(v.iter().all(|&x| (0.0..=hi).contains(&x)), "{v:?} outside [0, {hi}]");
            }
        }
    }

    #[test]
    fn single_component_node_draws_cluster_at_upper_boundary() {
        // K = 1: node mean is 2, the upper truncation point, so the draws
        // should sit well above the interval midpoint on average
        let mut rng = Rng::seeded(4);
        let draws = sample_node_embeddings(1, 2_000, &mut rng);
        let mean: f64 = draws.iter().map(|v| v[0]).sum::<f64>() / 2_000.0;
        // truncated N(2,1) on [0,2] has mean about 1.28
        assert!(mean > 1.2, "mean={mean}");
        // edge mean is 0, mirrored at the lower boundary
        let draws = sample_edge_embeddings(1, 2_000, &mut rng);
        let mean: f64 = draws.iter().map(|v| v[0]).sum::<f64>() / 2_000.0;
        assert!(mean < 0.8, "mean={mean}");
    }

    #[test]
    fn component_frequencies_are_uniform() {
        let k = 4;
        let nmc = 10_000;
        let mut rng = Rng::seeded(5);
        let (_, comps) = sample_embeddings_with_components(k, nmc, 1.0, &mut rng);
        let mut counts = vec![0usize; k];
        for c in comps {
            counts[c] += 1;
        }
        let p = 1.0 / k as f64;
        let se = (p * (1.0 - p) * nmc as f64).sqrt();
        for c in counts {
            assert!((c as f64 - nmc as f64 * p).abs() < 3.0 * se, "count={c}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_structure() {
        let (a, ta) = generate_synthetic(&cfg(7)).unwrap();
        let (b, tb) = generate_synthetic(&cfg(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate_synthetic(&cfg(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_alpha_gives_empty_hypergraph() {
        let (_, mut truth) = generate_synthetic(&cfg(9)).unwrap();
        for a in &mut truth.alpha {
            *a = 0.0;
        }
        let h = sample_incidence_from_truth(&truth, Link::Poisson, 9);
        assert!(h.edges().iter().all(|e| e.is_empty()));
    }

    #[test]
    fn intensities_are_nonnegative() {
        let (_, truth) = generate_synthetic(&cfg(10)).unwrap();
        for i in 0..truth.alpha.len() {
            for j in 0..truth.rho.len() {
                let dot: f64 =
                    truth.theta[i].iter().zip(&truth.beta[j]).map(|(t, b)| t * b).sum();
                assert!(truth.alpha[i] * truth.rho[j] * dot >= 0.0);
            }
        }
    }

    #[test]
    fn inclusion_frequency_matches_link_at_fixed_latents() {
        let truth = GroundTruth {
            alpha: vec![0.9],
            rho: vec![1.4],
            theta: vec![vec![0.8, 0.3]],
            beta: vec![vec![0.6, 0.9]],
        };
        let dot = 0.8 * 0.6 + 0.3 * 0.9;
        let lambda = 0.9 * 1.4 * dot;
        let p = 1.0 - (-lambda as f64).exp();
        let nmc = 10_000;
        let mut hits = 0usize;
        for seed in 0..nmc {
            let h = sample_incidence_from_truth(&truth, Link::Poisson, seed as u64);
            if !h.edges()[0].is_empty() {
                hits += 1;
            }
        }
        let se = (p * (1.0 - p) / nmc as f64).sqrt();
        assert!((hits as f64 / nmc as f64 - p).abs() < 3.0 * se, "freq={}", hits as f64 / nmc as f64);
    }

    #[test]
    fn sigmoid_link_ignores_rho_and_uses_additive_activity() {
        let base = GroundTruth {
            alpha: vec![5.0, -20.0],
            rho: vec![0.5],
            theta: vec![vec![1.0], vec![1.0]],
            beta: vec![vec![1.0]],
        };
        // alpha = 5 drives p near 1, alpha = -20 near 0
        let h = sample_incidence_from_truth(&base, Link::Sigmoid, 3);
        assert_eq!(h.edges()[0], vec![0]);
        let mut scaled = base.clone();
        scaled.rho[0] = 123.0;
        let h2 = sample_incidence_from_truth(&scaled, Link::Sigmoid, 3);
        assert_eq!(h.edges(), h2.edges());
    }

    #[test]
    fn ground_truth_table_has_all_roles() {
        let (_, truth) = generate_synthetic(&cfg(11)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.tsv");
        save_ground_truth(&path, &truth).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let count = |role: &str| text.lines().filter(|l| l.starts_with(role)).count();
        assert_eq!(count("alpha "), 40);
        assert_eq!(count("rho "), 40);
        assert_eq!(count("theta "), 80);
        assert_eq!(count("beta "), 80);
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = cfg(1);
        c.k = 0;
        assert_eq!(generate_synthetic(&c), Err(SynthError::BadConfig));
    }
}
