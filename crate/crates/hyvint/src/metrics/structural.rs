//! Structural comparison losses: degree/size distributions, normalized
//! Laplacian spectrum of the weighted clique expansion, and three
//! centralities on the binary projection.

use ndarray::Array2;

use crate::hypercore::IncidenceStructure;
use crate::metrics::w1::w1_empirical;
use crate::metrics::MetricsError;
use crate::numkit::sym_eigenvalues;

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralLosses {
    pub l_deg: f64,
    pub l_size: f64,
    pub l_spec: f64,
    pub l_cent_closeness: f64,
    pub l_cent_harmonic: f64,
    pub l_cent_betweenness: f64,
}

/// Normalized Laplacian L = I - D^{-1/2} A D^{-1/2} of a weighted adjacency
/// matrix; rows with zero degree keep only the identity entry.
pub fn normalized_laplacian(weights: &Array2<f64>) -> Array2<f64> {
    let n = weights.nrows();
    let deg: Vec<f64> = (0..n).map(|i| weights.row(i).sum()).collect();
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        l[[i, i]] = 1.0;
        for j in 0..n {
            l[[i, j]] -= inv_sqrt[i] * weights[[i, j]] * inv_sqrt[j];
        }
    }
    l
}

pub fn laplacian_spectrum(h: &IncidenceStructure) -> Result<Vec<f64>, MetricsError> {
    let proj = h.clique_expansion();
    sym_eigenvalues(&normalized_laplacian(&proj.weights)).map_err(MetricsError::Eigen)
}

/// BFS distances from `source`; usize::MAX marks unreachable nodes.
pub fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Closeness with the within-component convention: for a node whose
/// component has r nodes, ((r-1)/(n-1)) * ((r-1)/sum of distances); isolated
/// nodes score 0.
pub fn closeness_centrality(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|v| {
            let dist = bfs_distances(adj, v);
            let mut r = 0usize;
            let mut total = 0usize;
            for &d in &dist {
                if d != usize::MAX {
                    r += 1;
                    total += d;
                }
            }
            if r <= 1 || n <= 1 || total == 0 {
                0.0
            } else {
                let reach = (r - 1) as f64;
                (reach / (n - 1) as f64) * (reach / total as f64)
            }
        })
        .collect()
}

/// Harmonic centrality: sum of inverse distances, unreachable pairs
/// contributing zero.
pub fn harmonic_centrality(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|v| {
            bfs_distances(adj, v)
                .iter()
                .enumerate()
                .filter(|&(u, &d)| u != v && d != usize::MAX)
                .map(|(_, &d)| 1.0 / d as f64)
                .sum()
        })
        .collect()
}

/// Unnormalized betweenness via Brandes' accumulation; undirected pair
/// fractions are counted once.
pub fn betweenness_centrality(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut bc = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![i64::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            stack.push(u);
            for &w in &adj[u] {
                if dist[w] == i64::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[u] + 1 {
                    sigma[w] += sigma[u];
                    preds[w].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &u in &preds[w] {
                delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    for v in &mut bc {
        *v /= 2.0;
    }
    bc
}

pub fn structural_losses(
    reference: &IncidenceStructure,
    generated: &IncidenceStructure,
) -> Result<StructuralLosses, MetricsError> {
    if reference.n() != generated.n() {
        return Err(MetricsError::NodeCountMismatch {
            reference: reference.n(),
            generated: generated.n(),
        });
    }
    let as_f64 = |v: Vec<usize>| -> Vec<f64> { v.into_iter().map(|x| x as f64).collect() };
    let l_deg = w1_empirical(&as_f64(reference.degrees()), &as_f64(generated.degrees()))?;
    let l_size = w1_empirical(&as_f64(reference.sizes()), &as_f64(generated.sizes()))?;
    let l_spec = w1_empirical(&laplacian_spectrum(reference)?, &laplacian_spectrum(generated)?)?;

    let adj_r = reference.binary_projection();
    let adj_g = generated.binary_projection();
    let l_cent_closeness = w1_empirical(&closeness_centrality(&adj_r), &closeness_centrality(&adj_g))?;
    let l_cent_harmonic = w1_empirical(&harmonic_centrality(&adj_r), &harmonic_centrality(&adj_g))?;
    let l_cent_betweenness =
        w1_empirical(&betweenness_centrality(&adj_r), &betweenness_centrality(&adj_g))?;

    Ok(StructuralLosses {
        l_deg,
        l_size,
        l_spec,
        l_cent_closeness,
        l_cent_harmonic,
        l_cent_betweenness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rng;
    use approx::assert_relative_eq;

    fn h(n: usize, edges: Vec<Vec<usize>>) -> IncidenceStructure {
        IncidenceStructure::new(n, edges).unwrap()
    }

    fn path3() -> Vec<Vec<usize>> {
        vec![vec![1], vec![0, 2], vec![1]]
    }

    #[test]
    fn self_comparison_is_all_zero() {
        let s = h(4, vec![vec![0, 1, 2], vec![2, 3]]);
        let l = structural_losses(&s, &s).unwrap();
        assert_eq!(
            (l.l_deg, l.l_size, l.l_spec, l.l_cent_closeness, l.l_cent_harmonic, l.l_cent_betweenness),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn path_graph_centralities() {
        let adj = path3();
        let c = closeness_centrality(&adj);
        assert_relative_eq!(c[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c[0], 2.0 / 3.0, epsilon = 1e-12);
        let hm = harmonic_centrality(&adj);
        assert_relative_eq!(hm[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(hm[0], 1.5, epsilon = 1e-12);
        let b = betweenness_centrality(&adj);
        assert_relative_eq!(b[1], 1.0, epsilon = 1e-12);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[2], 0.0);
    }

    #[test]
    fn k2_spectrum_is_zero_two() {
        let s = h(2, vec![vec![0, 1]]);
        let eigs = laplacian_spectrum(&s).unwrap();
        assert_relative_eq!(eigs[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[1], 2.0, epsilon = 1e-10);
        let t = h(2, vec![vec![0, 1], vec![0, 1]]);
        let l = structural_losses(&s, &t).unwrap();
        assert!(l.l_spec.abs() < 1e-10);
    }

    #[test]
    fn isolated_node_conventions() {
        // node 2 is isolated
        let s = h(3, vec![vec![0, 1]]);
        let adj = s.binary_projection();
        let c = closeness_centrality(&adj);
        assert_eq!(c[2], 0.0);
        // reachable part only: closeness of node 0 scaled by (r-1)/(n-1)
        assert_relative_eq!(c[0], 0.5, epsilon = 1e-12);
        let hm = harmonic_centrality(&adj);
        assert_eq!(hm[2], 0.0);
        assert_relative_eq!(hm[0], 1.0, epsilon = 1e-12);
        let eigs = laplacian_spectrum(&s).unwrap();
        assert!(eigs.iter().all(|&l| (-1e-10..=2.0 + 1e-10).contains(&l)), "{eigs:?}");
    }

    #[test]
    fn spectrum_stays_in_unit_band_on_random_structures() {
        let mut rng = Rng::seeded(31);
        for _ in 0..5 {
            let n = 10;
            let edges: Vec<Vec<usize>> = (0..12)
                .map(|_| (0..n).filter(|_| rng.uniform() < 0.3).collect())
                .collect();
            let eigs = laplacian_spectrum(&h(n, edges)).unwrap();
            assert!(eigs.iter().all(|&l| (-1e-8..=2.0 + 1e-8).contains(&l)), "{eigs:?}");
        }
    }

    #[test]
    fn star_betweenness_counts_all_pairs_through_hub() {
        // star K_{1,4}: hub on all shortest paths between the 4 leaves
        let s = h(5, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4]]);
        let b = betweenness_centrality(&s.binary_projection());
        assert_relative_eq!(b[0], 6.0, epsilon = 1e-12); // C(4,2) leaf pairs
        assert!(b[1..].iter().all(|&x| x == 0.0));
    }
}
