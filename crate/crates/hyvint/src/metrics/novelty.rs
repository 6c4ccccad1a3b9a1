//! Novelty and diversity of a generated edge set relative to a reference:
//! unique-hyperedge ratio, novel-hyperedge ratio, pairwise Jaccard distance.

use std::collections::HashSet;

use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;

/// Above this edge count PJD switches to seeded pair subsampling.
pub const PJD_EXACT_LIMIT: usize = 2000;
const PJD_SUBSAMPLE_PAIRS: usize = 50_000;
const PJD_SUBSAMPLE_SEED: u64 = 0x504a_44;

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyDiversity {
    pub uhr: f64,
    pub nhr: f64,
    pub pjd: f64,
    /// false when the generated set has no unique edges, making nhr undefined
    pub nhr_defined: bool,
    /// false when fewer than two generated edges exist, making pjd undefined
    pub pjd_defined: bool,
    pub pjd_subsampled: bool,
}

/// Jaccard distance between two sorted member lists; two empty edges are
/// identical (distance 0).
fn jaccard_distance(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut inter = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    1.0 - inter as f64 / union as f64
}

pub fn novelty_diversity(
    reference: &IncidenceStructure,
    generated: &IncidenceStructure,
) -> NoveltyDiversity {
    let gen_edges = generated.edges();
    let m_tilde = gen_edges.len();

    let unique: HashSet<&Vec<usize>> = gen_edges.iter().collect();
    let uhr = if m_tilde == 0 { 0.0 } else { unique.len() as f64 / m_tilde as f64 };

    let ref_set: HashSet<&Vec<usize>> = reference.edges().iter().collect();
    let (nhr, nhr_defined) = if unique.is_empty() {
        (0.0, false)
    } else {
        let novel = unique.iter().filter(|e| !ref_set.contains(**e)).count();
        (novel as f64 / unique.len() as f64, true)
    };

    let (pjd, pjd_defined, pjd_subsampled) = if m_tilde < 2 {
        (0.0, false, false)
    } else if m_tilde <= PJD_EXACT_LIMIT {
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for j in 0..m_tilde {
            for l in j + 1..m_tilde {
                sum += jaccard_distance(&gen_edges[j], &gen_edges[l]);
                pairs += 1;
            }
        }
        (sum / pairs as f64, true, false)
    } else {
        let mut rng = Rng::seeded(PJD_SUBSAMPLE_SEED);
        let mut sum = 0.0;
        for _ in 0..PJD_SUBSAMPLE_PAIRS {
            let j = rng.gen_index(m_tilde);
            let mut l = rng.gen_index(m_tilde - 1);
            if l >= j {
                l += 1;
            }
            sum += jaccard_distance(&gen_edges[j], &gen_edges[l]);
        }
        (sum / PJD_SUBSAMPLE_PAIRS as f64, true, true)
    };

    NoveltyDiversity { uhr, nhr, pjd, nhr_defined, pjd_defined, pjd_subsampled }
}
