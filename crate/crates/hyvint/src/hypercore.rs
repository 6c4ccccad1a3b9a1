//! Hypergraph representation, dataset ingestion, degree/size statistics,
//! and the graph projections used by the metric suite.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed integer token {token:?}")]
    Parse { path: String, line: usize, token: String },
    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge {edge} is not strictly sorted")]
    NotSorted { edge: usize },
    #[error("benson pair mismatch: nverts sums to {expected} but simplices has {actual} entries")]
    BensonMismatch { expected: usize, actual: usize },
}

/// File format for hypergraph ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypergraphFormat {
    /// One hyperedge per line, whitespace-separated integer node ids.
    EdgeLines,
    /// Benson pair: an nverts file (one integer per simplex) plus a flat
    /// simplices node list.
    BensonPair,
}

/// A hypergraph as a node count plus a list of hyperedges, each a strictly
/// sorted list of node indices in [0, n). Plays the role of the binary
/// incidence matrix, materialized densely only on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceStructure {
    n: usize,
    edges: Vec<Vec<usize>>,
}

/// Symmetric nonnegative node-pair weights with zero diagonal.
#[derive(Debug, Clone)]
pub struct WeightedProjection {
    pub n: usize,
    pub weights: Array2<f64>,
}

impl IncidenceStructure {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self, HypergraphError> {
        for (j, edge) in edges.iter().enumerate() {
            for w in edge.windows(2) {
                if w[0] >= w[1] {
                    return Err(HypergraphError::NotSorted { edge: j });
                }
            }
            if let Some(&max) = edge.last() {
                if max >= n {
                    return Err(HypergraphError::IndexOutOfRange { index: max, n });
                }
            }
        }
        Ok(IncidenceStructure { n, edges })
    }

    /// Builds from unsorted member lists, deduplicating node mentions
    /// within each edge.
    pub fn from_members(n: usize, members: Vec<Vec<usize>>) -> Result<Self, HypergraphError> {
        let edges = members
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.dedup();
                e
            })
            .collect();
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// degrees[i] = number of edges containing node i (row sums of B).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for edge in &self.edges {
            for &v in edge {
                deg[v] += 1;
            }
        }
        deg
    }

    /// sizes[j] = |e_j| (column sums of B).
    pub fn sizes(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len()).collect()
    }

    /// Dense n x m matrix view of the incidences.
    pub fn dense(&self) -> Array2<f64> {
        let mut b = Array2::zeros((self.n, self.edges.len()));
        for (j, edge) in self.edges.iter().enumerate() {
            for &i in edge {
                b[[i, j]] = 1.0;
            }
        }
        b
    }

    /// Weighted clique expansion A = BBᵀ with zeroed diagonal.
    pub fn clique_expansion(&self) -> WeightedProjection {
        let mut w = Array2::zeros((self.n, self.n));
        for edge in &self.edges {
            for (a_pos, &a) in edge.iter().enumerate() {
                for &b in &edge[a_pos + 1..] {
                    w[[a, b]] += 1.0;
                    w[[b, a]] += 1.0;
                }
            }
        }
        WeightedProjection { n: self.n, weights: w }
    }

    /// Unweighted simple graph: edge present iff clique-expansion weight > 0.
    /// Returned as adjacency lists.
    pub fn binary_projection(&self) -> Vec<Vec<usize>> {
        let proj = self.clique_expansion();
        let mut adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for k in 0..self.n {
                if i != k && proj.weights[[i, k]] > 0.0 {
                    adj[i].push(k);
                }
            }
        }
        adj
    }

    /// Drops duplicate hyperedges, keeping first occurrences in order.
    pub fn dedup_edges(&self) -> IncidenceStructure {
        let mut seen = std::collections::HashSet::new();
        let edges: Vec<Vec<usize>> = self
            .edges
            .iter()
            .filter(|e| seen.insert((*e).clone()))
            .cloned()
            .collect();
        IncidenceStructure { n: self.n, edges }
    }

    /// Serializes in edge-lines format (one hyperedge per line).
    pub fn to_edge_lines(&self) -> String {
        let mut out = String::new();
        for edge in &self.edges {
            let mut first = true;
            for &v in edge {
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            out.push('\n');
        }
        out
    }

    pub fn write_edge_lines(&self, path: &Path) -> Result<(), HypergraphError> {
        fs::write(path, self.to_edge_lines()).map_err(|source| HypergraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Result of ingesting a dataset: the remapped structure plus the original
/// node id carried by each dense index, persisted alongside outputs for
/// traceability.
#[derive(Debug, Clone)]
pub struct LoadedHypergraph {
    pub structure: IncidenceStructure,
    pub original_ids: Vec<u64>,
}

/// Loads a hypergraph, remapping node ids to a dense [0, n) range in
/// first-appearance order. For `BensonPair`, `path` is the nverts file and
/// the simplices file is expected next to it with "nverts" replaced by
/// "simplices" in the file name (or at `<path>-simplices`).
pub fn load_hypergraph(path: &Path, format: HypergraphFormat) -> Result<LoadedHypergraph, HypergraphError> {
    match format {
        HypergraphFormat::EdgeLines => {
            let text = read(path)?;
            let mut raw_edges = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let ids = parse_ids(line, path, lineno + 1)?;
                raw_edges.push(ids);
            }
            Ok(remap(raw_edges))
        }
        HypergraphFormat::BensonPair => {
            let nverts_text = read(path)?;
            let simplices_path = benson_companion(path);
            let simplices_text = read(&simplices_path)?;
            let nverts = parse_token_stream(&nverts_text, path)?;
            let simplices = parse_token_stream(&simplices_text, &simplices_path)?;
            let expected: usize = nverts.iter().map(|&v| v as usize).sum();
            if expected != simplices.len() {
                return Err(HypergraphError::BensonMismatch { expected, actual: simplices.len() });
            }
            let mut raw_edges = Vec::with_capacity(nverts.len());
            let mut offset = 0usize;
            for &count in &nverts {
                let count = count as usize;
                raw_edges.push(simplices[offset..offset + count].to_vec());
                offset += count;
            }
            Ok(remap(raw_edges))
        }
    }
}

fn benson_companion(nverts_path: &Path) -> std::path::PathBuf {
    let name = nverts_path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    if name.contains("nverts") {
        nverts_path.with_file_name(name.replace("nverts", "simplices"))
    } else {
        let mut p = nverts_path.as_os_str().to_owned();
        p.push("-simplices");
        std::path::PathBuf::from(p)
    }
}

fn read(path: &Path) -> Result<String, HypergraphError> {
    fs::read_to_string(path).map_err(|source| HypergraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_ids(line: &str, path: &Path, lineno: usize) -> Result<Vec<u64>, HypergraphError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| HypergraphError::Parse {
                path: path.display().to_string(),
                line: lineno,
                token: tok.to_string(),
            })
        })
        .collect()
}

fn parse_token_stream(text: &str, path: &Path) -> Result<Vec<u64>, HypergraphError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        out.extend(parse_ids(line, path, lineno + 1)?);
    }
    Ok(out)
}

/// Remaps raw node ids to dense [0, n) in first-appearance order; node
/// mentions duplicated within one edge are collapsed.
fn remap(raw_edges: Vec<Vec<u64>>) -> LoadedHypergraph {
    let mut map: HashMap<u64, usize> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut edges = Vec::with_capacity(raw_edges.len());
    for raw in raw_edges {
        let mut edge: Vec<usize> = raw
            .into_iter()
            .map(|id| {
                *map.entry(id).or_insert_with(|| {
                    original_ids.push(id);
                    original_ids.len() - 1
                })
            })
            .collect();
        edge.sort_unstable();
        edge.dedup();
        edges.push(edge);
    }
    let n = original_ids.len();
    LoadedHypergraph {
        structure: IncidenceStructure { n, edges },
        original_ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn edge_lines_direct() {
        let f = write_tmp("0 1\n1 2\n");
        let loaded = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap();
        assert_eq!(loaded.structure.n(), 3);
        assert_eq!(loaded.structure.edges(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn edge_lines_remaps_first_appearance() {
        let f = write_tmp("5 9\n");
        let loaded = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap();
        assert_eq!(loaded.structure.n(), 2);
        assert_eq!(loaded.structure.edges(), &[vec![0, 1]]);
        assert_eq!(loaded.original_ids, vec![5, 9]);
    }

    #[test]
    fn edge_lines_dedups_within_line() {
        let f = write_tmp("3 3 4\n");
        let loaded = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap();
        assert_eq!(loaded.structure.edges(), &[vec![0, 1]]);
    }

    #[test]
    fn empty_file_gives_empty_structure() {
        let f = write_tmp("");
        let loaded = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap();
        assert_eq!(loaded.structure.m(), 0);
        assert_eq!(loaded.structure.n(), 0);
    }

    #[test]
    fn malformed_token_reports_line() {
        let f = write_tmp("0 1\n1 x\n");
        let err = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap_err();
        match err {
            HypergraphError::Parse { line, token, .. } => {
                assert_eq!(line, 2);
                assert_eq!(token, "x");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn benson_pair_split_by_prefix_sums() {
        let dir = tempfile::tempdir().unwrap();
        let nv = dir.path().join("toy-nverts.txt");
        let sp = dir.path().join("toy-simplices.txt");
        fs::write(&nv, "2\n3\n").unwrap();
        fs::write(&sp, "1\n2\n1\n3\n4\n").unwrap();
        let loaded = load_hypergraph(&nv, HypergraphFormat::BensonPair).unwrap();
        assert_eq!(loaded.structure.edges(), &[vec![0, 1], vec![0, 2, 3]]);
        assert_eq!(loaded.original_ids, vec![1, 2, 3, 4]);
    }

    #[test]
    fn benson_pair_mismatch_errors() {
        let dir = tempfile::tempdir().unwrap();
        let nv = dir.path().join("toy-nverts.txt");
        let sp = dir.path().join("toy-simplices.txt");
        fs::write(&nv, "2\n3\n").unwrap();
        fs::write(&sp, "1\n2\n1\n").unwrap();
        assert!(matches!(
            load_hypergraph(&nv, HypergraphFormat::BensonPair),
            Err(HypergraphError::BensonMismatch { .. })
        ));
    }

    #[test]
    fn degrees_and_sizes() {
        // B = [[1,1],[0,1]]: edges e0={0}, e1={0,1}
        let h = IncidenceStructure::new(2, vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(h.degrees(), vec![2, 1]);
        assert_eq!(h.sizes(), vec![1, 2]);
    }

    #[test]
    fn degrees_edge_cases() {
        let empty = IncidenceStructure::new(3, vec![]).unwrap();
        assert_eq!(empty.degrees(), vec![0, 0, 0]);
        assert!(empty.sizes().is_empty());
        let full = IncidenceStructure::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(full.degrees(), vec![1, 1, 1]);
        let singles = IncidenceStructure::new(1, vec![vec![0], vec![0]]).unwrap();
        assert_eq!(singles.sizes(), vec![1, 1]);
    }

    #[test]
    fn sum_degrees_equals_sum_sizes() {
        let h = IncidenceStructure::new(4, vec![vec![0, 1], vec![1, 2, 3], vec![0]]).unwrap();
        let d: usize = h.degrees().iter().sum();
        let s: usize = h.sizes().iter().sum();
        assert_eq!(d, s);
    }

    #[test]
    fn clique_expansion_counts_shared_edges() {
        let h = IncidenceStructure::new(2, vec![vec![0, 1]]).unwrap();
        let p = h.clique_expansion();
        assert_eq!(p.weights[[0, 1]], 1.0);
        assert_eq!(p.weights[[0, 0]], 0.0);

        let h2 = IncidenceStructure::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(h2.clique_expansion().weights[[0, 1]], 2.0);

        let empty = IncidenceStructure::new(3, vec![]).unwrap();
        assert!(empty.clique_expansion().weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn clique_expansion_symmetric_zero_diag() {
        let h = IncidenceStructure::new(5, vec![vec![0, 2, 4], vec![1, 2], vec![0, 2, 4]]).unwrap();
        let p = h.clique_expansion();
        for i in 0..5 {
            assert_eq!(p.weights[[i, i]], 0.0);
            for k in 0..5 {
                assert_eq!(p.weights[[i, k]], p.weights[[k, i]]);
                assert!(p.weights[[i, k]] >= 0.0);
                assert_eq!(p.weights[[i, k]].fract(), 0.0);
            }
        }
    }

    #[test]
    fn binary_projection_thresholds() {
        let h = IncidenceStructure::new(3, vec![vec![0, 1, 2]]).unwrap();
        let adj = h.binary_projection();
        // triangle on {0,1,2}
        assert_eq!(adj[0], vec![1, 2]);
        assert_eq!(adj[1], vec![0, 2]);
        assert_eq!(adj[2], vec![0, 1]);

        let empty = IncidenceStructure::new(2, vec![]).unwrap();
        assert!(empty.binary_projection().iter().all(|a| a.is_empty()));
    }

    #[test]
    fn edge_lines_round_trip() {
        let h = IncidenceStructure::new(4, vec![vec![0, 1], vec![1, 2, 3], vec![0]]).unwrap();
        let f = write_tmp(&h.to_edge_lines());
        let loaded = load_hypergraph(f.path(), HypergraphFormat::EdgeLines).unwrap();
        assert_eq!(loaded.structure, h);
    }

    #[test]
    fn dedup_retains_first_occurrence() {
        let h = IncidenceStructure::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 1]]).unwrap();
        let d = h.dedup_edges();
        assert_eq!(d.edges(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn invariant_validation() {
        assert!(IncidenceStructure::new(2, vec![vec![0, 2]]).is_err());
        assert!(IncidenceStructure::new(2, vec![vec![1, 0]]).is_err());
        assert!(IncidenceStructure::new(2, vec![vec![0, 0]]).is_err());
    }
}
