//! Symmetric eigensolver via the cyclic Jacobi rotation method.

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |M[{i}][{j}] - M[{j}][{i}]| = {diff}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("Jacobi iteration failed to converge")]
    NoConvergence,
}

const OFF_DIAG_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric real matrix, sorted ascending.
///
/// Runs cyclic Jacobi sweeps until every off-diagonal magnitude drops
/// below 1e-10. Input symmetry is checked to the same tolerance.
pub fn sym_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>, LinalgError> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    let n = rows;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (m[[i, j]] - m[[j, i]]).abs();
            if diff > 1e-10 {
                return Err(LinalgError::NotSymmetric { i, j, diff });
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut a = m.clone();
    // symmetrize so rotations operate on an exactly symmetric copy
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }

    for _sweep in 0..MAX_SWEEPS {
        let mut off_max = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off_max = off_max.max(a[[i, j]].abs());
            }
        }
        if off_max < OFF_DIAG_TOL {
            let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eig);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() < OFF_DIAG_TOL * 1e-2 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rng;
    use ndarray::array;

    #[test]
    fn identity_matrix() {
        let m = Array2::eye(3);
        assert_eq!(sym_eigenvalues(&m).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn k2_normalized_laplacian() {
        // L for the 2-node single-edge graph: [[1,-1],[-1,1]] → (0, 2)
        let m = array![[1.0, -1.0], [-1.0, 1.0]];
        let eig = sym_eigenvalues(&m).unwrap();
        assert!((eig[0] - 0.0).abs() < 1e-10);
        assert!((eig[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn trace_identity_random_5x5() {
        let mut rng = Rng::seeded(11);
        for _ in 0..20 {
            let mut m = Array2::zeros((5, 5));
            for i in 0..5 {
                for j in i..5 {
                    let v = rng.uniform_range(-2.0, 2.0);
                    m[[i, j]] = v;
                    m[[j, i]] = v;
                }
            }
            let trace: f64 = (0..5).map(|i| m[[i, i]]).sum();
            let eig_sum: f64 = sym_eigenvalues(&m).unwrap().iter().sum();
            assert!((trace - eig_sum).abs() < 1e-8);
        }
    }

    #[test]
    fn matches_characteristic_polynomial_2x2() {
        let mut rng = Rng::seeded(12);
        for _ in 0..50 {
            let a = rng.uniform_range(-3.0, 3.0);
            let b = rng.uniform_range(-3.0, 3.0);
            let d = rng.uniform_range(-3.0, 3.0);
            let m = array![[a, b], [b, d]];
            // roots of λ² − (a+d)λ + (ad − b²)
            let tr = a + d;
            let det = a * d - b * b;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let lo = (tr - disc) / 2.0;
            let hi = (tr + disc) / 2.0;
            let eig = sym_eigenvalues(&m).unwrap();
            assert!((eig[0] - lo).abs() < 1e-9);
            assert!((eig[1] - hi).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_symmetric() {
        let m = array![[1.0, 2.0], [0.0, 1.0]];
        assert!(matches!(sym_eigenvalues(&m), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn rejects_non_square() {
        let m = Array2::<f64>::zeros((2, 3));
        assert!(matches!(sym_eigenvalues(&m), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn empty_matrix() {
        let m = Array2::<f64>::zeros((0, 0));
        assert!(sym_eigenvalues(&m).unwrap().is_empty());
    }
}
