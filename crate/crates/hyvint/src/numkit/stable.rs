//! Numerically stable scalar helpers.

/// Evaluates log(exp(exp(s)) − 1) without overflow.
///
/// For exp(s) > 30 the −1 is below double precision relative to exp(exp(s)),
/// so the result is exp(s) itself; otherwise we go through expm1.
pub fn log_expm1_exp(s: f64) -> f64 {
    // branch on s directly: exp(s) > 30 <=> s > ln 30
    if s > 30f64.ln() {
        s.exp()
    } else {
        s.exp().exp_m1().ln()
    }
}

/// Max-shifted log-sum-exp over a slice. Returns −inf on empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_expm1_exp_at_zero() {
        // log(e − 1)
        assert_relative_eq!(log_expm1_exp(0.0), 0.541_324_854_6, epsilon = 1e-9);
    }

    #[test]
    fn log_expm1_exp_small_argument() {
        // expm1(x) ≈ x for tiny x, so result ≈ s
        let s = -20.0;
        assert!((log_expm1_exp(s) - s).abs() < 1e-8);
    }

    #[test]
    fn log_expm1_exp_large_branch() {
        assert_relative_eq!(log_expm1_exp(10.0), 10f64.exp(), max_relative = 1e-13);
        // no overflow up to s = 700
        assert!(log_expm1_exp(700.0).is_finite());
    }

    #[test]
    fn log_expm1_exp_branch_continuity() {
        let a = log_expm1_exp(30f64.ln() - 1e-9);
        let b = log_expm1_exp(30f64.ln() + 1e-9);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.3f64, -1.2, 2.5];
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), direct, epsilon = 1e-12);
        // large shifts do not overflow
        let xs = [1000.0, 1000.0];
        assert_relative_eq!(log_sum_exp(&xs), 1000.0 + 2f64.ln(), epsilon = 1e-12);
    }
}
