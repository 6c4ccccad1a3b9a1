//! Exact 1-D Wasserstein-1 distance between empirical measures.

use crate::metrics::MetricsError;

/// W1 between the empirical measures of two real multisets, possibly of
/// different cardinalities, as the integral of |CDF_x - CDF_y| over the
/// merged breakpoints.
pub fn w1_empirical(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut xs: Vec<f64> = xs.to_vec();
    let mut ys: Vec<f64> = ys.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (wx, wy) = (1.0 / xs.len() as f64, 1.0 / ys.len() as f64);

    let mut total = 0.0f64;
    let mut fx = 0.0f64;
    let mut fy = 0.0f64;
    let (mut ix, mut iy) = (0usize, 0usize);
    let mut prev = f64::NAN;
    loop {
        let next = match (xs.get(ix), ys.get(iy)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        if prev.is_finite() && next > prev {
            total += (fx - fy).abs() * (next - prev);
        }
        while ix < xs.len() && xs[ix] <= next {
            fx += wx;
            ix += 1;
        }
        while iy < ys.len() && ys[iy] <= next {
            fy += wy;
            iy += 1;
        }
        prev = next;
    }
    Ok(total)
}
