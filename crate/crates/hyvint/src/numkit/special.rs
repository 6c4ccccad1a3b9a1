//! Gamma-family special functions.
//!
//! `log_gamma` uses the Lanczos approximation (g = 7, 9 coefficients) with a
//! reflection formula for x < 0.5. `digamma` and `trigamma` shift their
//! argument up to x >= 10 by the recurrences and then evaluate an asymptotic
//! series in 1/x.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("argument must be strictly positive, got {0}")]
    NonPositive(f64),
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_74;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Natural log of the Gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) {
        return Err(DomainError::NonPositive(x));
    }
    Ok(log_gamma_unchecked(x))
}

fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: ln Γ(x) = ln π − ln sin(πx) − ln Γ(1−x).
        return LN_PI - (std::f64::consts::PI * x).sin().ln() - log_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_TWO_PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) {
        return Err(DomainError::NonPositive(x));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic series: ψ(x) ~ ln x − 1/(2x) − Σ B_{2n}/(2n x^{2n}).
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(acc + x.ln() - 0.5 * inv - series)
}

/// Trigamma function ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) {
        return Err(DomainError::NonPositive(x));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // ψ'(x) ~ 1/x + 1/(2x²) + Σ B_{2n}/x^{2n+1}.
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0
            + inv * 0.5
            + inv2
                * (1.0 / 6.0
                    - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0)))));
    Ok(acc + series)
}
