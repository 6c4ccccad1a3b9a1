//! DDPM variance schedule and the closed-form forward marginal.

use crate::numkit::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("invalid schedule: T={t}, beta_start={beta_start}, beta_end={beta_end}")]
    InvalidRange { t: usize, beta_start: f64, beta_end: f64 },
    #[error("step {t} outside 1..={max}")]
    StepOutOfRange { t: usize, max: usize },
}

/// Variance schedule κ^(t) with the derived η^(t) = 1−κ^(t) and running
/// products η̄^(t).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub steps: usize,
    pub kappa: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_bar: Vec<f64>,
}

impl NoiseSchedule {
    pub fn from_kappa(kappa: Vec<f64>) -> Result<Self, ScheduleError> {
        let steps = kappa.len();
        if steps == 0 || kappa.iter().any(|&k| !(0.0 < k && k < 1.0)) {
            return Err(ScheduleError::InvalidRange {
                t: steps,
                beta_start: kappa.first().copied().unwrap_or(f64::NAN),
                beta_end: kappa.last().copied().unwrap_or(f64::NAN),
            });
        }
        let eta: Vec<f64> = kappa.iter().map(|k| 1.0 - k).collect();
        let mut eta_bar = Vec::with_capacity(steps);
        let mut prod = 1.0;
        for &e in &eta {
            prod *= e;
            eta_bar.push(prod);
        }
        Ok(NoiseSchedule { steps, kappa, eta, eta_bar })
    }

    /// One-indexed accessors matching the chain convention t = 1..T.
    pub fn kappa_at(&self, t: usize) -> f64 {
        self.kappa[t - 1]
    }

    pub fn eta_at(&self, t: usize) -> f64 {
        self.eta[t - 1]
    }

    pub fn eta_bar_at(&self, t: usize) -> f64 {
        self.eta_bar[t - 1]
    }
}

/// Linear interpolation of κ from beta_start to beta_end over t = 1..T.
pub fn linear_schedule(t: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule, ScheduleError> {
    if t < 1 || !(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0) {
        return Err(ScheduleError::InvalidRange { t, beta_start, beta_end });
    }
    let kappa = if t == 1 {
        vec![beta_start]
    } else {
        (0..t)
            .map(|i| beta_start + (beta_end - beta_start) * i as f64 / (t - 1) as f64)
            .collect()
    };
    NoiseSchedule::from_kappa(kappa)
}

/// Draws z^(t) = √η̄ z^(0) + √(1−η̄) ε, returning both the corrupted sample
/// and the exact noise used.
pub fn forward_marginal_sample(
    z0: &[f64],
    t: usize,
    schedule: &NoiseSchedule,
    rng: &mut Rng,
) -> Result<(Vec<f64>, Vec<f64>), ScheduleError> {
    if t < 1 || t > schedule.steps {
        return Err(ScheduleError::StepOutOfRange { t, max: schedule.steps });
    }
    let eta_bar = schedule.eta_bar_at(t);
    let (a, b) = (eta_bar.sqrt(), (1.0 - eta_bar).sqrt());
    let eps: Vec<f64> = z0.iter().map(|_| rng.sample_gaussian()).collect();
    let zt: Vec<f64> = z0.iter().zip(&eps).map(|(&z, &e)| a * z + b * e).collect();
    Ok((zt, eps))
}
