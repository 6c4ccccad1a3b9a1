//! Objective evaluation and analytic gradients for the mean-field fit.
//!
//! The objective decomposes into a positive-incidence term (estimated by an
//! auxiliary-distribution lower bound or a second-order Taylor expansion), a
//! total-intensity penalty computed with factorized sums, a prior
//! cross-entropy, and the variational entropy.

use crate::hypercore::IncidenceStructure;
use crate::numkit::{log_expm1_exp, log_sum_exp, trigamma};
use crate::vi::state::{Estimator, GammaFactor, PriorSpec, VariationalState};

/// Below this mean intensity the Taylor estimator returns the sentinel floor
/// instead of diverging.
pub const TAYLOR_INTENSITY_FLOOR: f64 = 1e-12;
/// Sentinel value for Taylor terms at (numerically) zero intensity.
pub const TAYLOR_SENTINEL: f64 = -700.0;

/// E_q[λ_ij] under independent Gamma factors: the product of factor means.
pub fn expected_intensity(state: &VariationalState, i: usize, j: usize) -> f64 {
    let dot: f64 = (0..state.k())
        .map(|k| state.theta(i, k).mean() * state.beta(j, k).mean())
        .sum();
    state.node_activity[i].mean() * state.edge_activity[j].mean() * dot
}

/// Lower-bound log-mean S̲_ij for log λ under the auxiliary-weight bound.
fn s_lower(state: &VariationalState, i: usize, j: usize) -> f64 {
    let terms: Vec<f64> = (0..state.k())
        .map(|k| state.theta(i, k).mean_log() + state.beta(j, k).mean_log())
        .collect();
    state.node_activity[i].mean_log() + state.edge_activity[j].mean_log() + log_sum_exp(&terms)
}

/// Auxiliary-distribution lower bound for the positive-incidence term:
/// −E_q[λ] + log(exp(exp(S̲)) − 1).
pub fn term_i_lower_bound(state: &VariationalState, i: usize, j: usize) -> f64 {
    -expected_intensity(state, i, j) + log_expm1_exp(s_lower(state, i, j))
}

/// Exact variance of λ_ij from independent-Gamma second moments, expanding
/// the product of sums with the shared activity factors.
pub fn intensity_variance(state: &VariationalState, i: usize, j: usize) -> f64 {
    let k = state.k();
    let mut dot = 0.0;
    let mut sq_sum = 0.0;
    let mut sec_sum = 0.0;
    for t in 0..k {
        let mt = state.theta(i, t).mean() * state.beta(j, t).mean();
        dot += mt;
        sq_sum += mt * mt;
        sec_sum += state.theta(i, t).second_moment() * state.beta(j, t).second_moment();
    }
    let q = sec_sum + dot * dot - sq_sum; // E[(Σ_k θ_k β_k)²]
    let second = state.node_activity[i].second_moment() * state.edge_activity[j].second_moment() * q;
    let mu = state.node_activity[i].mean() * state.edge_activity[j].mean() * dot;
    second - mu * mu
}

fn f_log1m_exp(x: f64) -> f64 {
    // log(1 − e^{−x}) for x > 0
    (-(-x).exp_m1()).ln()
}

fn f1(x: f64) -> f64 {
    // f'(x) = 1/(e^x − 1)
    1.0 / x.exp_m1()
}

fn f2(x: f64) -> f64 {
    // f''(x) = −e^x/(e^x − 1)²
    let em = x.exp_m1();
    -x.exp() / (em * em)
}

fn f3(x: f64) -> f64 {
    // f'''(x) = e^x(e^x + 1)/(e^x − 1)³
    let ex = x.exp();
    let em = x.exp_m1();
    ex * (ex + 1.0) / (em * em * em)
}

/// Second-order Taylor estimate of E_q[log(1−e^{−λ})] at μ = E_q[λ],
/// clamped to ≤ 0; returns the sentinel floor when μ is numerically zero.
pub fn term_i_taylor(state: &VariationalState, i: usize, j: usize) -> f64 {
    let mu = expected_intensity(state, i, j);
    if mu < TAYLOR_INTENSITY_FLOOR {
        return TAYLOR_SENTINEL;
    }
    let var = intensity_variance(state, i, j);
    (f_log1m_exp(mu) + 0.5 * f2(mu) * var).min(0.0)
}

/// d/ds log(exp(exp(s)) − 1) = w/(1−e^{−w}) with w = e^s.
fn g_prime(s: f64) -> f64 {
    if s > 30f64.ln() {
        s.exp()
    } else {
        let w = s.exp();
        if w < 1e-14 {
            1.0
        } else {
            w / (-(-w).exp_m1())
        }
    }
}

/// Factorized total expected intensity Σ_{ij} E_q[λ_ij], O((n+m)·K).
fn total_intensity_sums(state: &VariationalState) -> (Vec<f64>, Vec<f64>, f64) {
    let k = state.k();
    let mut node_sums = vec![0.0; k]; // Σ_i mean(α_i) mean(θ_ik)
    let mut edge_sums = vec![0.0; k]; // Σ_j mean(ρ_j) mean(β_jk)
    for i in 0..state.n() {
        let ma = state.node_activity[i].mean();
        for t in 0..k {
            node_sums[t] += ma * state.theta(i, t).mean();
        }
    }
    for j in 0..state.m() {
        let mr = state.edge_activity[j].mean();
        for t in 0..k {
            edge_sums[t] += mr * state.beta(j, t).mean();
        }
    }
    let total = (0..k).map(|t| node_sums[t] * edge_sums[t]).sum();
    (node_sums, edge_sums, total)
}

/// E_q[log p(factor)] against its Gamma(a0, b0) prior.
fn prior_cross_entropy(f: &GammaFactor, a0: f64, b0: f64) -> f64 {
    a0 * b0.ln() - crate::numkit::log_gamma(a0).expect("positive prior shape")
        + (a0 - 1.0) * f.mean_log()
        - b0 * f.mean()
}

/// The tractable objective (the surrogate evidence bound) for the given
/// estimator.
pub fn elbo(
    state: &VariationalState,
    h: &IncidenceStructure,
    prior: &PriorSpec,
    estimator: Estimator,
) -> f64 {
    elbo_with_grad(state, h, prior, estimator, false).0
}

/// Analytic gradient of the objective over all log-shape/log-rate variables,
/// in the flat layout of `VariationalState::to_flat`.
pub fn elbo_gradient(
    state: &VariationalState,
    h: &IncidenceStructure,
    prior: &PriorSpec,
    estimator: Estimator,
) -> Vec<f64> {
    elbo_with_grad(state, h, prior, estimator, true).1.expect("gradient requested")
}

/// Index helpers into the flat layout.
struct Layout {
    k: usize,
    node_embed_off: usize,
    edge_act_off: usize,
    edge_embed_off: usize,
}

impl Layout {
    fn new(state: &VariationalState) -> Self {
        let (n, m, k) = (state.n(), state.m(), state.k());
        Layout {
            k,
            node_embed_off: 2 * n,
            edge_act_off: 2 * n + 2 * n * k,
            edge_embed_off: 2 * n + 2 * n * k + 2 * m,
        }
    }
    fn alpha(&self, i: usize) -> usize {
        2 * i
    }
    fn theta(&self, i: usize, t: usize) -> usize {
        self.node_embed_off + 2 * (i * self.k + t)
    }
    fn rho(&self, j: usize) -> usize {
        self.edge_act_off + 2 * j
    }
    fn beta(&self, j: usize, t: usize) -> usize {
        self.edge_embed_off + 2 * (j * self.k + t)
    }
}

pub(crate) fn elbo_with_grad(
    state: &VariationalState,
    h: &IncidenceStructure,
    prior: &PriorSpec,
    estimator: Estimator,
    want_grad: bool,
) -> (f64, Option<Vec<f64>>) {
    debug_assert_eq!(state.n(), h.n());
    debug_assert_eq!(state.m(), h.m());
    let k = state.k();
    let lay = Layout::new(state);
    let mut grad = if want_grad { vec![0.0; state.num_params()] } else { Vec::new() };
    let mut value = 0.0;

    // --- total-intensity penalty −Σ_{all ij} E_q[λ] (lower-bound route) or
    // −Σ_{zeros} (Taylor route, positives added back below) ---
    let (node_sums, edge_sums, total_mu) = total_intensity_sums(state);
    value -= total_mu;
    if want_grad {
        for i in 0..state.n() {
            let ma = state.node_activity[i].mean();
            let mut acc = 0.0;
            for t in 0..k {
                let mt = state.theta(i, t).mean();
                acc += mt * edge_sums[t];
                let g = ma * mt * edge_sums[t];
                grad[lay.theta(i, t)] -= g;
                grad[lay.theta(i, t) + 1] += g;
            }
            grad[lay.alpha(i)] -= ma * acc;
            grad[lay.alpha(i) + 1] += ma * acc;
        }
        for j in 0..state.m() {
            let mr = state.edge_activity[j].mean();
            let mut acc = 0.0;
            for t in 0..k {
                let mb = state.beta(j, t).mean();
                acc += mb * node_sums[t];
                let g = mr * mb * node_sums[t];
                grad[lay.beta(j, t)] -= g;
                grad[lay.beta(j, t) + 1] += g;
            }
            grad[lay.rho(j)] -= mr * acc;
            grad[lay.rho(j) + 1] += mr * acc;
        }
    }

    // --- positive incidences ---
    let mut lse_buf = vec![0.0; k];
    for (j, edge) in h.edges().iter().enumerate() {
        for &i in edge {
            match estimator {
                Estimator::LowerBound => {
                    // the −E_q[λ] part of the bound is already inside the
                    // total-intensity penalty; only g(S̲) remains
                    for t in 0..k {
                        lse_buf[t] = state.theta(i, t).mean_log() + state.beta(j, t).mean_log();
                    }
                    let lse = log_sum_exp(&lse_buf);
                    let s = state.node_activity[i].mean_log()
                        + state.edge_activity[j].mean_log()
                        + lse;
                    value += log_expm1_exp(s);
                    if want_grad {
                        let gp = g_prime(s);
                        grad[lay.alpha(i)] += gp * state.node_activity[i].mean_log_dshape();
                        grad[lay.alpha(i) + 1] -= gp;
                        grad[lay.rho(j)] += gp * state.edge_activity[j].mean_log_dshape();
                        grad[lay.rho(j) + 1] -= gp;
                        for t in 0..k {
                            let phi = (lse_buf[t] - lse).exp(); // softmax weight
                            grad[lay.theta(i, t)] += gp * phi * state.theta(i, t).mean_log_dshape();
                            grad[lay.theta(i, t) + 1] -= gp * phi;
                            grad[lay.beta(j, t)] += gp * phi * state.beta(j, t).mean_log_dshape();
                            grad[lay.beta(j, t) + 1] -= gp * phi;
                        }
                    }
                }
                Estimator::Taylor => {
                    add_taylor_term(state, i, j, &lay, &mut value, want_grad.then_some(&mut grad));
                }
            }
        }
    }

    // --- prior cross-entropy and entropy ---
    let roles: [(&[GammaFactor], f64, f64, usize); 4] = [
        (&state.node_activity, prior.a_alpha, prior.b_alpha, 0),
        (&state.node_embed, prior.a_theta, prior.b_theta, lay.node_embed_off),
        (&state.edge_activity, prior.a_rho, prior.b_rho, lay.edge_act_off),
        (&state.edge_embed, prior.a_beta, prior.b_beta, lay.edge_embed_off),
    ];
    for (factors, a0, b0, off) in roles {
        for (idx, f) in factors.iter().enumerate() {
            value += prior_cross_entropy(f, a0, b0) + f.entropy();
            if want_grad {
                let a = f.shape();
                let tg = trigamma(a).expect("positive shape");
                // cross-entropy part
                grad[off + 2 * idx] += a * ((a0 - 1.0) * tg - b0 / f.rate());
                grad[off + 2 * idx + 1] += -(a0 - 1.0) + b0 * f.mean();
                // entropy part
                grad[off + 2 * idx] += a * (1.0 + (1.0 - a) * tg);
                grad[off + 2 * idx + 1] += -1.0;
            }
        }
    }

    (value, want_grad.then_some(grad))
}

fn add_taylor_term(
    state: &VariationalState,
    i: usize,
    j: usize,
    lay: &Layout,
    value: &mut f64,
    grad: Option<&mut Vec<f64>>,
) {
    let k = state.k();
    let ma = state.node_activity[i].mean();
    let mr = state.edge_activity[j].mean();
    let sa = state.node_activity[i].second_moment();
    let sr = state.edge_activity[j].second_moment();
    let mut dot = 0.0;
    let mut sq_sum = 0.0;
    let mut sec_sum = 0.0;
    for t in 0..k {
        let mt = state.theta(i, t).mean() * state.beta(j, t).mean();
        dot += mt;
        sq_sum += mt * mt;
        sec_sum += state.theta(i, t).second_moment() * state.beta(j, t).second_moment();
    }
    let mu = ma * mr * dot;

    // under the Taylor route the total-intensity penalty must exclude this
    // positive entry, so add μ back regardless of the floor/clamp branches
    *value += mu;
    let grad = match grad {
        Some(g) => {
            add_mu_grad(state, i, j, lay, 1.0, g);
            g
        }
        None => {
            if mu < TAYLOR_INTENSITY_FLOOR {
                *value += TAYLOR_SENTINEL;
            } else {
                let q = sec_sum + dot * dot - sq_sum;
                let var = sa * sr * q - mu * mu;
                *value += (f_log1m_exp(mu) + 0.5 * f2(mu) * var).min(0.0);
            }
            return;
        }
    };

    if mu < TAYLOR_INTENSITY_FLOOR {
        *value += TAYLOR_SENTINEL;
        return; // flat sentinel: no gradient contribution
    }
    let q = sec_sum + dot * dot - sq_sum;
    let var = sa * sr * q - mu * mu;
    let raw = f_log1m_exp(mu) + 0.5 * f2(mu) * var;
    if raw > 0.0 {
        // clamped to 0: flat
        return;
    }
    *value += raw;

    // d(raw)/dμ coefficient on ∂μ, plus the ∂Var chain
    let c_mu = f1(mu) + 0.5 * f3(mu) * var;
    let c_var = 0.5 * f2(mu);

    // ∂μ contributions (μ scales multiplicatively in each mean)
    add_mu_grad(state, i, j, lay, c_mu - 2.0 * mu * c_var, grad);

    // ∂(sα·sρ·Q) contributions
    // activities: ∂s/∂u = a(2a+1)/b², ∂s/∂v = −2s
    let a_alpha = state.node_activity[i].shape();
    let b_alpha2 = (2.0 * state.node_activity[i].log_rate()).exp();
    grad[lay.alpha(i)] += c_var * (a_alpha * (2.0 * a_alpha + 1.0) / b_alpha2) * sr * q;
    grad[lay.alpha(i) + 1] += c_var * (-2.0 * sa) * sr * q;
    let a_rho = state.edge_activity[j].shape();
    let b_rho2 = (2.0 * state.edge_activity[j].log_rate()).exp();
    grad[lay.rho(j)] += c_var * sa * (a_rho * (2.0 * a_rho + 1.0) / b_rho2) * q;
    grad[lay.rho(j) + 1] += c_var * sa * (-2.0 * sr) * q;
    // embeddings: Q = Σ sθ sβ + D² − Σ (mθ mβ)²
    for t in 0..k {
        let mt = state.theta(i, t).mean();
        let mb = state.beta(j, t).mean();
        let st = state.theta(i, t).second_moment();
        let sb = state.beta(j, t).second_moment();
        let a_t = state.theta(i, t).shape();
        let bt2 = (2.0 * state.theta(i, t).log_rate()).exp();
        let a_b = state.beta(j, t).shape();
        let bb2 = (2.0 * state.beta(j, t).log_rate()).exp();
        let pair = mt * mb;
        // θ side
        let dq_du = (a_t * (2.0 * a_t + 1.0) / bt2) * sb + 2.0 * dot * pair - 2.0 * pair * pair;
        let dq_dv = -2.0 * st * sb - 2.0 * dot * pair + 2.0 * pair * pair;
        grad[lay.theta(i, t)] += c_var * sa * sr * dq_du;
        grad[lay.theta(i, t) + 1] += c_var * sa * sr * dq_dv;
        // β side
        let dq_du_b = st * (a_b * (2.0 * a_b + 1.0) / bb2) + 2.0 * dot * pair - 2.0 * pair * pair;
        let dq_dv_b = -2.0 * st * sb - 2.0 * dot * pair + 2.0 * pair * pair;
        grad[lay.beta(j, t)] += c_var * sa * sr * dq_du_b;
        grad[lay.beta(j, t) + 1] += c_var * sa * sr * dq_dv_b;
    }
}

/// Adds `coeff · ∂μ_ij/∂p` for every parameter p touching entry (i, j).
fn add_mu_grad(
    state: &VariationalState,
    i: usize,
    j: usize,
    lay: &Layout,
    coeff: f64,
    grad: &mut [f64],
) {
    let k = state.k();
    let ma = state.node_activity[i].mean();
    let mr = state.edge_activity[j].mean();
    let dot: f64 = (0..k).map(|t| state.theta(i, t).mean() * state.beta(j, t).mean()).sum();
    let mu = ma * mr * dot;
    grad[lay.alpha(i)] += coeff * mu;
    grad[lay.alpha(i) + 1] -= coeff * mu;
    grad[lay.rho(j)] += coeff * mu;
    grad[lay.rho(j) + 1] -= coeff * mu;
    for t in 0..k {
        let term = ma * mr * state.theta(i, t).mean() * state.beta(j, t).mean();
        grad[lay.theta(i, t)] += coeff * term;
        grad[lay.theta(i, t) + 1] -= coeff * term;
        grad[lay.beta(j, t)] += coeff * term;
        grad[lay.beta(j, t) + 1] -= coeff * term;
    }
}
