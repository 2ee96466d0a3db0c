//! The RayFlow Markov chain: forward/backward transitions, the backward
//! marginal, path probabilities, and the parameters that maximize them.
//!
//! The backward marginal `p(x_t | x_T)` is computed by exact recursion of
//! mean and variance (iterated expectation plus the law of total variance)
//! rather than by a printed closed form; the recursion follows directly from
//! the per-step transition and is used as ground truth everywhere.

use alloc::vec::Vec;

use crate::gaussian::IsoGaussian;
use crate::math::FloatExt;
use crate::schedule::Schedule;
use crate::{Error, Result};

/// Target-distribution parameters: the chain drifts toward
/// `N(eps_mu, sigma^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayFlowParams {
    pub eps_mu: Vec<f64>,
    pub sigma: f64,
}

impl RayFlowParams {
    pub fn new(eps_mu: Vec<f64>, sigma: f64) -> Self {
        debug_assert!(sigma >= 0.0);
        RayFlowParams { eps_mu, sigma }
    }
}

/// Path-probability-maximizing parameters for a given sample `x0_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalParams {
    /// Target mean `eps_mu*`: the average of the per-step forward noise means.
    pub eps_mu_star: Vec<f64>,
    /// Terminal point `sqrt(ab_T) x0_hat + (1 - sqrt(ab_T)) eps_mu*`.
    pub eps_hat_mu_star: Vec<f64>,
    /// Small positive stand-in for the `sigma -> 0` limit; exact zero would
    /// break density evaluation.
    pub sigma_star: f64,
    /// Optimal per-step noise means `(1 - sqrt(ab_t)) eps_mu*`, one per `t`.
    pub forward_noise_means: Vec<Vec<f64>>,
}

/// Default stand-in for the `sigma* -> 0` limit.
pub const DEFAULT_SIGMA_STAR: f64 = 1e-4;

/// The Gaussian `p(x_t | x_T = eps_hat_mu)` at timestep `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardMarginal {
    pub t: usize,
    pub dist: IsoGaussian,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// One forward transition: `N(alpha_t x_prev + (1 - alpha_t) eps_mu, beta_t^2 sigma^2)`.
pub fn forward_step(
    sched: &Schedule,
    params: &RayFlowParams,
    x_prev: &[f64],
    t: usize,
) -> Result<IsoGaussian> {
    sched.timestep(t)?;
    check_dim(params.eps_mu.len(), x_prev.len())?;
    let a = sched.alpha(t);
    let b = sched.beta(t);
    let mean = x_prev
        .iter()
        .zip(&params.eps_mu)
        .map(|(x, m)| a * x + (1.0 - a) * m)
        .collect();
    Ok(IsoGaussian::new(mean, b * b * params.sigma * params.sigma))
}

/// The closed-form forward marginal
/// `N(sqrt(ab_t) x0 + (1 - sqrt(ab_t)) eps_mu, (1 - ab_t) sigma^2)`.
///
/// `t = 0` is accepted and yields a Dirac at `x0`.
pub fn forward_marginal(
    sched: &Schedule,
    params: &RayFlowParams,
    x0: &[f64],
    t: usize,
) -> Result<IsoGaussian> {
    if t > sched.len() {
        return Err(Error::TimestepOutOfRange { t, max: sched.len() });
    }
    check_dim(params.eps_mu.len(), x0.len())?;
    let ab = sched.alpha_bar(t);
    let s = ab.fsqrt();
    let mean = x0
        .iter()
        .zip(&params.eps_mu)
        .map(|(x, m)| s * x + (1.0 - s) * m)
        .collect();
    Ok(IsoGaussian::new(mean, (1.0 - ab) * params.sigma * params.sigma))
}

/// One backward transition:
/// `N(x_t / alpha_t - ((1 - alpha_t) / alpha_t) eps_mu, beta_tilde_t sigma^2)`.
pub fn backward_step(
    sched: &Schedule,
    params: &RayFlowParams,
    x_t: &[f64],
    t: usize,
) -> Result<IsoGaussian> {
    sched.timestep(t)?;
    check_dim(params.eps_mu.len(), x_t.len())?;
    let a = sched.alpha(t);
    let mean = x_t
        .iter()
        .zip(&params.eps_mu)
        .map(|(x, m)| x / a - (1.0 - a) / a * m)
        .collect();
    Ok(IsoGaussian::new(
        mean,
        sched.beta_tilde(t) * params.sigma * params.sigma,
    ))
}

/// Coefficient of `eps_mu` in the expanded posterior mean (the `(c)` term).
fn c_coeff(sched: &Schedule, s: usize) -> f64 {
    let a = sched.alpha(s);
    let ab = sched.alpha_bar(s);
    let ab_prev = sched.alpha_bar(s - 1);
    (1.0 - a - a * a * ab_prev + a * ab_prev - ab_prev.fsqrt() + ab_prev.fsqrt() * a * a)
        / (1.0 - ab)
}

/// Coefficient multiplying the forward noise mean `E[eps_bar_s]` (the `(e)`
/// term).
fn e_coeff(sched: &Schedule, s: usize) -> f64 {
    let a = sched.alpha(s);
    let ab = sched.alpha_bar(s);
    let ab_prev = sched.alpha_bar(s - 1);
    -ab_prev.fsqrt() * (1.0 - a * a) / ((1.0 - ab) * ab.fsqrt())
}

/// The posterior mean `mu_p(x_t, x0, eps_mu)` in its long form, before the
/// `1/alpha_t` simplification:
/// `[sqrt(ab_{t-1})(1 - alpha_t^2) x0 + alpha_t (1 - ab_{t-1}) x_t] / (1 - ab_t) + (c)_t eps_mu`.
pub fn backward_step_mean_long(
    sched: &Schedule,
    params: &RayFlowParams,
    x_t: &[f64],
    x0: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    sched.timestep(t)?;
    check_dim(params.eps_mu.len(), x_t.len())?;
    check_dim(params.eps_mu.len(), x0.len())?;
    let a = sched.alpha(t);
    let ab = sched.alpha_bar(t);
    let ab_prev = sched.alpha_bar(t - 1);
    let w0 = ab_prev.fsqrt() * (1.0 - a * a) / (1.0 - ab);
    let wt = a * (1.0 - ab_prev) / (1.0 - ab);
    let wc = c_coeff(sched, t);
    Ok(x_t
        .iter()
        .zip(x0)
        .zip(&params.eps_mu)
        .map(|((xt, x0i), m)| wt * xt + w0 * x0i + wc * m)
        .collect())
}

/// Exact backward recursion for `p(x_t | x_T = eps_hat_mu)`.
///
/// Starting from a point mass at `eps_hat_mu`, each step `s = T, ..., t+1`
/// maps mean `mu <- mu / alpha_s + (e)_s E[eps_bar_s] + (c)_s eps_mu` and
/// variance `v <- v / alpha_s^2 + beta_tilde_s sigma^2`. `noise_means`
/// supplies `E[eps_bar_s]` for every `s` in `[1, T]`.
pub fn backward_marginal_recursive(
    sched: &Schedule,
    params: &RayFlowParams,
    eps_hat_mu: &[f64],
    t_target: usize,
    noise_means: &[Vec<f64>],
) -> Result<BackwardMarginal> {
    let t_steps = sched.len();
    if t_target >= t_steps {
        return Err(Error::TimestepOutOfRange {
            t: t_target,
            max: t_steps - 1,
        });
    }
    if noise_means.len() != t_steps {
        return Err(Error::LengthMismatch {
            expected: t_steps,
            got: noise_means.len(),
        });
    }
    let dim = params.eps_mu.len();
    check_dim(dim, eps_hat_mu.len())?;
    let mut mean: Vec<f64> = eps_hat_mu.to_vec();
    let mut var = 0.0;
    for s in (t_target + 1..=t_steps).rev() {
        let nm = &noise_means[s - 1];
        check_dim(dim, nm.len())?;
        let a = sched.alpha(s);
        let we = e_coeff(sched, s);
        let wc = c_coeff(sched, s);
        for ((m, n), e) in mean.iter_mut().zip(nm).zip(&params.eps_mu) {
            *m = *m / a + we * n + wc * e;
        }
        var = var / (a * a) + sched.beta_tilde(s) * params.sigma * params.sigma;
    }
    Ok(BackwardMarginal {
        t: t_target,
        dist: IsoGaussian::new(mean, var),
    })
}

/// Log forward density of reaching `eps_hat_mu`, log backward density of
/// returning to `x0_hat`, and their sum.
pub fn path_probability(
    sched: &Schedule,
    params: &RayFlowParams,
    x0_hat: &[f64],
    eps_hat_mu: &[f64],
    noise_means: &[Vec<f64>],
) -> Result<(f64, f64, f64)> {
    if params.sigma == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let fwd = forward_marginal(sched, params, x0_hat, sched.len())?;
    let log_forward = fwd.log_pdf(eps_hat_mu)?;
    let back = backward_marginal_recursive(sched, params, eps_hat_mu, 0, noise_means)?;
    let log_backward = back.dist.log_pdf(x0_hat)?;
    Ok((log_forward, log_backward, log_forward + log_backward))
}

/// Path-probability-maximizing parameters for `x0_hat`, given the observed
/// per-step forward noise means (in the pipeline these come from teacher
/// predictions).
pub fn optimal_params(
    sched: &Schedule,
    x0_hat: &[f64],
    noise_mean_per_t: &[Vec<f64>],
    sigma_star: f64,
) -> Result<OptimalParams> {
    let t_steps = sched.len();
    if noise_mean_per_t.len() != t_steps {
        return Err(Error::LengthMismatch {
            expected: t_steps,
            got: noise_mean_per_t.len(),
        });
    }
    let dim = x0_hat.len();
    let mut eps_mu_star = alloc::vec![0.0; dim];
    for nm in noise_mean_per_t {
        check_dim(dim, nm.len())?;
        for (acc, v) in eps_mu_star.iter_mut().zip(nm) {
            *acc += v;
        }
    }
    for v in &mut eps_mu_star {
        *v /= t_steps as f64;
    }
    let s_t = sched.alpha_bar(t_steps).fsqrt();
    let eps_hat_mu_star = x0_hat
        .iter()
        .zip(&eps_mu_star)
        .map(|(x, m)| s_t * x + (1.0 - s_t) * m)
        .collect();
    let forward_noise_means = (1..=t_steps)
        .map(|t| {
            let w = 1.0 - sched.alpha_bar(t).fsqrt();
            eps_mu_star.iter().map(|m| w * m).collect()
        })
        .collect();
    Ok(OptimalParams {
        eps_mu_star,
        eps_hat_mu_star,
        sigma_star,
        forward_noise_means,
    })
}
