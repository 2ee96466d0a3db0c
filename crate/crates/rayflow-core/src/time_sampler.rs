//! Importance sampling over timesteps: the per-timestep loss magnitude, the
//! minimal-variance sampling distribution, the SVGD particle system that
//! tracks it, and the network trained to reproduce the particle weights.

use alloc::vec::Vec;

use crate::denoiser::Denoiser;
use crate::math::FloatExt;
use crate::net::{time_embedding, AdamW, Net};
use crate::schedule::Schedule;
use crate::{Error, Result, Rng};

/// Continuous-relaxation particles over `[1, T]` with the SVGD kernel
/// bandwidth and step size.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<f64>,
    pub bandwidth: f64,
    pub step_size: f64,
    /// Upper clamp bound; particles live on `[1, t_max]`.
    pub t_max: f64,
}

impl ParticleSet {
    pub fn new(particles: Vec<f64>, bandwidth: f64, step_size: f64, t_max: f64) -> Self {
        debug_assert!(particles.len() >= 2);
        debug_assert!(bandwidth > 0.0 && step_size > 0.0);
        ParticleSet {
            particles,
            bandwidth,
            step_size,
            t_max,
        }
    }

    /// Evenly spaced initialization over `[1, T]`.
    pub fn uniform(n: usize, t_max: f64, bandwidth: f64, step_size: f64) -> Self {
        let particles = (0..n)
            .map(|i| 1.0 + (t_max - 1.0) * (i as f64 + 0.5) / n as f64)
            .collect();
        ParticleSet::new(particles, bandwidth, step_size, t_max)
    }
}

/// Report from an importance-sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct IsReport {
    pub estimate: f64,
    pub variance: f64,
    pub n: usize,
}

/// Per-timestep loss magnitude: squared denoiser error at the deterministic
/// trajectory mean point `sqrt(ab_t) x0 + (1 - sqrt(ab_t)) eps_mu`.
pub fn xi(
    denoiser: &dyn Denoiser,
    sched: &Schedule,
    x0: &[f64],
    eps_mu: &[f64],
    t: usize,
) -> Result<f64> {
    sched.timestep(t)?;
    let s = sched.alpha_bar(t).fsqrt();
    let point: Vec<f64> = x0
        .iter()
        .zip(eps_mu)
        .map(|(x, m)| s * x + (1.0 - s) * m)
        .collect();
    let pred = denoiser.predict(&point, t)?;
    Ok(pred
        .iter()
        .zip(eps_mu)
        .map(|(p, m)| (p - m) * (p - m))
        .sum())
}

/// Minimal-variance sampling distribution `q*_t = xi_t p_t / sum_s xi_s p_s`.
pub fn optimal_q(xi_values: &[f64], base_p: &[f64]) -> Result<Vec<f64>> {
    if xi_values.len() != base_p.len() {
        return Err(Error::LengthMismatch {
            expected: xi_values.len(),
            got: base_p.len(),
        });
    }
    let total: f64 = xi_values.iter().zip(base_p).map(|(x, p)| x * p).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(xi_values
        .iter()
        .zip(base_p)
        .map(|(x, p)| x * p / total)
        .collect())
}

/// Closed-form variance of the single-sample importance estimator of
/// `sum_t xi_t p_t` under proposal `q`.
pub fn is_variance_exact(xi_values: &[f64], base_p: &[f64], q: &[f64]) -> Result<f64> {
    let mu: f64 = xi_values.iter().zip(base_p).map(|(x, p)| x * p).sum();
    let mut second = 0.0;
    for ((x, p), qi) in xi_values.iter().zip(base_p).zip(q) {
        let integrand = x * p;
        if integrand != 0.0 {
            if *qi <= 0.0 {
                return Err(Error::SupportViolation { index: 0 });
            }
            second += integrand * integrand / qi;
        }
    }
    Ok(second - mu * mu)
}

/// Monte-Carlo importance-sampling estimate of `sum_t xi_t p_t` with `n`
/// draws from `q` and weights `p/q`.
pub fn is_estimate(
    xi_values: &[f64],
    q: &[f64],
    base_p: &[f64],
    n: usize,
    rng: &mut Rng,
) -> Result<IsReport> {
    if q.len() != xi_values.len() || base_p.len() != xi_values.len() {
        return Err(Error::LengthMismatch {
            expected: xi_values.len(),
            got: q.len().min(base_p.len()),
        });
    }
    for (i, ((x, p), qi)) in xi_values.iter().zip(base_p).zip(q).enumerate() {
        if x * p != 0.0 && *qi <= 0.0 {
            return Err(Error::SupportViolation { index: i });
        }
    }
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    // Inverse-CDF categorical sampling.
    let mut cdf: Vec<f64> = Vec::with_capacity(q.len());
    let mut acc = 0.0;
    for qi in q {
        acc += qi;
        cdf.push(acc);
    }
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.uniform() * acc;
        let idx = cdf.partition_point(|c| *c < u).min(q.len() - 1);
        draws.push(xi_values[idx] * base_p[idx] / q[idx]);
    }
    let estimate = draws.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        draws.iter().map(|w| (w - estimate) * (w - estimate)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    Ok(IsReport {
        estimate,
        variance,
        n,
    })
}

fn kernel(a: f64, b: f64, h: f64) -> f64 {
    let d = a - b;
    (-d * d / (2.0 * h * h)).fexp()
}

/// Score of the xi-weighted kernel density over the particles:
/// `t -> d/dt ln((1/n) sum_i xi(t_i) K(t_i, t))`.
///
/// Returns an error when the mixture is identically zero at the particle
/// locations.
pub fn kde_target_score<'a>(
    ps: &'a ParticleSet,
    xi_at: impl Fn(f64) -> f64 + 'a,
) -> Result<impl Fn(f64) -> f64 + 'a> {
    let weights: Vec<f64> = ps.particles.iter().map(|t| xi_at(*t)).collect();
    if weights.iter().all(|w| *w == 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let h = ps.bandwidth;
    let particles = ps.particles.clone();
    Ok(move |t: f64| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (ti, wi) in particles.iter().zip(&weights) {
            let k = kernel(*ti, t, h);
            den += wi * k;
            num += wi * k * (ti - t) / (h * h);
        }
        num / den
    })
}

/// One SVGD update: each particle moves by `eps * phi(t_i)` where
/// `phi(t) = (1/n) sum_j [score(t_j) k(t_j, t) + d/dt_j k(t_j, t)]`,
/// then clamps to `[1, t_max]`.
pub fn svgd_step(ps: &ParticleSet, target_score: impl Fn(f64) -> f64) -> ParticleSet {
    let phi = svgd_direction(ps, &target_score);
    let particles = ps
        .particles
        .iter()
        .zip(&phi)
        .map(|(t, p)| (t + ps.step_size * p).clamp(1.0, ps.t_max))
        .collect();
    ParticleSet {
        particles,
        ..ps.clone()
    }
}

/// The update direction `phi` evaluated at every particle.
pub fn svgd_direction(ps: &ParticleSet, target_score: &impl Fn(f64) -> f64) -> Vec<f64> {
    let n = ps.particles.len() as f64;
    let h = ps.bandwidth;
    let scores: Vec<f64> = ps.particles.iter().map(|t| target_score(*t)).collect();
    ps.particles
        .iter()
        .map(|t| {
            let mut drive = 0.0;
            let mut repel = 0.0;
            for (tj, sj) in ps.particles.iter().zip(&scores) {
                let k = kernel(*tj, *t, h);
                drive += sj * k;
                // d/dt_j exp(-(t_j - t)^2 / 2h^2) = -(t_j - t)/h^2 * k
                repel += -(tj - t) / (h * h) * k;
            }
            (drive + repel) / n
        })
        .collect()
}

/// Configuration for one [`train_time_sampler`] call.
#[derive(Debug, Clone)]
pub struct TimeSamplerConfig {
    /// SVGD iterations moving particles toward the xi-weighted target.
    pub svgd_iters: usize,
    /// Regression passes fitting the network to xi at particle locations.
    pub regress_steps: usize,
    pub lr: f64,
}

impl Default for TimeSamplerConfig {
    fn default() -> Self {
        TimeSamplerConfig {
            svgd_iters: 20,
            regress_steps: 20,
            lr: 1e-2,
        }
    }
}

/// Builds the time-sampler network input `concat(x0, eps_mu, time features)`.
pub fn sampler_input(sched: &Schedule, x0: &[f64], eps_mu: &[f64], t: usize) -> Vec<f64> {
    let mut input = Vec::with_capacity(x0.len() + eps_mu.len() + crate::net::TIME_EMBED_DIM);
    input.extend_from_slice(x0);
    input.extend_from_slice(eps_mu);
    input.extend(time_embedding(sched, t));
    input
}

/// Trains the time-sampler network on one data pair.
///
/// Phase 1 moves the particles by SVGD toward the xi-weighted kernel target
/// and tracks the mean squared displacement as the convergence objective;
/// phase 2 regresses the network output at (rounded) particle locations to
/// the xi values there. Returns the final mean `phi^2` over the particles.
pub fn train_time_sampler(
    net: &mut Net,
    opt: &mut AdamW,
    ps: &mut ParticleSet,
    sched: &Schedule,
    x0: &[f64],
    eps_mu: &[f64],
    xi_at: impl Fn(usize) -> f64,
    cfg: &TimeSamplerConfig,
) -> Result<f64> {
    let t_max = sched.len();
    let round_t = |t: f64| -> usize { (libm::round(t) as usize).clamp(1, t_max) };
    let xi_cont = |t: f64| xi_at(round_t(t));

    let mut mean_phi_sq = 0.0;
    for _ in 0..cfg.svgd_iters {
        let phi = {
            let score = kde_target_score(ps, xi_cont)?;
            svgd_direction(ps, &score)
        };
        mean_phi_sq =
            phi.iter().map(|p| p * p).sum::<f64>() / ps.particles.len() as f64;
        let particles = ps
            .particles
            .iter()
            .zip(&phi)
            .map(|(t, p)| (t + ps.step_size * p).clamp(1.0, ps.t_max))
            .collect();
        ps.particles = particles;
    }

    for _ in 0..cfg.regress_steps {
        for t in ps.particles.clone() {
            let ti = round_t(t);
            let input = sampler_input(sched, x0, eps_mu, ti);
            let out = net.forward(&input)?;
            let target = xi_at(ti);
            let g = net.backward(&input, &[2.0 * (out[0] - target)])?;
            opt.step(net, &g);
        }
    }
    Ok(mean_phi_sq)
}

/// Normalized sampling weights `p*_t = |f_t| / sum_s |f_s|` over the
/// discrete grid, from network outputs.
pub fn induced_distribution(
    net: &Net,
    sched: &Schedule,
    x0: &[f64],
    eps_mu: &[f64],
) -> Result<Vec<f64>> {
    let t_max = sched.len();
    let mut f = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let out = net.forward(&sampler_input(sched, x0, eps_mu, t))?;
        f.push(out[0].abs());
    }
    let sum: f64 = f.iter().sum();
    if sum <= 0.0 {
        // Untrained or degenerate network: fall back to uniform.
        return Ok(alloc::vec![1.0 / t_max as f64; t_max]);
    }
    for v in &mut f {
        *v /= sum;
    }
    Ok(f)
}
