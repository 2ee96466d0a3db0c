//! Named numerical verification checks over every invariant the library
//! promises, runnable as a suite (`rayflow verify`).
//!
//! Each check reports a measured error against an explicit tolerance;
//! failures are recorded, never panicked, so one broken invariant cannot
//! hide the others.

use rayflow_core::chain::{
    backward_marginal_recursive, backward_step, backward_step_mean_long, forward_marginal,
    forward_step, optimal_params, RayFlowParams,
};
use rayflow_core::denoiser::{
    denoise_loss_at, optimal_denoise, optimal_denoise_loss_stationarity, FiniteDataset,
    OracleDenoiser,
};
use rayflow_core::distill::{sample_k_step, sample_one_step};
use rayflow_core::gaussian::mc_moments;
use rayflow_core::net::Net;
use rayflow_core::schedule::{make_linear_schedule, Schedule};
use rayflow_core::time_sampler::{is_variance_exact, optimal_q, svgd_step, ParticleSet};
use rayflow_core::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// What is measured and against which module invariant.
    pub detail: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, detail: &str, error: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            detail: detail.to_string(),
            error,
            tolerance,
            pass: error.is_finite() && error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub checks: Vec<Check>,
    pub overall_pass: bool,
}

impl VerificationReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let name_w = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(5);
        out.push_str(&format!(
            "{:<name_w$}  {:>12}  {:>10}  {}\n",
            "check", "error", "tolerance", "status"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<name_w$}  {:>12.3e}  {:>10.1e}  {}\n",
                c.name,
                c.error,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.overall_pass { "pass" } else { "FAIL" }
        ));
        out
    }
}

fn rand_vec(rng: &mut Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.standard_normal()).collect()
}

/// Coefficient identities of a schedule: `alpha^2 + beta^2 = 1`, strictly
/// decreasing `alpha_bar`, `beta_tilde_1 = 0`, and `beta_tilde` matching its
/// defining formula. The measured error is the worst violation.
pub fn check_schedule_invariants(scheds: &[Schedule]) -> Check {
    let mut worst: f64 = 0.0;
    for sched in scheds {
        let mut prev_bar = 1.0;
        for t in 1..=sched.len() {
            let (a, b) = (sched.alpha(t), sched.beta(t));
            worst = worst.max((a * a + b * b - 1.0).abs());
            let ab = sched.alpha_bar(t);
            // Strict decrease: any non-negative gap is a violation.
            worst = worst.max((ab - prev_bar).max(0.0));
            let bt = sched.beta_tilde(t);
            worst = worst.max((-bt).max(0.0));
            worst = worst.max((bt - (1.0 - a * a) * (1.0 - prev_bar) / (1.0 - ab)).abs());
            prev_bar = ab;
        }
        worst = worst.max(sched.beta_tilde(1).abs());
    }
    Check::new(
        "schedule-invariants",
        "coefficient identities over randomized schedules",
        worst,
        1e-12,
    )
}

/// The long-form posterior mean collapses to the one-step backward mean when
/// `x0` is replaced by the noiseless trajectory inversion.
pub fn check_posterior_simplification(seed: u64) -> Check {
    let mut rng = Rng::from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t_steps = 2 + rng.index(30);
        let bmin = 0.01 + 0.05 * rng.uniform();
        let bmax = bmin + 0.5 * rng.uniform();
        let sched = match make_linear_schedule(t_steps, bmin, bmax) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let d = 1 + rng.index(3);
        let params = RayFlowParams::new(rand_vec(&mut rng, d, 1.0), 0.5);
        let x_t = rand_vec(&mut rng, d, 2.0);
        let t = 1 + rng.index(t_steps);
        let sab = sched.alpha_bar(t).sqrt();
        let x0: Vec<f64> = x_t
            .iter()
            .zip(&params.eps_mu)
            .map(|(x, m)| (x - (1.0 - sab) * m) / sab)
            .collect();
        let long = match backward_step_mean_long(&sched, &params, &x_t, &x0, t) {
            Ok(v) => v,
            Err(_) => return failed("posterior-simplification", "long-form evaluation"),
        };
        let short = match backward_step(&sched, &params, &x_t, t) {
            Ok(g) => g.mean,
            Err(_) => return failed("posterior-simplification", "short-form evaluation"),
        };
        for (l, s) in long.iter().zip(&short) {
            worst = worst.max((l - s).abs());
        }
    }
    Check::new(
        "posterior-simplification",
        "long-form vs simplified backward mean, 1000 random instances",
        worst,
        1e-10,
    )
}

fn failed(name: &str, detail: &str) -> Check {
    Check::new(name, detail, f64::INFINITY, 0.0)
}

/// Closed-form forward marginal vs step-by-step chain simulation; error in
/// standard-error units.
pub fn check_forward_marginal_mc(seed: u64) -> Check {
    let t_steps = 10;
    let sched = make_linear_schedule(t_steps, 0.05, 0.5).expect("static schedule");
    let params = RayFlowParams::new(vec![0.8, -0.4], 0.6);
    let x0 = vec![-1.2, 0.5];
    let n = 100_000;
    let mut rng = Rng::from_seed(seed);
    let mut samples: Vec<Vec<f64>> = vec![x0.clone(); n];
    for t in 1..=t_steps {
        for s in &mut samples {
            match forward_step(&sched, &params, s, t) {
                Ok(g) => *s = g.sample(&mut rng),
                Err(_) => return failed("forward-marginal-mc", "chain step"),
            }
        }
    }
    let (emp_mean, emp_var) = mc_moments(&samples).expect("n >= 2");
    let exact = forward_marginal(&sched, &params, &x0, t_steps).expect("valid t");
    let se_mean = (exact.var / n as f64).sqrt();
    let se_var = exact.var * (2.0 / n as f64).sqrt();
    let mut err: f64 = ((emp_var - exact.var) / se_var).abs();
    for (e, m) in emp_mean.iter().zip(&exact.mean) {
        err = err.max(((e - m) / se_mean).abs());
    }
    Check::new(
        "forward-marginal-mc",
        "closed form vs 1e5-sample chain simulation, standard-error units",
        err,
        3.0,
    )
}

/// Exact backward-marginal recursion vs reverse-chain simulation under
/// structurally consistent noise means; error in standard-error units.
pub fn check_backward_marginal_mc(seed: u64) -> Check {
    let t_steps = 8;
    let sched = make_linear_schedule(t_steps, 0.05, 0.45).expect("static schedule");
    let params = RayFlowParams::new(vec![0.7], 0.3);
    let noise_means: Vec<Vec<f64>> = (1..=t_steps)
        .map(|t| vec![(1.0 - sched.alpha_bar(t).sqrt()) * params.eps_mu[0]])
        .collect();
    let eps_hat = vec![0.4];
    let n = 100_000;
    let mut rng = Rng::from_seed(seed);
    let mut samples: Vec<Vec<f64>> = vec![eps_hat.clone(); n];
    for t in (1..=t_steps).rev() {
        for s in &mut samples {
            match backward_step(&sched, &params, s, t) {
                Ok(g) => *s = g.sample(&mut rng),
                Err(_) => return failed("backward-marginal-mc", "chain step"),
            }
        }
    }
    let (emp_mean, emp_var) = mc_moments(&samples).expect("n >= 2");
    let exact = match backward_marginal_recursive(&sched, &params, &eps_hat, 0, &noise_means) {
        Ok(b) => b,
        Err(_) => return failed("backward-marginal-mc", "recursion"),
    };
    let se_mean = (exact.dist.var / n as f64).sqrt();
    let se_var = exact.dist.var * (2.0 / n as f64).sqrt();
    let err = ((emp_mean[0] - exact.dist.mean[0]) / se_mean)
        .abs()
        .max(((emp_var - exact.dist.var) / se_var).abs());
    Check::new(
        "backward-marginal-mc",
        "recursion vs 1e5-sample reverse-chain simulation, standard-error units",
        err,
        3.0,
    )
}

/// Deterministic round trip with the optimal parameters at small sigma.
pub fn check_reconstruction(seed: u64) -> Check {
    let t_steps = 64;
    let sched = make_linear_schedule(t_steps, 0.02, 0.4).expect("static schedule");
    let mut rng = Rng::from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x0 = rand_vec(&mut rng, 2, 1.5);
        let noise_means = vec![rand_vec(&mut rng, 2, 0.8); t_steps];
        let op = match optimal_params(&sched, &x0, &noise_means, 1e-4) {
            Ok(op) => op,
            Err(_) => return failed("reconstruction-round-trip", "optimal params"),
        };
        let params = RayFlowParams::new(op.eps_mu_star.clone(), op.sigma_star);
        let back = match backward_marginal_recursive(
            &sched,
            &params,
            &op.eps_hat_mu_star,
            0,
            &op.forward_noise_means,
        ) {
            Ok(b) => b,
            Err(_) => return failed("reconstruction-round-trip", "recursion"),
        };
        for (b, x) in back.dist.mean.iter().zip(&x0) {
            worst = worst.max((b - x).abs());
        }
    }
    Check::new(
        "reconstruction-round-trip",
        "optimal parameters recover x0 at sigma 1e-4, T=64, d=2",
        worst,
        1e-3,
    )
}

/// Reconstruction-error variance is quadratic in sigma: doubling sigma
/// multiplies the sampled squared error by ~4.
pub fn check_sigma_scaling(seed: u64) -> Check {
    let t_steps = 16;
    let sched = make_linear_schedule(t_steps, 0.03, 0.45).expect("static schedule");
    let noise_means: Vec<Vec<f64>> = (1..=t_steps)
        .map(|t| vec![(1.0 - sched.alpha_bar(t).sqrt()) * 0.5])
        .collect();
    let n = 100_000;
    let mut vars = [0.0f64; 2];
    for (i, sigma) in [0.2, 0.4].into_iter().enumerate() {
        let params = RayFlowParams::new(vec![0.5], sigma);
        let back =
            match backward_marginal_recursive(&sched, &params, &[0.9], 0, &noise_means) {
                Ok(b) => b,
                Err(_) => return failed("sigma-scaling", "recursion"),
            };
        let mut rng = Rng::from_seed(seed + i as u64);
        let draws: Vec<Vec<f64>> = (0..n).map(|_| back.dist.sample(&mut rng)).collect();
        let (_, var) = mc_moments(&draws).expect("n >= 2");
        vars[i] = var;
    }
    let ratio = vars[1] / vars[0];
    Check::new(
        "sigma-scaling",
        "reconstruction variance ratio under doubled sigma (target 4), 1e5 draws",
        (ratio - 4.0).abs(),
        0.5,
    )
}

/// Gradient stationarity of the closed-form denoiser and convexity of the
/// loss around it, over random finite datasets.
pub fn check_denoiser_optimality(seed: u64) -> (Check, Check) {
    let mut rng = Rng::from_seed(seed);
    let mut worst_res: f64 = 0.0;
    let mut worst_convex: f64 = 0.0;
    for _ in 0..100 {
        let t_steps = 8;
        let sched = make_linear_schedule(t_steps, 0.05, 0.5).expect("static schedule");
        let k = 1 + rng.index(16);
        let d = 1 + rng.index(4);
        let points: Vec<Vec<f64>> = (0..k).map(|_| rand_vec(&mut rng, d, 1.0)).collect();
        let targets: Vec<Vec<f64>> = (0..k).map(|_| rand_vec(&mut rng, d, 1.0)).collect();
        let ds = FiniteDataset::new(points, targets).expect("consistent dims");
        let sigma = 0.2 + 0.6 * rng.uniform();
        let x_t = rand_vec(&mut rng, d, 1.5);
        let t = 1 + rng.index(t_steps);
        let res = match optimal_denoise_loss_stationarity(&ds, &sched, sigma, &x_t, t) {
            Ok(r) => r,
            Err(_) => return (failed("denoiser-stationarity", "residual"), failed("denoiser-convexity", "residual")),
        };
        let out = optimal_denoise(&ds, &sched, sigma, &x_t, t).expect("same preconditions");
        let scale = out.iter().map(|o| o * o).sum::<f64>().sqrt().max(1.0);
        worst_res = worst_res.max(res / scale);
        let base = denoise_loss_at(&ds, &sched, sigma, &x_t, t, &out).expect("loss");
        for _ in 0..4 {
            let delta = rand_vec(&mut rng, d, 1e-2);
            let cand: Vec<f64> = out.iter().zip(&delta).map(|(o, dl)| o + dl).collect();
            let bumped = denoise_loss_at(&ds, &sched, sigma, &x_t, t, &cand).expect("loss");
            // Any decrease under perturbation contradicts optimality.
            worst_convex = worst_convex.max(base - bumped);
        }
    }
    (
        Check::new(
            "denoiser-stationarity",
            "relative gradient residual at the closed-form denoiser, 100 instances",
            worst_res,
            1e-8,
        ),
        Check::new(
            "denoiser-convexity",
            "loss decrease under random perturbations of the optimum (should be none)",
            worst_convex,
            1e-12,
        ),
    )
}

/// Variance of the optimal timestep proposal never exceeds the uniform one,
/// and is exactly zero.
pub fn check_variance_inequality(seed: u64) -> (Check, Check) {
    let mut rng = Rng::from_seed(seed);
    let t_steps = 32;
    let mut worst_gap: f64 = 0.0;
    let mut worst_qvar: f64 = 0.0;
    for _ in 0..100 {
        let xi: Vec<f64> = (0..t_steps).map(|_| rng.uniform() * 3.0 + 1e-6).collect();
        let p = vec![1.0 / t_steps as f64; t_steps];
        let q = match optimal_q(&xi, &p) {
            Ok(q) => q,
            Err(_) => return (failed("is-variance-inequality", "optimal q"), failed("is-zero-variance", "optimal q")),
        };
        let var_q = is_variance_exact(&xi, &p, &q).expect("support ok");
        let var_p = is_variance_exact(&xi, &p, &p).expect("support ok");
        worst_gap = worst_gap.max(var_q - var_p);
        worst_qvar = worst_qvar.max(var_q.abs());
    }
    (
        Check::new(
            "is-variance-inequality",
            "Var(q*) <= Var(uniform) on 100 random discrete instances, T=32",
            worst_gap,
            1e-12,
        ),
        Check::new(
            "is-zero-variance",
            "closed-form variance under the optimal proposal",
            worst_qvar,
            1e-9,
        ),
    )
}

/// Monte-Carlo residual of the kernelized Stein identity under a Gaussian
/// target, in standard-error units.
pub fn check_stein_identity(seed: u64) -> Check {
    let (m, v): (f64, f64) = (1.2, 0.8);
    let h: f64 = 0.6;
    let mut rng = Rng::from_seed(seed);
    let n = 200_000;
    let mut worst: f64 = 0.0;
    for query in [0.0, 1.2, 2.5] {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = m + v.sqrt() * rng.standard_normal();
            let d = x - query;
            let k = (-d * d / (2.0 * h * h)).exp();
            let val = (m - x) / v * k - d / (h * h) * k;
            sum += val;
            sum_sq += val * val;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        worst = worst.max(mean.abs() / se);
    }
    Check::new(
        "stein-identity",
        "E[score k + grad k] under the target, standard-error units, 2e5 draws",
        worst,
        3.0,
    )
}

/// SVGD particles against a truncated-Gaussian target: Kolmogorov-Smirnov
/// statistic after convergence, 256 particles.
pub fn check_svgd_ks() -> Check {
    let t_max = 32.0;
    let (m, s) = (20.0, 5.0);
    let score = |t: f64| (m - t) / (s * s);
    let mut ps = ParticleSet::uniform(256, t_max, 1.0, 0.25);
    for _ in 0..3000 {
        ps = svgd_step(&ps, score);
    }
    let density = |t: f64| (-(t - m) * (t - m) / (2.0 * s * s)).exp();
    let n_grid = 20_000;
    let h = (t_max - 1.0) / n_grid as f64;
    let mut cdf_grid = vec![0.0; n_grid + 1];
    for i in 1..=n_grid {
        let a = 1.0 + (i - 1) as f64 * h;
        cdf_grid[i] = cdf_grid[i - 1] + 0.5 * h * (density(a) + density(a + h));
    }
    let total = cdf_grid[n_grid];
    let mut sorted = ps.particles.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, t) in sorted.iter().enumerate() {
        let idx = (((t - 1.0) / h) as usize).min(n_grid);
        let f = cdf_grid[idx] / total;
        ks = ks
            .max((f - i as f64 / n).abs())
            .max((f - (i + 1) as f64 / n).abs());
    }
    Check::new(
        "svgd-ks",
        "particle CDF vs truncated-Gaussian target, 256 particles",
        ks,
        0.1,
    )
}

/// Analytic network gradients against central finite differences over every
/// architecture shape the pipeline uses.
pub fn check_gradient(seed: u64) -> Check {
    let mut rng = Rng::from_seed(seed);
    let mut worst: f64 = 0.0;
    for dims in [
        vec![2, 8, 1],
        vec![4, 8, 8, 2],
        vec![6, 16, 16, 2],
        vec![8, 32, 1],
    ] {
        let net = Net::random(&dims, &mut rng);
        let input = rand_vec(&mut rng, dims[0], 1.0);
        let target = rand_vec(&mut rng, *dims.last().unwrap(), 1.0);
        let loss = |n: &Net| -> f64 {
            let out = n.forward(&input).expect("shape ok");
            out.iter().zip(&target).map(|(o, t)| (o - t) * (o - t)).sum()
        };
        let out = net.forward(&input).expect("shape ok");
        let lg: Vec<f64> = out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t)).collect();
        let grads = net.backward(&input, &lg).expect("shape ok");
        let h = 1e-6;
        let mut probe = net.clone();
        for l in 0..dims.len() - 1 {
            for i in 0..net.weights[l].len() {
                probe.weights[l][i] = net.weights[l][i] + h;
                let up = loss(&probe);
                probe.weights[l][i] = net.weights[l][i] - h;
                let down = loss(&probe);
                probe.weights[l][i] = net.weights[l][i];
                let fd = (up - down) / (2.0 * h);
                let denom = grads.weights[l][i].abs().max(fd.abs()).max(1e-6);
                worst = worst.max((grads.weights[l][i] - fd).abs() / denom);
            }
            for i in 0..net.biases[l].len() {
                probe.biases[l][i] = net.biases[l][i] + h;
                let up = loss(&probe);
                probe.biases[l][i] = net.biases[l][i] - h;
                let down = loss(&probe);
                probe.biases[l][i] = net.biases[l][i];
                let fd = (up - down) / (2.0 * h);
                let denom = grads.biases[l][i].abs().max(fd.abs()).max(1e-6);
                worst = worst.max((grads.biases[l][i] - fd).abs() / denom);
            }
        }
    }
    Check::new(
        "gradient-check",
        "analytic vs central finite differences, all pipeline network shapes",
        worst,
        1e-4,
    )
}

/// The strided sampler at K=1 must agree bit-for-bit with the one-step
/// sampler under shared seeds.
pub fn check_sampler_consistency(seed: u64) -> Check {
    let sched = make_linear_schedule(16, 0.02, 0.5).expect("static schedule");
    let ds = FiniteDataset::new(
        vec![vec![0.5, -0.5], vec![-0.5, 0.5]],
        vec![vec![0.1, 0.1], vec![-0.2, 0.3]],
    )
    .expect("consistent dims");
    let oracle = OracleDenoiser {
        dataset: &ds,
        sched: &sched,
        sigma: 0.3,
    };
    let params = RayFlowParams::new(vec![0.0, 0.0], 0.3);
    let mut mismatches = 0u32;
    for trial in 0..100 {
        let mut r1 = Rng::from_seed(seed + trial);
        let mut r2 = Rng::from_seed(seed + trial);
        let a = sample_k_step(&oracle, &sched, &params, 1, &mut r1);
        let b = sample_one_step(&oracle, &sched, &params, &mut r2);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                if a.len() != b.len()
                    || a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits())
                {
                    mismatches += 1;
                }
            }
            _ => mismatches += 1,
        }
    }
    Check::new(
        "sampler-consistency",
        "K=1 strided sampler vs one-step sampler, bit-exact over 100 seeds",
        mismatches as f64,
        0.0,
    )
}

/// Runs the full suite against the configured schedule family.
pub fn run_verification(cfg: &Config) -> VerificationReport {
    let mut scheds = Vec::new();
    if let Ok(s) = cfg.schedule() {
        scheds.push(s);
    }
    let mut rng = Rng::from_seed(2024);
    for _ in 0..100 {
        let t_steps = 1 + rng.index(128);
        let bmin = 0.01 + 0.05 * rng.uniform();
        let bmax = bmin + 0.6 * rng.uniform();
        if let Ok(s) = make_linear_schedule(t_steps, bmin, bmax) {
            scheds.push(s);
        }
    }

    let mut checks = vec![
        check_schedule_invariants(&scheds),
        check_posterior_simplification(11),
        check_forward_marginal_mc(12),
        check_backward_marginal_mc(13),
        check_reconstruction(14),
        check_sigma_scaling(15),
    ];
    let (stat, convex) = check_denoiser_optimality(16);
    checks.push(stat);
    checks.push(convex);
    let (ineq, zero) = check_variance_inequality(17);
    checks.push(ineq);
    checks.push(zero);
    checks.push(check_stein_identity(18));
    checks.push(check_svgd_ks());
    checks.push(check_gradient(19));
    checks.push(check_sampler_consistency(20));

    let overall_pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        checks,
        overall_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes_on_default_config() {
        let report = run_verification(&Config::default());
        for c in &report.checks {
            assert!(c.pass, "{} failed: {} > {}", c.name, c.error, c.tolerance);
        }
        assert!(report.overall_pass);
    }

    #[test]
    fn corrupted_beta_tilde_is_caught() {
        let good = make_linear_schedule(16, 0.05, 0.5).unwrap();
        let alpha: Vec<f64> = (1..=16).map(|t| good.alpha(t)).collect();
        let beta: Vec<f64> = (1..=16).map(|t| good.beta(t)).collect();
        let alpha_bar: Vec<f64> = (1..=16).map(|t| good.alpha_bar(t)).collect();
        // Corruption mimicking a mis-derived formula.
        let beta_tilde: Vec<f64> = (1..=16).map(|t| good.beta_tilde(t) * 1.01).collect();
        let bad = Schedule::from_parts(alpha, beta, alpha_bar, beta_tilde).unwrap();
        let check = check_schedule_invariants(&[bad]);
        assert!(!check.pass);
        // The untouched schedule still passes.
        assert!(check_schedule_invariants(&[good]).pass);
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            checks: vec![Check::new("demo", "demo detail", 1e-13, 1e-12)],
            overall_pass: true,
        };
        let json = serde_json::to_string(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        assert!(report.table().contains("demo"));
    }
}
