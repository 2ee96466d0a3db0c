//! Particle-system and sampler oracles: SVGD equilibrium against a known
//! target distribution, and reduction of the strided sampler to the
//! per-step backward chain.

use rayflow_core::chain::RayFlowParams;
use rayflow_core::denoiser::{Denoiser, FiniteDataset, OracleDenoiser};
use rayflow_core::distill::sample_k_step;
use rayflow_core::schedule::make_linear_schedule;
use rayflow_core::time_sampler::{svgd_step, ParticleSet};
use rayflow_core::Rng;

/// Runs SVGD to equilibrium against a Gaussian score restricted to [1, T]
/// and compares the empirical particle CDF against the numerically
/// integrated truncated target CDF with a Kolmogorov-Smirnov statistic.
#[test]
fn svgd_equilibrium_matches_target_cdf() {
    let t_max = 20.0;
    let (m, s) = (12.0, 3.0);
    let score = |t: f64| (m - t) / (s * s);

    let mut ps = ParticleSet::uniform(64, t_max, 0.8, 0.25);
    for _ in 0..4000 {
        ps = svgd_step(&ps, score);
    }

    // Truncated target CDF by trapezoid integration on [1, t_max].
    let density = |t: f64| (-(t - m) * (t - m) / (2.0 * s * s)).exp();
    let n_grid = 20_000;
    let h = (t_max - 1.0) / n_grid as f64;
    let mut cdf_grid = vec![0.0; n_grid + 1];
    for i in 1..=n_grid {
        let a = 1.0 + (i - 1) as f64 * h;
        cdf_grid[i] = cdf_grid[i - 1] + 0.5 * h * (density(a) + density(a + h));
    }
    let total = cdf_grid[n_grid];
    let cdf = |t: f64| {
        let idx = (((t - 1.0) / h) as usize).min(n_grid);
        cdf_grid[idx] / total
    };

    let mut sorted = ps.particles.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, t) in sorted.iter().enumerate() {
        let f = cdf(*t);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        ks = ks.max((f - lo).abs()).max((f - hi).abs());
    }
    assert!(ks <= 0.1, "KS statistic {ks}");
}

/// With one stride per schedule step the strided sampler must reduce to the
/// plain per-step backward chain.
#[test]
fn full_stride_sampler_reduces_to_backward_chain() {
    let t_steps = 12;
    let sched = make_linear_schedule(t_steps, 0.03, 0.45).unwrap();
    let ds = FiniteDataset::new(
        vec![vec![-1.0, 0.5], vec![1.0, -0.5]],
        vec![vec![0.2, 0.1], vec![-0.3, 0.4]],
    )
    .unwrap();
    let oracle = OracleDenoiser {
        dataset: &ds,
        sched: &sched,
        sigma: 0.3,
    };
    let params = RayFlowParams::new(vec![0.1, -0.2], 0.3);
    for seed in [1u64, 2, 3, 4, 5] {
        let mut r1 = Rng::from_seed(seed);
        let got = sample_k_step(&oracle, &sched, &params, t_steps, &mut r1).unwrap();

        let mut r2 = Rng::from_seed(seed);
        let mut x = r2.standard_normal_vec(2);
        for t in (1..=t_steps).rev() {
            let a = sched.alpha(t);
            let bt = sched.beta_tilde(t);
            let eps_hat = oracle.predict(&x, t).unwrap();
            let noise = r2.standard_normal_vec(2);
            x = x
                .iter()
                .zip(&eps_hat)
                .zip(&noise)
                .map(|((xi, e), n)| {
                    xi / a - (1.0 - a) / a * e + bt.sqrt() * params.sigma * n
                })
                .collect();
        }
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10, "seed {seed}: {g} vs {e}");
        }
    }
}
