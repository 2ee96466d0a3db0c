//! Property tests over randomized schedules and chain inputs.

use proptest::prelude::*;
use rayflow_core::chain::{backward_step, forward_marginal, forward_step, RayFlowParams};
use rayflow_core::schedule::{make_linear_schedule, trajectory_point, TrajectoryKind};
use rayflow_core::time_sampler::optimal_q;

fn schedule_strategy() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..64, 0.005f64..0.2, 0.21f64..0.9)
}

proptest! {
    #[test]
    fn schedule_invariants((t_steps, bmin, bmax) in schedule_strategy()) {
        let s = make_linear_schedule(t_steps, bmin, bmax).unwrap();
        let mut prev_bar = 1.0;
        for t in 1..=t_steps {
            let (a, b) = (s.alpha(t), s.beta(t));
            prop_assert!((a * a + b * b - 1.0).abs() < 1e-12);
            prop_assert!(a > 0.0 && a < 1.0);
            let ab = s.alpha_bar(t);
            prop_assert!(ab > 0.0 && ab < prev_bar);
            let bt = s.beta_tilde(t);
            prop_assert!((0.0..1.0).contains(&bt));
            prop_assert!((bt - (1.0 - a * a) * (1.0 - prev_bar) / (1.0 - ab)).abs() < 1e-12);
            prev_bar = ab;
        }
        prop_assert_eq!(s.beta_tilde(1), 0.0);
    }

    #[test]
    fn forward_marginal_variance_bounded(
        (t_steps, bmin, bmax) in schedule_strategy(),
        sigma in 0.0f64..2.0,
        x0 in -3.0f64..3.0,
        eps_mu in -3.0f64..3.0,
    ) {
        let s = make_linear_schedule(t_steps, bmin, bmax).unwrap();
        let p = RayFlowParams::new(vec![eps_mu], sigma);
        let mut prev_var = 0.0;
        for t in 1..=t_steps {
            let g = forward_marginal(&s, &p, &[x0], t).unwrap();
            // Variance grows monotonically toward sigma^2 and never exceeds it.
            prop_assert!(g.var <= sigma * sigma + 1e-12);
            prop_assert!(g.var >= prev_var - 1e-12);
            prev_var = g.var;
            // The mean interpolates x0 and eps_mu, so it stays in their hull.
            let (lo, hi) = (x0.min(eps_mu), x0.max(eps_mu));
            prop_assert!(g.mean[0] >= lo - 1e-12 && g.mean[0] <= hi + 1e-12);
        }
    }

    #[test]
    fn backward_undoes_forward_mean(
        (t_steps, bmin, bmax) in schedule_strategy(),
        x in -3.0f64..3.0,
        eps_mu in -3.0f64..3.0,
        t_frac in 0.0f64..1.0,
    ) {
        let s = make_linear_schedule(t_steps, bmin, bmax).unwrap();
        let p = RayFlowParams::new(vec![eps_mu], 0.4);
        let t = 1 + ((t_steps - 1) as f64 * t_frac) as usize;
        let fwd = forward_step(&s, &p, &[x], t).unwrap();
        let back = backward_step(&s, &p, &fwd.mean, t).unwrap();
        prop_assert!((back.mean[0] - x).abs() < 1e-9);
    }

    #[test]
    fn trajectories_agree_at_endpoints(
        (t_steps, bmin, bmax) in schedule_strategy(),
        x0 in -3.0f64..3.0,
        eps in -3.0f64..3.0,
        eps_mu in -3.0f64..3.0,
    ) {
        let s = make_linear_schedule(t_steps, bmin, bmax).unwrap();
        for kind in [TrajectoryKind::RayFlow, TrajectoryKind::Vp, TrajectoryKind::Rf] {
            let p0 = trajectory_point(kind, &s, &[x0], &[eps], &[eps_mu], 0).unwrap();
            prop_assert!((p0[0] - x0).abs() < 1e-12);
        }
        // The RF path is exactly at the noise endpoint at t = T.
        let pt = trajectory_point(TrajectoryKind::Rf, &s, &[x0], &[eps], &[eps_mu], t_steps)
            .unwrap();
        prop_assert!((pt[0] - eps).abs() < 1e-12);
    }

    #[test]
    fn optimal_q_is_distribution(
        xi in prop::collection::vec(0.0f64..5.0, 2..20),
    ) {
        let n = xi.len();
        let p = vec![1.0 / n as f64; n];
        if xi.iter().sum::<f64>() > 0.0 {
            let q = optimal_q(&xi, &p).unwrap();
            let total: f64 = q.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(q.iter().all(|v| *v >= 0.0));
            // Monotone: larger xi never gets a smaller weight.
            for i in 0..n {
                for j in 0..n {
                    if xi[i] > xi[j] {
                        prop_assert!(q[i] >= q[j] - 1e-15);
                    }
                }
            }
        }
    }
}
