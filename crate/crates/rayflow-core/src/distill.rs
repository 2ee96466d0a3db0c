//! Distillation pipeline: teacher-pair construction, student training with
//! the optional time sampler, and the few-step / one-step samplers.

use alloc::vec::Vec;

use crate::chain::RayFlowParams;
use crate::denoiser::Denoiser;
use crate::math::FloatExt;
use crate::net::{time_embedding, AdamW, Net, TIME_EMBED_DIM};
use crate::schedule::Schedule;
use crate::time_sampler::{
    induced_distribution, train_time_sampler, ParticleSet, TimeSamplerConfig,
};
use crate::{Error, Result, Rng};

/// One distillation pair: a teacher-generated sample, the average of the
/// teacher's per-step noise predictions along its trajectory, and the source
/// noise it was solved from.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillPair {
    pub x0_hat: Vec<f64>,
    pub eps_hat_mu: Vec<f64>,
    pub source_noise: Vec<f64>,
    pub steps: usize,
}

/// Training configuration for [`train`].
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Solver steps used when the pairs were constructed; recorded in logs
    /// and checkpoints.
    pub steps_k: usize,
    pub sigma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub use_time_sampler: bool,
    pub time_sampler: TimeSamplerConfig,
    /// Particle count for the SVGD system.
    pub particles: usize,
    /// Kernel bandwidth on the raw `[1, T]` axis.
    pub bandwidth: f64,
    pub svgd_step_size: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 40,
            steps_k: 8,
            sigma: 0.3,
            lr: 1e-3,
            batch_size: 1,
            seed: 0,
            use_time_sampler: true,
            time_sampler: TimeSamplerConfig::default(),
            particles: 32,
            bandwidth: 2.0,
            svgd_step_size: 0.05,
        }
    }
}

/// Per-epoch training log entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Histogram of the timesteps chosen for student updates this epoch.
    pub t_histogram: Vec<u32>,
}

/// Student wrapper implementing [`Denoiser`]: input is
/// `concat(x_t, time features)`.
pub struct StudentDenoiser<'a> {
    pub net: &'a Net,
    pub sched: &'a Schedule,
}

impl StudentDenoiser<'_> {
    fn build_input(sched: &Schedule, x_t: &[f64], t: usize) -> Vec<f64> {
        let mut input = Vec::with_capacity(x_t.len() + TIME_EMBED_DIM);
        input.extend_from_slice(x_t);
        input.extend(time_embedding(sched, t));
        input
    }
}

impl Denoiser for StudentDenoiser<'_> {
    fn dim(&self) -> usize {
        self.net.output_dim()
    }
    fn predict(&self, x_t: &[f64], t: usize) -> Result<Vec<f64>> {
        self.sched.timestep(t)?;
        self.net.forward(&Self::build_input(self.sched, x_t, t))
    }
}

/// Maps solver step `k` in `[0, K]` to a schedule timestep with uniform
/// stride; `k = 0` maps to 0 (the data endpoint).
pub fn stride_timestep(t_steps: usize, big_k: usize, k: usize) -> usize {
    if k == 0 {
        0
    } else {
        let t = libm::round(k as f64 * t_steps as f64 / big_k as f64) as usize;
        t.clamp(1, t_steps)
    }
}

/// Deterministic DDIM-style VP reverse solve from `noise` in `big_k` uniform
/// strides. Returns the sample and every per-step teacher noise prediction.
pub fn ddim_solve(
    teacher: &dyn Denoiser,
    sched: &Schedule,
    noise: &[f64],
    big_k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if big_k == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let t_steps = sched.len();
    let mut x = noise.to_vec();
    let mut preds = Vec::with_capacity(big_k);
    for k in (1..=big_k).rev() {
        let t = stride_timestep(t_steps, big_k, k);
        let t_prev = stride_timestep(t_steps, big_k, k - 1);
        let ab = sched.alpha_bar(t);
        let ab_prev = sched.alpha_bar(t_prev);
        let eps = teacher.predict(&x, t)?;
        let x0_pred: Vec<f64> = x
            .iter()
            .zip(&eps)
            .map(|(xi, e)| (xi - (1.0 - ab).fsqrt() * e) / ab.fsqrt())
            .collect();
        x = x0_pred
            .iter()
            .zip(&eps)
            .map(|(x0, e)| ab_prev.fsqrt() * x0 + (1.0 - ab_prev).fsqrt() * e)
            .collect();
        preds.push(eps);
    }
    Ok((x, preds))
}

/// Builds `n` distillation pairs by solving teacher trajectories from fresh
/// Gaussian noise. RNG streams are split per pair, so the result does not
/// depend on evaluation order.
pub fn construct_pairs(
    teacher: &dyn Denoiser,
    sched: &Schedule,
    n: usize,
    big_k: usize,
    rng: &Rng,
) -> Result<Vec<DistillPair>> {
    let dim = teacher.dim();
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let mut child = rng.split(i as u64);
        let noise = child.standard_normal_vec(dim);
        let (x0_hat, preds) = ddim_solve(teacher, sched, &noise, big_k)?;
        let mut eps_hat_mu = alloc::vec![0.0; dim];
        for p in &preds {
            for (acc, v) in eps_hat_mu.iter_mut().zip(p) {
                *acc += v;
            }
        }
        for v in &mut eps_hat_mu {
            *v /= preds.len() as f64;
        }
        pairs.push(DistillPair {
            x0_hat,
            eps_hat_mu,
            source_noise: noise,
            steps: big_k,
        });
    }
    Ok(pairs)
}

/// Distills the student (and optionally the time-sampler network) on the
/// given pairs. Returns per-epoch logs.
pub fn train(
    student: &mut Net,
    sampler_net: &mut Net,
    pairs: &[DistillPair],
    sched: &Schedule,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<Vec<EpochLog>> {
    if pairs.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let t_steps = sched.len();
    let mut opt = AdamW::new(cfg.lr);
    let mut sampler_opt = AdamW::new(cfg.time_sampler.lr);
    let mut particles = ParticleSet::uniform(
        cfg.particles.max(2),
        t_steps as f64,
        cfg.bandwidth,
        cfg.svgd_step_size,
    );
    let mut logs = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    let batch = cfg.batch_size.max(1);
    for epoch in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut hist = alloc::vec![0u32; t_steps];
        for chunk in pairs.chunks(batch) {
            let mut acc: Option<crate::net::Grads> = None;
            for pair in chunk {
                step += 1;
                // Pick a timestep: time-sampler weights or uniform.
                let t = if cfg.use_time_sampler {
                    let p =
                        induced_distribution(sampler_net, sched, &pair.x0_hat, &pair.eps_hat_mu)?;
                    sample_categorical(&p, rng) + 1
                } else {
                    rng.index(t_steps) + 1
                };
                hist[t - 1] += 1;
                let s = sched.alpha_bar(t).fsqrt();
                let point: Vec<f64> = pair
                    .x0_hat
                    .iter()
                    .zip(&pair.eps_hat_mu)
                    .map(|(x, m)| s * x + (1.0 - s) * m)
                    .collect();
                let input = StudentDenoiser::build_input(sched, &point, t);
                let out = student.forward(&input)?;
                let loss: f64 = out
                    .iter()
                    .zip(&pair.eps_hat_mu)
                    .map(|(o, m)| (o - m) * (o - m))
                    .sum();
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { step });
                }
                loss_sum += loss;
                let loss_grad: Vec<f64> = out
                    .iter()
                    .zip(&pair.eps_hat_mu)
                    .map(|(o, m)| 2.0 * (o - m))
                    .collect();
                let grads = student.backward(&input, &loss_grad)?;
                match &mut acc {
                    None => acc = Some(grads),
                    Some(a) => {
                        for (aw, gw) in a.weights.iter_mut().zip(&grads.weights) {
                            for (x, y) in aw.iter_mut().zip(gw) {
                                *x += y;
                            }
                        }
                        for (ab, gb) in a.biases.iter_mut().zip(&grads.biases) {
                            for (x, y) in ab.iter_mut().zip(gb) {
                                *x += y;
                            }
                        }
                    }
                }
            }
            let mut grads = acc.expect("nonempty chunk");
            let inv = 1.0 / chunk.len() as f64;
            for w in &mut grads.weights {
                for x in w {
                    *x *= inv;
                }
            }
            for b in &mut grads.biases {
                for x in b {
                    *x *= inv;
                }
            }
            opt.step(student, &grads);

            let pair = chunk.last().expect("nonempty chunk");
            if cfg.use_time_sampler {
                // xi under the current student, at this pair.
                let xi_at = |ti: usize| -> f64 {
                    let sd = StudentDenoiser {
                        net: student,
                        sched,
                    };
                    crate::time_sampler::xi(&sd, sched, &pair.x0_hat, &pair.eps_hat_mu, ti)
                        .unwrap_or(0.0)
                };
                train_time_sampler(
                    sampler_net,
                    &mut sampler_opt,
                    &mut particles,
                    sched,
                    &pair.x0_hat,
                    &pair.eps_hat_mu,
                    xi_at,
                    &cfg.time_sampler,
                )?;
            }
        }
        logs.push(EpochLog {
            epoch,
            mean_loss: loss_sum / pairs.len() as f64,
            t_histogram: hist,
        });
    }
    Ok(logs)
}

fn sample_categorical(p: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = p.iter().sum();
    let u = rng.uniform() * total;
    let mut acc = 0.0;
    for (i, pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// `big_k`-step sampler. Strides map uniformly onto the schedule and each
/// stride applies the backward update with the stride-effective
/// `alpha = sqrt(ab_t / ab_t_prev)`, so `big_k = T` reduces to the per-step
/// rule and `big_k = 1` reduces to the one-step jump.
pub fn sample_k_step(
    student: &dyn Denoiser,
    sched: &Schedule,
    params: &RayFlowParams,
    big_k: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if big_k == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let t_steps = sched.len();
    let dim = student.dim();
    let mut x = rng.standard_normal_vec(dim);
    for k in (1..=big_k).rev() {
        let t = stride_timestep(t_steps, big_k, k);
        let t_prev = stride_timestep(t_steps, big_k, k - 1);
        let ab = sched.alpha_bar(t);
        let ab_prev = sched.alpha_bar(t_prev);
        let a_eff = (ab / ab_prev).fsqrt();
        // Stride-level backward variance coefficient; zero when the stride
        // lands on the data endpoint.
        let bt_eff = (1.0 - a_eff * a_eff) * (1.0 - ab_prev) / (1.0 - ab);
        let eps_hat = student.predict(&x, t)?;
        let noise = rng.standard_normal_vec(dim);
        let scale = (bt_eff).fsqrt() * params.sigma;
        x = x
            .iter()
            .zip(&eps_hat)
            .zip(&noise)
            .map(|((xi, e), n)| xi / a_eff - (1.0 - a_eff) / a_eff * e + scale * n)
            .collect();
    }
    Ok(x)
}

/// One-step sampler: a single prediction at `t = T` and one jump to the
/// data endpoint. Identical to [`sample_k_step`] with `big_k = 1`.
pub fn sample_one_step(
    student: &dyn Denoiser,
    sched: &Schedule,
    params: &RayFlowParams,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    sample_k_step(student, sched, params, 1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoiser::{FiniteDataset, OracleDenoiser};
    use crate::schedule::make_linear_schedule;
    use alloc::vec;

    struct ConstPredictor {
        value: Vec<f64>,
    }
    impl Denoiser for ConstPredictor {
        fn dim(&self) -> usize {
            self.value.len()
        }
        fn predict(&self, _x: &[f64], _t: usize) -> Result<Vec<f64>> {
            Ok(self.value.clone())
        }
    }

    #[test]
    fn stride_mapping_endpoints() {
        assert_eq!(stride_timestep(32, 4, 4), 32);
        assert_eq!(stride_timestep(32, 4, 0), 0);
        assert_eq!(stride_timestep(32, 1, 1), 32);
        for k in 1..=32 {
            assert_eq!(stride_timestep(32, 32, k), k);
        }
    }

    #[test]
    fn one_step_average_is_single_prediction() {
        let sched = make_linear_schedule(16, 0.02, 0.5).unwrap();
        let teacher = ConstPredictor {
            value: vec![0.4, -0.2],
        };
        let rng = Rng::from_seed(1);
        let pairs = construct_pairs(&teacher, &sched, 3, 1, &rng).unwrap();
        for p in &pairs {
            assert_eq!(p.eps_hat_mu, teacher.value);
        }
    }

    #[test]
    fn constant_teacher_solver_unrolls_in_closed_form() {
        // With a constant predictor c, each stride maps
        // x -> sqrt(ab_prev) * (x - sqrt(1-ab) c) / sqrt(ab) + sqrt(1-ab_prev) c,
        // which telescopes to x0 = (noise - sqrt(1-ab_T) c) / sqrt(ab_T).
        let sched = make_linear_schedule(12, 0.02, 0.4).unwrap();
        let c = vec![0.7];
        let teacher = ConstPredictor { value: c.clone() };
        let noise = vec![1.3];
        for big_k in [1, 3, 12] {
            let (x0, preds) = ddim_solve(&teacher, &sched, &noise, big_k).unwrap();
            assert_eq!(preds.len(), big_k);
            let ab_t = sched.alpha_bar(sched.len());
            let expect = (noise[0] - (1.0 - ab_t).fsqrt() * c[0]) / ab_t.fsqrt();
            assert!((x0[0] - expect).abs() < 1e-10, "K={big_k}: {} vs {expect}", x0[0]);
        }
    }

    #[test]
    fn k1_and_one_step_bit_identical() {
        let sched = make_linear_schedule(16, 0.02, 0.5).unwrap();
        let ds = FiniteDataset::new(vec![vec![0.5, -0.5]], vec![vec![0.1, 0.1]]).unwrap();
        let oracle = OracleDenoiser {
            dataset: &ds,
            sched: &sched,
            sigma: 0.3,
        };
        let params = RayFlowParams::new(vec![0.0, 0.0], 0.3);
        for seed in 0..100 {
            let mut r1 = Rng::from_seed(seed);
            let mut r2 = Rng::from_seed(seed);
            let a = sample_k_step(&oracle, &sched, &params, 1, &mut r1).unwrap();
            let b = sample_one_step(&oracle, &sched, &params, &mut r2).unwrap();
            assert_eq!(a, b);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn sigma_zero_sampling_deterministic() {
        let sched = make_linear_schedule(16, 0.02, 0.5).unwrap();
        let teacher = ConstPredictor {
            value: vec![0.0, 0.0],
        };
        let params = RayFlowParams::new(vec![0.0, 0.0], 0.0);
        let mut r1 = Rng::from_seed(3);
        let mut r2 = Rng::from_seed(3);
        let a = sample_k_step(&teacher, &sched, &params, 4, &mut r1).unwrap();
        let b = sample_k_step(&teacher, &sched, &params, 4, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overfit_single_pair_without_time_sampler() {
        let sched = make_linear_schedule(8, 0.05, 0.4).unwrap();
        let pair = DistillPair {
            x0_hat: vec![0.5, -0.3],
            eps_hat_mu: vec![-0.2, 0.8],
            source_noise: vec![0.0, 0.0],
            steps: 8,
        };
        let mut rng = Rng::from_seed(5);
        let mut student = Net::random(&[2 + TIME_EMBED_DIM, 32, 32, 2], &mut rng);
        let mut sampler = Net::random(&[4 + TIME_EMBED_DIM, 16, 1], &mut rng);
        let cfg = TrainConfig {
            epochs: 5000,
            use_time_sampler: false,
            lr: 3e-3,
            ..TrainConfig::default()
        };
        let logs = train(&mut student, &mut sampler, &[pair.clone()], &sched, &cfg, &mut rng)
            .unwrap();
        let last = logs.last().unwrap();
        assert!(last.mean_loss < 1e-4, "final loss {}", last.mean_loss);
    }

    #[test]
    fn identical_seeds_identical_logs() {
        let sched = make_linear_schedule(8, 0.05, 0.4).unwrap();
        let teacher = ConstPredictor {
            value: vec![0.1, 0.2],
        };
        let run = || {
            let root = Rng::from_seed(77);
            let pairs = construct_pairs(&teacher, &sched, 4, 4, &root).unwrap();
            let mut rng = root.split(1000);
            let mut student = Net::random(&[2 + TIME_EMBED_DIM, 16, 2], &mut rng);
            let mut sampler = Net::random(&[4 + TIME_EMBED_DIM, 16, 1], &mut rng);
            let cfg = TrainConfig {
                epochs: 3,
                ..TrainConfig::default()
            };
            train(&mut student, &mut sampler, &pairs, &sched, &cfg, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }
}
