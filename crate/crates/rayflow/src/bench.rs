//! Distillation pipeline plumbing and the benchmark grids: the full
//! teacher-to-student training run, checkpointed sampling, the
//! dataset x steps x time-sampler metric sweep, and the standalone
//! importance-sampling variance benchmark.

use rayflow_core::chain::RayFlowParams;
use rayflow_core::denoiser::{GaussianMixture, GmmTeacher};
use rayflow_core::distill::{
    construct_pairs, sample_k_step, train, EpochLog, StudentDenoiser, TrainConfig,
};
use rayflow_core::time_sampler::TimeSamplerConfig;
use rayflow_core::net::{Net, TIME_EMBED_DIM};
use rayflow_core::schedule::make_linear_schedule;
use rayflow_core::time_sampler::{is_variance_exact, optimal_q, xi};
use rayflow_core::Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, NetDump, SCHEMA_VERSION};
use crate::dataset::{gauss8_mixture, gen_dataset, GAUSS8_STD};
use crate::error::Result;
use crate::metrics::{mmd_rbf, wasserstein2};

/// Everything a full distillation run needs.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub dataset: String,
    pub t_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Solver steps for teacher-pair construction.
    pub steps_k: usize,
    pub sigma: f64,
    pub epochs: usize,
    pub seed: u64,
    pub use_time_sampler: bool,
    pub pairs: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            dataset: "gauss8".into(),
            t_steps: 32,
            beta_min: 0.02,
            beta_max: 0.45,
            steps_k: 32,
            sigma: 0.3,
            epochs: 150,
            seed: 0,
            use_time_sampler: true,
            pairs: 256,
        }
    }
}

/// Exact mixture behind the pre-trained teacher. `gauss8` has an analytic
/// form; the other datasets use a kernel-center mixture built from their own
/// generator.
pub fn teacher_mixture(name: &str, seed: u64) -> Result<GaussianMixture> {
    if name == "gauss8" {
        return Ok(gauss8_mixture());
    }
    let ds = gen_dataset(name, 64, seed ^ 0x7465_6163_6865_72)?;
    Ok(GaussianMixture::new(ds.points, GAUSS8_STD * GAUSS8_STD)?)
}

/// Runs the whole pipeline: build pairs with the deterministic solver, train
/// student and time-sampler networks, and package a checkpoint.
pub fn distill_run(opts: &PipelineOptions) -> Result<(Checkpoint, Vec<EpochLog>)> {
    let sched = make_linear_schedule(opts.t_steps, opts.beta_min, opts.beta_max)?;
    let mixture = teacher_mixture(&opts.dataset, opts.seed)?;
    let teacher = GmmTeacher {
        mixture: &mixture,
        sched: &sched,
    };
    let root = Rng::from_seed(opts.seed);
    let pairs = construct_pairs(&teacher, &sched, opts.pairs, opts.steps_k, &root)?;

    let dim = mixture.dim;
    // Global target mean: average of the per-pair solver-trajectory means.
    let mut eps_mu = vec![0.0; dim];
    for p in &pairs {
        for (acc, v) in eps_mu.iter_mut().zip(&p.eps_hat_mu) {
            *acc += v;
        }
    }
    for v in &mut eps_mu {
        *v /= pairs.len() as f64;
    }

    let mut rng = root.split(u64::MAX);
    let mut student = Net::random(&[dim + TIME_EMBED_DIM, 64, 64, dim], &mut rng);
    let mut sampler = Net::random(&[2 * dim + TIME_EMBED_DIM, 32, 1], &mut rng);
    let cfg = TrainConfig {
        epochs: opts.epochs,
        steps_k: opts.steps_k,
        sigma: opts.sigma,
        lr: 2e-3,
        batch_size: 8,
        seed: opts.seed,
        use_time_sampler: opts.use_time_sampler,
        // Lighter per-chunk sampler updates than the library default: the
        // sampler net sees thousands of chunks over a full run, so a few
        // SVGD/regression iterations per chunk converge just as well at a
        // fraction of the cost.
        time_sampler: TimeSamplerConfig {
            svgd_iters: 3,
            regress_steps: 3,
            ..TimeSamplerConfig::default()
        },
        particles: 16,
        ..TrainConfig::default()
    };
    let logs = train(&mut student, &mut sampler, &pairs, &sched, &cfg, &mut rng)?;

    let ckpt = Checkpoint {
        schema_version: SCHEMA_VERSION,
        dataset: opts.dataset.clone(),
        t_steps: opts.t_steps,
        beta_min: opts.beta_min,
        beta_max: opts.beta_max,
        sigma: opts.sigma,
        steps_k: opts.steps_k,
        seed: opts.seed,
        eps_mu,
        student: NetDump::from(&student),
        sampler: NetDump::from(&sampler),
    };
    Ok((ckpt, logs))
}

/// Draws `count` samples from a trained checkpoint with the `k`-step
/// sampler. Chains use split RNG streams, so the cloud is independent of
/// evaluation order.
pub fn sample_from_checkpoint(
    ckpt: &Checkpoint,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let sched = ckpt.config().schedule()?;
    let net = ckpt.student.to_net()?;
    let student = StudentDenoiser {
        net: &net,
        sched: &sched,
    };
    let params = RayFlowParams::new(ckpt.eps_mu.clone(), ckpt.sigma);
    let root = Rng::from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = root.split(i as u64);
        out.push(sample_k_step(&student, &sched, &params, k, &mut rng)?);
    }
    Ok(out)
}

/// Full-resolution teacher samples: deterministic solve from fresh noise
/// with `K = T` strides. The quality floor every student is measured
/// against.
pub fn teacher_samples(opts: &PipelineOptions, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let sched = make_linear_schedule(opts.t_steps, opts.beta_min, opts.beta_max)?;
    let mixture = teacher_mixture(&opts.dataset, opts.seed)?;
    let teacher = GmmTeacher {
        mixture: &mixture,
        sched: &sched,
    };
    let root = Rng::from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = root.split(i as u64);
        let noise = rng.standard_normal_vec(mixture.dim);
        let (x0, _) = rayflow_core::distill::ddim_solve(&teacher, &sched, &noise, opts.t_steps)?;
        out.push(x0);
    }
    Ok(out)
}

/// One benchmark cell. Teacher rows use `k = T` and `time_sampler = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub k: usize,
    pub time_sampler: bool,
    pub seed: u64,
    pub w2: f64,
    pub mmd: f64,
}

/// Formats with 9 significant digits, the CSV convention of this crate.
pub fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn bench_rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("dataset,K,time_sampler,seed,w2,mmd\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.dataset,
            r.k,
            r.time_sampler,
            r.seed,
            format_sig9(r.w2),
            format_sig9(r.mmd)
        ));
    }
    out
}

fn metric_cell(samples: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<(f64, f64)> {
    Ok((
        wasserstein2(samples, reference)?,
        mmd_rbf(samples, reference),
    ))
}

/// The full metric sweep: teacher floor plus student cells at every `k` in
/// `ks`, with and without the time sampler, for every seed.
pub fn run_benchmark(
    base: &PipelineOptions,
    seeds: &[u64],
    ks: &[usize],
    eval_n: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &seed in seeds {
        let reference = gen_dataset(&base.dataset, eval_n, seed ^ 0x5245_46)?.points;
        let mut opts = base.clone();
        opts.seed = seed;

        let teacher_cloud = teacher_samples(&opts, eval_n, seed ^ 0x54)?;
        let (w2, mmd) = metric_cell(&teacher_cloud, &reference)?;
        rows.push(BenchRow {
            dataset: base.dataset.clone(),
            k: base.t_steps,
            time_sampler: false,
            seed,
            w2,
            mmd,
        });

        for use_ts in [false, true] {
            opts.use_time_sampler = use_ts;
            let (ckpt, _) = distill_run(&opts)?;
            for &k in ks {
                let cloud = sample_from_checkpoint(&ckpt, k, eval_n, seed ^ 0x53_414d_50)?;
                let (w2, mmd) = metric_cell(&cloud, &reference)?;
                rows.push(BenchRow {
                    dataset: base.dataset.clone(),
                    k,
                    time_sampler: use_ts,
                    seed,
                    w2,
                    mmd,
                });
            }
        }
    }
    Ok(rows)
}

/// One instance of the importance-sampling variance benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsBenchRow {
    pub instance: usize,
    pub var_uniform: f64,
    pub var_optimal: f64,
    /// `var_optimal / var_uniform`; at or below 1 whenever the closed-form
    /// inequality holds.
    pub ratio: f64,
}

pub fn ts_rows_to_csv(rows: &[TsBenchRow]) -> String {
    let mut out = String::from("instance,var_uniform,var_optimal,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.instance,
            format_sig9(r.var_uniform),
            format_sig9(r.var_optimal),
            format_sig9(r.ratio)
        ));
    }
    out
}

/// Compares the single-sample estimator variance of the per-timestep loss
/// total under uniform timestep sampling vs the loss-proportional proposal,
/// on randomly initialized students.
pub fn bench_time_sampler(instances: usize, seed: u64) -> Result<Vec<TsBenchRow>> {
    let t_steps = 32;
    let sched = make_linear_schedule(t_steps, 0.02, 0.45)?;
    let mut rng = Rng::from_seed(seed);
    let mut rows = Vec::with_capacity(instances);
    for instance in 0..instances {
        let net = Net::random(&[2 + TIME_EMBED_DIM, 16, 2], &mut rng);
        let student = StudentDenoiser {
            net: &net,
            sched: &sched,
        };
        let x0: Vec<f64> = (0..2).map(|_| rng.standard_normal()).collect();
        let eps_mu: Vec<f64> = (0..2).map(|_| 0.5 * rng.standard_normal()).collect();
        let xi_vals: Vec<f64> = (1..=t_steps)
            .map(|t| xi(&student, &sched, &x0, &eps_mu, t))
            .collect::<rayflow_core::Result<_>>()?;
        let p = vec![1.0 / t_steps as f64; t_steps];
        let q = optimal_q(&xi_vals, &p)?;
        let var_uniform = is_variance_exact(&xi_vals, &p, &p)?;
        let var_optimal = is_variance_exact(&xi_vals, &p, &q)?;
        rows.push(TsBenchRow {
            instance,
            var_uniform,
            var_optimal,
            ratio: if var_uniform > 0.0 {
                var_optimal / var_uniform
            } else {
                1.0
            },
        });
    }
    Ok(rows)
}
