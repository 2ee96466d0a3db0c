//! Closed-form denoisers: the optimal denoiser over a finite dataset and a
//! Gaussian-mixture teacher used as the pre-trained model in the
//! distillation pipeline.

use alloc::vec::Vec;

use crate::math::FloatExt;
use crate::schedule::Schedule;
use crate::{Error, Result};

/// Anything that predicts noise from a noisy point at a timestep.
pub trait Denoiser {
    fn dim(&self) -> usize;
    fn predict(&self, x_t: &[f64], t: usize) -> Result<Vec<f64>>;
}

/// A finite training set: `K` samples with their per-sample target means.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDataset {
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub dim: usize,
}

impl FiniteDataset {
    pub fn new(points: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() || points.len() != targets.len() {
            return Err(Error::LengthMismatch {
                expected: points.len().max(1),
                got: targets.len(),
            });
        }
        let dim = points[0].len();
        for v in points.iter().chain(targets.iter()) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        Ok(FiniteDataset { points, targets, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Softmax weights of the mixture components at `x_t`, computed in the log
/// domain with a max shift. Returned weights sum to 1.
fn component_weights(
    ds: &FiniteDataset,
    sched: &Schedule,
    sigma: f64,
    x_t: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    sched.timestep(t)?;
    if x_t.len() != ds.dim {
        return Err(Error::DimensionMismatch {
            expected: ds.dim,
            got: x_t.len(),
        });
    }
    let ab = sched.alpha_bar(t);
    let var = (1.0 - ab) * sigma * sigma;
    if var == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let s = ab.fsqrt();
    // Shared normalizing constant cancels; only the quadratic term matters.
    let mut logs: Vec<f64> = Vec::with_capacity(ds.len());
    for (x0, tgt) in ds.points.iter().zip(&ds.targets) {
        let sq: f64 = x_t
            .iter()
            .zip(x0)
            .zip(tgt)
            .map(|((x, x0i), m)| {
                let mu = s * x0i + (1.0 - s) * m;
                (x - mu) * (x - mu)
            })
            .sum();
        logs.push(-sq / (2.0 * var));
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).fexp()).collect();
    let sum: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= sum;
    }
    Ok(w)
}

/// The closed-form minimizer of the denoising loss over a finite dataset:
/// a softmax-weighted convex combination of the per-sample targets.
pub fn optimal_denoise(
    ds: &FiniteDataset,
    sched: &Schedule,
    sigma: f64,
    x_t: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    let w = component_weights(ds, sched, sigma, x_t, t)?;
    let mut out = alloc::vec![0.0; ds.dim];
    for (wi, tgt) in w.iter().zip(&ds.targets) {
        for (o, m) in out.iter_mut().zip(tgt) {
            *o += wi * m;
        }
    }
    Ok(out)
}

/// Norm of the (weight-normalized) gradient of the per-point denoising loss
/// evaluated at [`optimal_denoise`]'s output. Zero at the true minimizer.
pub fn optimal_denoise_loss_stationarity(
    ds: &FiniteDataset,
    sched: &Schedule,
    sigma: f64,
    x_t: &[f64],
    t: usize,
) -> Result<f64> {
    let w = component_weights(ds, sched, sigma, x_t, t)?;
    let out = optimal_denoise(ds, sched, sigma, x_t, t)?;
    // grad = 2 sum_i w_i (out - target_i), with weights normalized to 1.
    let mut grad = alloc::vec![0.0; ds.dim];
    for (wi, tgt) in w.iter().zip(&ds.targets) {
        for ((g, o), m) in grad.iter_mut().zip(&out).zip(tgt) {
            *g += 2.0 * wi * (o - m);
        }
    }
    Ok(grad.iter().map(|g| g * g).sum::<f64>().fsqrt())
}

/// The weighted denoising loss at a candidate output; used by convexity
/// probes.
pub fn denoise_loss_at(
    ds: &FiniteDataset,
    sched: &Schedule,
    sigma: f64,
    x_t: &[f64],
    t: usize,
    candidate: &[f64],
) -> Result<f64> {
    let w = component_weights(ds, sched, sigma, x_t, t)?;
    let mut loss = 0.0;
    for (wi, tgt) in w.iter().zip(&ds.targets) {
        let sq: f64 = candidate
            .iter()
            .zip(tgt)
            .map(|(c, m)| (c - m) * (c - m))
            .sum();
        loss += wi * sq;
    }
    Ok(loss)
}

/// Isotropic Gaussian mixture over component means, with equal weights.
/// Serves as the exact data distribution behind the teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub means: Vec<Vec<f64>>,
    /// Per-component isotropic variance.
    pub var: f64,
    pub dim: usize,
}

impl GaussianMixture {
    pub fn new(means: Vec<Vec<f64>>, var: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        let dim = means[0].len();
        for m in &means {
            if m.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.len(),
                });
            }
        }
        Ok(GaussianMixture { means, var, dim })
    }

    /// Log density of the diffused mixture at timestep `t` (standard VP
    /// forward with unit noise), up to the shared normalizing constant of a
    /// single component.
    pub fn diffused_log_density(&self, sched: &Schedule, x_t: &[f64], t: usize) -> Result<f64> {
        let ab = sched.alpha_bar(t);
        let v = ab * self.var + (1.0 - ab);
        let s = ab.fsqrt();
        let k = self.means.len() as f64;
        let mut max = f64::NEG_INFINITY;
        let mut logs = Vec::with_capacity(self.means.len());
        for m in &self.means {
            let sq: f64 = x_t
                .iter()
                .zip(m)
                .map(|(x, mi)| (x - s * mi) * (x - s * mi))
                .sum();
            let l = -sq / (2.0 * v);
            max = max.max(l);
            logs.push(l);
        }
        let sum: f64 = logs.iter().map(|l| (l - max).fexp()).sum();
        let d = self.dim as f64;
        Ok(max + (sum / k).fln() - 0.5 * d * (2.0 * core::f64::consts::PI * v).fln())
    }
}

/// Exact posterior noise prediction for a diffused Gaussian mixture under
/// the standard VP forward process; the "pre-trained teacher" of the
/// desk-scale pipeline.
pub fn gmm_teacher_denoise(
    mixture: &GaussianMixture,
    sched: &Schedule,
    x_t: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    sched.timestep(t)?;
    if x_t.len() != mixture.dim {
        return Err(Error::DimensionMismatch {
            expected: mixture.dim,
            got: x_t.len(),
        });
    }
    let ab = sched.alpha_bar(t);
    let v = ab * mixture.var + (1.0 - ab);
    let s = ab.fsqrt();
    // Responsibilities via log-domain softmax.
    let mut logs: Vec<f64> = Vec::with_capacity(mixture.means.len());
    for m in &mixture.means {
        let sq: f64 = x_t
            .iter()
            .zip(m)
            .map(|(x, mi)| (x - s * mi) * (x - s * mi))
            .sum();
        logs.push(-sq / (2.0 * v));
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).fexp()).collect();
    let sum: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= sum;
    }
    // score(x) = sum_i r_i * (s m_i - x) / v; eps_hat = -sqrt(1 - ab) score.
    let mut out = alloc::vec![0.0; mixture.dim];
    let n = (1.0 - ab).fsqrt();
    for (wi, m) in w.iter().zip(&mixture.means) {
        for ((o, x), mi) in out.iter_mut().zip(x_t).zip(m) {
            *o += wi * n * (x - s * mi) / v;
        }
    }
    Ok(out)
}

/// Teacher wrapper implementing [`Denoiser`] over a mixture and schedule.
pub struct GmmTeacher<'a> {
    pub mixture: &'a GaussianMixture,
    pub sched: &'a Schedule,
}

impl Denoiser for GmmTeacher<'_> {
    fn dim(&self) -> usize {
        self.mixture.dim
    }
    fn predict(&self, x_t: &[f64], t: usize) -> Result<Vec<f64>> {
        gmm_teacher_denoise(self.mixture, self.sched, x_t, t)
    }
}

/// Oracle wrapper implementing [`Denoiser`] for the finite-dataset optimum.
pub struct OracleDenoiser<'a> {
    pub dataset: &'a FiniteDataset,
    pub sched: &'a Schedule,
    pub sigma: f64,
}

impl Denoiser for OracleDenoiser<'_> {
    fn dim(&self) -> usize {
        self.dataset.dim
    }
    fn predict(&self, x_t: &[f64], t: usize) -> Result<Vec<f64>> {
        optimal_denoise(self.dataset, self.sched, self.sigma, x_t, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::make_linear_schedule;
    use alloc::vec;

    fn toy_dataset() -> FiniteDataset {
        FiniteDataset::new(
            vec![vec![-2.0, 0.0], vec![2.0, 0.0]],
            vec![vec![-1.0, 0.5], vec![1.0, -0.5]],
        )
        .unwrap()
    }

    #[test]
    fn single_component_returns_its_target() {
        let ds = FiniteDataset::new(vec![vec![0.3]], vec![vec![0.9]]).unwrap();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let out = optimal_denoise(&ds, &s, 0.3, &[5.0], 7).unwrap();
        assert!((out[0] - 0.9).abs() < 1e-14);
        let (res, _) = (
            optimal_denoise_loss_stationarity(&ds, &s, 0.3, &[5.0], 7).unwrap(),
            (),
        );
        assert_eq!(res, 0.0);
    }

    #[test]
    fn weight_concentration_at_component_mean() {
        let ds = toy_dataset();
        let s = make_linear_schedule(10, 0.05, 0.2).unwrap();
        let sigma = 0.05;
        let t = 3;
        let ab = s.alpha_bar(t);
        let sq = ab.fsqrt();
        // x_t exactly at component 1's diffused mean; components far apart
        // relative to sqrt(1 - ab) * sigma.
        let mu1: Vec<f64> = ds.points[1]
            .iter()
            .zip(&ds.targets[1])
            .map(|(x, m)| sq * x + (1.0 - sq) * m)
            .collect();
        let w = component_weights(&ds, &s, sigma, &mu1, t).unwrap();
        assert!(w[1] > 1.0 - 1e-8, "w = {w:?}");
        let out = optimal_denoise(&ds, &s, sigma, &mu1, t).unwrap();
        for (o, m) in out.iter().zip(&ds.targets[1]) {
            assert!((o - m).abs() < 1e-6);
        }
    }

    #[test]
    fn output_in_convex_hull() {
        let ds = toy_dataset();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let mut rng = crate::Rng::from_seed(1);
        for _ in 0..50 {
            let x = rng.standard_normal_vec(2);
            let out = optimal_denoise(&ds, &s, 0.5, &x, 5).unwrap();
            for c in 0..2 {
                let lo = ds.targets.iter().map(|t| t[c]).fold(f64::INFINITY, f64::min);
                let hi = ds.targets.iter().map(|t| t[c]).fold(f64::NEG_INFINITY, f64::max);
                assert!(out[c] >= lo - 1e-12 && out[c] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn huge_variance_limit_is_plain_average() {
        let ds = toy_dataset();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let out = optimal_denoise(&ds, &s, 1e6, &[0.7, -0.3], 5).unwrap();
        let avg: Vec<f64> = (0..2)
            .map(|c| ds.targets.iter().map(|t| t[c]).sum::<f64>() / 2.0)
            .collect();
        for (o, a) in out.iter().zip(&avg) {
            assert!((o - a).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_variance_rejected() {
        let ds = toy_dataset();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        assert_eq!(
            optimal_denoise(&ds, &s, 0.0, &[0.0, 0.0], 5),
            Err(Error::DegenerateVariance)
        );
    }

    #[test]
    fn convexity_probe() {
        let ds = toy_dataset();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let mut rng = crate::Rng::from_seed(5);
        for _ in 0..20 {
            let x = rng.standard_normal_vec(2);
            let out = optimal_denoise(&ds, &s, 0.4, &x, 6).unwrap();
            let base = denoise_loss_at(&ds, &s, 0.4, &x, 6, &out).unwrap();
            let dir = rng.standard_normal_vec(2);
            let norm: f64 = dir.iter().map(|d| d * d).sum::<f64>().fsqrt();
            let pert: Vec<f64> = out
                .iter()
                .zip(&dir)
                .map(|(o, d)| o + 1e-2 * d / norm)
                .collect();
            let bumped = denoise_loss_at(&ds, &s, 0.4, &x, 6, &pert).unwrap();
            assert!(bumped > base, "convexity violated: {bumped} <= {base}");
        }
    }

    #[test]
    fn teacher_single_gaussian_closed_form() {
        let gm = GaussianMixture::new(vec![vec![0.0, 0.0]], 0.0).unwrap();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let t = 6;
        let ab = s.alpha_bar(t);
        let x = vec![0.8, -0.4];
        let out = gmm_teacher_denoise(&gm, &s, &x, t).unwrap();
        for (o, xi) in out.iter().zip(&x) {
            assert!((o - xi / (1.0 - ab).fsqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn teacher_symmetric_mixture_at_origin() {
        let gm = GaussianMixture::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], 0.05).unwrap();
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let out = gmm_teacher_denoise(&gm, &s, &[0.0, 0.0], 4).unwrap();
        assert!(out[0].abs() < 1e-12);
        assert!(out[1].abs() < 1e-12);
    }

    #[test]
    fn teacher_score_matches_finite_difference() {
        let gm = GaussianMixture::new(vec![vec![-0.8], vec![0.6]], 0.04).unwrap();
        let s = make_linear_schedule(12, 0.05, 0.4).unwrap();
        let t = 7;
        let ab = s.alpha_bar(t);
        let h = 1e-5;
        for x in [-1.5, -0.3, 0.2, 1.1] {
            let lp = |v: f64| gm.diffused_log_density(&s, &[v], t).unwrap();
            let fd_score = (lp(x + h) - lp(x - h)) / (2.0 * h);
            let out = gmm_teacher_denoise(&gm, &s, &[x], t).unwrap();
            let implied_score = -out[0] / (1.0 - ab).fsqrt();
            assert!(
                (fd_score - implied_score).abs() < 1e-4,
                "x={x}: fd={fd_score} vs {implied_score}"
            );
        }
    }
}
