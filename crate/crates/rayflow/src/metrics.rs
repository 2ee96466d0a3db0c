//! Sample-quality metrics on small point clouds: exact optimal-assignment
//! Wasserstein-2 and RBF maximum mean discrepancy.

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};

/// Exact assignment is limited to this many points per side.
pub const W2_SIZE_CAP: usize = 512;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Wasserstein-2 between two equally sized empirical distributions:
/// the square root of the optimal-assignment mean squared distance.
pub fn wasserstein2(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() > W2_SIZE_CAP {
        return Err(Error::SizeCap {
            size: a.len(),
            cap: W2_SIZE_CAP,
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|p| b.iter().map(|q| sq_dist(p, q)).collect())
        .collect();
    let (_, total) = min_cost_assignment(&cost);
    Ok((total / a.len() as f64).sqrt())
}

/// Unbiased-flavour MMD^2 with a Gaussian kernel whose bandwidth is the
/// median pairwise distance over the pooled samples (median heuristic).
/// Returns the (possibly slightly negative) squared statistic.
pub fn mmd_rbf(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let pooled: Vec<&Vec<f64>> = a.iter().chain(b.iter()).collect();
    let mut dists = Vec::new();
    for i in 0..pooled.len() {
        for j in (i + 1)..pooled.len() {
            dists.push(sq_dist(pooled[i], pooled[j]).sqrt());
        }
    }
    dists.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = dists[dists.len() / 2].max(1e-12);
    let gamma = 1.0 / (2.0 * median * median);
    let k = |x: &[f64], y: &[f64]| (-gamma * sq_dist(x, y)).exp();

    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut kxx = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                kxx += k(&a[i], &a[j]);
            }
        }
    }
    let mut kyy = 0.0;
    for i in 0..b.len() {
        for j in 0..b.len() {
            if i != j {
                kyy += k(&b[i], &b[j]);
            }
        }
    }
    let mut kxy = 0.0;
    for x in a {
        for y in b {
            kxy += k(x, y);
        }
    }
    let txx = if a.len() > 1 { kxx / (n * (n - 1.0)) } else { 0.0 };
    let tyy = if b.len() > 1 { kyy / (m * (m - 1.0)) } else { 0.0 };
    txx + tyy - 2.0 * kxy / (n * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayflow_core::Rng;

    fn cloud(rng: &mut Rng, n: usize, shift: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| vec![shift + rng.standard_normal(), rng.standard_normal()])
            .collect()
    }

    #[test]
    fn w2_zero_on_identical_sets() {
        let mut rng = Rng::from_seed(1);
        let a = cloud(&mut rng, 32, 0.0);
        assert!(wasserstein2(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn w2_translation_is_shift_norm() {
        let mut rng = Rng::from_seed(2);
        let a = cloud(&mut rng, 24, 0.0);
        let c = [0.7, -1.1];
        let b: Vec<Vec<f64>> = a
            .iter()
            .map(|p| p.iter().zip(&c).map(|(x, s)| x + s).collect())
            .collect();
        let w = wasserstein2(&a, &b).unwrap();
        let norm = (c[0] * c[0] + c[1] * c[1]).sqrt();
        assert!((w - norm).abs() < 1e-9, "{w} vs {norm}");
    }

    #[test]
    fn w2_size_checks() {
        let a = vec![vec![0.0, 0.0]];
        let b = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(
            wasserstein2(&a, &b),
            Err(Error::SizeMismatch { .. })
        ));
        let big = vec![vec![0.0, 0.0]; W2_SIZE_CAP + 1];
        assert!(matches!(
            wasserstein2(&big, &big),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn w2_symmetry_and_triangle_inequality() {
        let mut rng = Rng::from_seed(3);
        for _ in 0..20 {
            let a = cloud(&mut rng, 16, 0.0);
            let b = cloud(&mut rng, 16, 0.5);
            let c = cloud(&mut rng, 16, -0.5);
            let ab = wasserstein2(&a, &b).unwrap();
            let ba = wasserstein2(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-9);
            let ac = wasserstein2(&a, &c).unwrap();
            let cb = wasserstein2(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-9);
        }
    }

    #[test]
    fn mmd_separates_shifted_clouds() {
        let mut rng = Rng::from_seed(4);
        let a = cloud(&mut rng, 100, 0.0);
        let b = cloud(&mut rng, 100, 0.0);
        let far = cloud(&mut rng, 100, 4.0);
        let near = mmd_rbf(&a, &b);
        let apart = mmd_rbf(&a, &far);
        assert!(near.abs() < 0.05, "near {near}");
        assert!(apart > 10.0 * near.abs().max(1e-6), "apart {apart}");
    }
}
