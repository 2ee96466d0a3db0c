//! Synthetic 2d datasets, reproducible from `(name, n, seed)`.

use std::f64::consts::PI;

use rayflow_core::denoiser::GaussianMixture;
use rayflow_core::Rng;

use crate::error::{Error, Result};

pub const GAUSS8_STD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub name: String,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
}

/// The eight-mode mixture behind `gauss8`: modes on the unit circle,
/// isotropic component std [`GAUSS8_STD`].
pub fn gauss8_mixture() -> GaussianMixture {
    let means = (0..8)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / 8.0;
            vec![theta.cos(), theta.sin()]
        })
        .collect();
    GaussianMixture::new(means, GAUSS8_STD * GAUSS8_STD).expect("static mixture")
}

pub fn gen_dataset(name: &str, n: usize, seed: u64) -> Result<SyntheticDataset> {
    let mut rng = Rng::from_seed(seed);
    let points = match name {
        "gauss8" => {
            let gmm = gauss8_mixture();
            (0..n)
                .map(|_| {
                    let k = rng.index(8);
                    gmm.means[k]
                        .iter()
                        .map(|m| m + GAUSS8_STD * rng.standard_normal())
                        .collect()
                })
                .collect()
        }
        "two_moons" => (0..n)
            .map(|_| {
                let theta = PI * rng.uniform();
                let (x, y) = if rng.index(2) == 0 {
                    (theta.cos(), theta.sin() - 0.25)
                } else {
                    (1.0 - theta.cos(), 0.25 - theta.sin())
                };
                vec![
                    x - 0.5 + GAUSS8_STD * rng.standard_normal(),
                    y + GAUSS8_STD * rng.standard_normal(),
                ]
            })
            .collect(),
        "ring" => (0..n)
            .map(|_| {
                let theta = 2.0 * PI * rng.uniform();
                let r = 1.0 + GAUSS8_STD * rng.standard_normal();
                vec![r * theta.cos(), r * theta.sin()]
            })
            .collect(),
        other => return Err(Error::UnknownDataset(other.to_string())),
    };
    Ok(SyntheticDataset {
        name: name.to_string(),
        n,
        seed,
        points,
    })
}
