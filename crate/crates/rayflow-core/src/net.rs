//! Tiny feed-forward networks with analytic gradients.
//!
//! Hidden layers use tanh, the output layer is linear. This is deliberately
//! small and smooth so finite-difference gradient verification is cheap and
//! tight.

use alloc::vec::Vec;

use crate::math::FloatExt;
use crate::schedule::Schedule;
use crate::{Error, Result, Rng};

/// MLP parameters. `weights[l]` is row-major `dims[l+1] x dims[l]`;
/// `biases[l]` has length `dims[l+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer parameter gradients, same shapes as the corresponding [`Net`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Net {
    /// Zero-initialized network with the given layer sizes.
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2, "need at least input and output layers");
        let weights = (0..dims.len() - 1)
            .map(|l| alloc::vec![0.0; dims[l + 1] * dims[l]])
            .collect();
        let biases = (0..dims.len() - 1)
            .map(|l| alloc::vec![0.0; dims[l + 1]])
            .collect();
        Net {
            dims: dims.to_vec(),
            weights,
            biases,
        }
    }

    /// Xavier-style random initialization.
    pub fn random(dims: &[usize], rng: &mut Rng) -> Self {
        let mut net = Net::zeros(dims);
        for l in 0..dims.len() - 1 {
            let scale = 1.0 / (dims[l] as f64).fsqrt();
            for w in &mut net.weights[l] {
                *w = scale * rng.standard_normal();
            }
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    /// Forward pass returning all post-activation values per layer
    /// (including the input itself as layer 0).
    fn forward_cached(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.dims.len());
        acts.push(input.to_vec());
        for l in 0..self.layer_count() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let prev = &acts[l];
            let mut out = alloc::vec![0.0; n_out];
            for i in 0..n_out {
                let mut z = self.biases[l][i];
                let row = &self.weights[l][i * n_in..(i + 1) * n_in];
                for (w, x) in row.iter().zip(prev) {
                    z += w * x;
                }
                out[i] = if l < self.layer_count() - 1 { z.ftanh() } else { z };
            }
            acts.push(out);
        }
        Ok(acts)
    }

    /// Standard MLP forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.pop().unwrap())
    }

    /// Analytic parameter gradients via reverse accumulation, for loss
    /// gradient `loss_grad = dL/d(output)`.
    pub fn backward(&self, input: &[f64], loss_grad: &[f64]) -> Result<Grads> {
        if loss_grad.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: loss_grad.len(),
            });
        }
        let acts = self.forward_cached(input)?;
        let mut grads = Grads {
            weights: self
                .weights
                .iter()
                .map(|w| alloc::vec![0.0; w.len()])
                .collect(),
            biases: self
                .biases
                .iter()
                .map(|b| alloc::vec![0.0; b.len()])
                .collect(),
        };
        // delta = dL/dz for the current layer.
        let mut delta: Vec<f64> = loss_grad.to_vec();
        for l in (0..self.layer_count()).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let prev = &acts[l];
            for i in 0..n_out {
                grads.biases[l][i] = delta[i];
                let row = &mut grads.weights[l][i * n_in..(i + 1) * n_in];
                for (g, x) in row.iter_mut().zip(prev) {
                    *g = delta[i] * x;
                }
            }
            if l > 0 {
                let mut next = alloc::vec![0.0; n_in];
                for i in 0..n_out {
                    let row = &self.weights[l][i * n_in..(i + 1) * n_in];
                    for (n, w) in next.iter_mut().zip(row) {
                        *n += delta[i] * w;
                    }
                }
                // Through tanh: a = tanh(z), da/dz = 1 - a^2.
                for (n, a) in next.iter_mut().zip(&acts[l]) {
                    *n *= 1.0 - a * a;
                }
                delta = next;
            }
        }
        Ok(grads)
    }

    /// Flattened view of all parameters, for checksums and serialization.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }
}

/// Plain gradient descent step; `lr = 0` leaves the network unchanged.
pub fn sgd_step(net: &mut Net, grads: &Grads, lr: f64) {
    for (w, g) in net.weights.iter_mut().zip(&grads.weights) {
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= lr * gi;
        }
    }
    for (b, g) in net.biases.iter_mut().zip(&grads.biases) {
        for (bi, gi) in b.iter_mut().zip(g) {
            *bi -= lr * gi;
        }
    }
}

/// AdamW with bias-corrected moments and decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: u64,
    m: Option<Grads>,
    v: Option<Grads>,
}

impl AdamW {
    pub fn new(lr: f64) -> Self {
        AdamW {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
            step: 0,
            m: None,
            v: None,
        }
    }

    pub fn step(&mut self, net: &mut Net, grads: &Grads) {
        if self.m.is_none() {
            let zero = Grads {
                weights: grads.weights.iter().map(|w| alloc::vec![0.0; w.len()]).collect(),
                biases: grads.biases.iter().map(|b| alloc::vec![0.0; b.len()]).collect(),
            };
            self.m = Some(zero.clone());
            self.v = Some(zero);
        }
        self.step += 1;
        let t = self.step as i32;
        let (bc1, bc2) = (
            1.0 - self.beta1.fpowi(t),
            1.0 - self.beta2.fpowi(t),
        );
        let m = self.m.as_mut().unwrap();
        let v = self.v.as_mut().unwrap();
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64, decay: f64| {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let mhat = *m / bc1;
            let vhat = *v / bc2;
            *p -= self.lr * (mhat / (vhat.fsqrt() + self.eps) + decay * *p);
        };
        for l in 0..net.weights.len() {
            for i in 0..net.weights[l].len() {
                update(
                    &mut net.weights[l][i],
                    grads.weights[l][i],
                    &mut m.weights[l][i],
                    &mut v.weights[l][i],
                    self.weight_decay,
                );
            }
            for i in 0..net.biases[l].len() {
                update(
                    &mut net.biases[l][i],
                    grads.biases[l][i],
                    &mut m.biases[l][i],
                    &mut v.biases[l][i],
                    0.0,
                );
            }
        }
    }
}

/// Deterministic time features fed to every network:
/// `[t/T, sin(2 pi t/T), cos(2 pi t/T), sqrt(alpha_bar_t)]`.
pub const TIME_EMBED_DIM: usize = 4;

pub fn time_embedding(sched: &Schedule, t: usize) -> Vec<f64> {
    let tau = t as f64 / sched.len() as f64;
    let ang = 2.0 * core::f64::consts::PI * tau;
    alloc::vec![tau, ang.fsin(), ang.fcos(), sched.alpha_bar(t).fsqrt()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::make_linear_schedule;
    use alloc::vec;

    #[test]
    fn zero_net_outputs_zero() {
        let net = Net::zeros(&[3, 4, 2]);
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_linear_layer() {
        let mut net = Net::zeros(&[2, 2]);
        net.weights[0] = vec![1.0, 0.0, 0.0, 1.0];
        assert_eq!(net.forward(&[0.3, -0.7]).unwrap(), vec![0.3, -0.7]);
    }

    #[test]
    fn outputs_finite() {
        let mut rng = Rng::from_seed(1);
        let net = Net::random(&[5, 16, 16, 3], &mut rng);
        let out = net.forward(&rng.standard_normal_vec(5)).unwrap();
        assert!(out.iter().all(|v| v.is_finite()));
    }

    fn flat_params(net: &Net) -> Vec<f64> {
        let mut p = Vec::new();
        for l in 0..net.weights.len() {
            p.extend_from_slice(&net.weights[l]);
            p.extend_from_slice(&net.biases[l]);
        }
        p
    }

    fn set_flat(net: &mut Net, p: &[f64]) {
        let mut k = 0;
        for l in 0..net.weights.len() {
            for w in net.weights[l].iter_mut() {
                *w = p[k];
                k += 1;
            }
            for b in net.biases[l].iter_mut() {
                *b = p[k];
                k += 1;
            }
        }
    }

    /// Central finite differences over every parameter.
    fn fd_check(dims: &[usize], seed: u64) -> f64 {
        let mut rng = Rng::from_seed(seed);
        let net = Net::random(dims, &mut rng);
        let input = rng.standard_normal_vec(dims[0]);
        let target = rng.standard_normal_vec(*dims.last().unwrap());
        let loss = |n: &Net| -> f64 {
            let out = n.forward(&input).unwrap();
            out.iter().zip(&target).map(|(o, t)| (o - t) * (o - t)).sum()
        };
        let out = net.forward(&input).unwrap();
        let loss_grad: Vec<f64> = out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t)).collect();
        let grads = net.backward(&input, &loss_grad).unwrap();
        let analytic = flat_params(&Net {
            dims: net.dims.clone(),
            weights: grads.weights,
            biases: grads.biases,
        });
        let base = flat_params(&net);
        let h = 1e-5;
        let mut max_rel = 0.0f64;
        for k in 0..base.len() {
            let mut plus = base.clone();
            plus[k] += h;
            let mut minus = base.clone();
            minus[k] -= h;
            let mut np = net.clone();
            set_flat(&mut np, &plus);
            let mut nm = net.clone();
            set_flat(&mut nm, &minus);
            let fd = (loss(&np) - loss(&nm)) / (2.0 * h);
            let denom = fd.abs().max(analytic[k].abs()).max(1e-6);
            max_rel = max_rel.max((fd - analytic[k]).abs() / denom);
        }
        max_rel
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (dims, seed) in [
            (&[2, 8, 1][..], 3),
            (&[4, 8, 8, 2][..], 4),
            (&[6, 16, 16, 2][..], 5),
        ] {
            let err = fd_check(dims, seed);
            assert!(err < 1e-4, "dims {dims:?}: max rel err {err}");
        }
    }

    #[test]
    fn zero_loss_grad_zero_param_grads() {
        let mut rng = Rng::from_seed(2);
        let net = Net::random(&[3, 8, 2], &mut rng);
        let g = net.backward(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(g.weights.iter().flatten().all(|v| *v == 0.0));
        assert!(g.biases.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_linearity() {
        let mut rng = Rng::from_seed(6);
        let net = Net::random(&[3, 8, 2], &mut rng);
        let input = rng.standard_normal_vec(3);
        let lg = rng.standard_normal_vec(2);
        let scaled: Vec<f64> = lg.iter().map(|v| 2.5 * v).collect();
        let g1 = net.backward(&input, &lg).unwrap();
        let g2 = net.backward(&input, &scaled).unwrap();
        for (a, b) in g1.weights.iter().flatten().zip(g2.weights.iter().flatten()) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lr_zero_is_identity() {
        let mut rng = Rng::from_seed(7);
        let net = Net::random(&[2, 4, 1], &mut rng);
        let mut copy = net.clone();
        let g = net.backward(&[1.0, 1.0], &[1.0]).unwrap();
        sgd_step(&mut copy, &g, 0.0);
        assert_eq!(copy, net);
    }

    #[test]
    fn quadratic_toy_converges() {
        // Single linear weight fitting y = 3x; exact quadratic loss.
        let mut net = Net::zeros(&[1, 1]);
        let mut opt = AdamW::new(1e-2);
        for _ in 0..10_000 {
            let out = net.forward(&[1.0]).unwrap();
            let g = net.backward(&[1.0], &[2.0 * (out[0] - 3.0)]).unwrap();
            opt.step(&mut net, &g);
            if (net.forward(&[1.0]).unwrap()[0] - 3.0).abs() < 1e-6 {
                return;
            }
        }
        let out = net.forward(&[1.0]).unwrap()[0];
        // AdamW's weight decay biases the fixed point slightly below 3.
        assert!((out - 3.0).abs() < 1e-2, "converged to {out}");
    }

    #[test]
    fn deterministic_training() {
        let run = || {
            let mut rng = Rng::from_seed(9);
            let mut net = Net::random(&[2, 8, 1], &mut rng);
            let mut opt = AdamW::new(1e-3);
            for _ in 0..200 {
                let x = rng.standard_normal_vec(2);
                let out = net.forward(&x).unwrap();
                let g = net.backward(&x, &[2.0 * (out[0] - x[0])]).unwrap();
                opt.step(&mut net, &g);
            }
            net
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn training_loss_nonincreasing_small_lr() {
        let mut rng = Rng::from_seed(12);
        let mut net = Net::random(&[2, 8, 1], &mut rng);
        let batch: Vec<(Vec<f64>, f64)> = (0..16)
            .map(|_| {
                let x = rng.standard_normal_vec(2);
                let y = x[0] * 0.5 - x[1];
                (x, y)
            })
            .collect();
        let loss = |n: &Net| -> f64 {
            batch
                .iter()
                .map(|(x, y)| {
                    let o = n.forward(x).unwrap()[0];
                    (o - y) * (o - y)
                })
                .sum::<f64>()
                / batch.len() as f64
        };
        let mut prev = loss(&net);
        for _ in 0..100 {
            let mut acc: Option<Grads> = None;
            for (x, y) in &batch {
                let o = net.forward(x).unwrap()[0];
                let g = net.backward(x, &[2.0 * (o - y) / batch.len() as f64]).unwrap();
                acc = Some(match acc {
                    None => g,
                    Some(mut a) => {
                        for (aw, gw) in a.weights.iter_mut().zip(&g.weights) {
                            for (ai, gi) in aw.iter_mut().zip(gw) {
                                *ai += gi;
                            }
                        }
                        for (ab, gb) in a.biases.iter_mut().zip(&g.biases) {
                            for (ai, gi) in ab.iter_mut().zip(gb) {
                                *ai += gi;
                            }
                        }
                        a
                    }
                });
            }
            sgd_step(&mut net, &acc.unwrap(), 1e-3);
            let cur = loss(&net);
            assert!(cur <= prev + 1e-12, "loss increased: {prev} -> {cur}");
            prev = cur;
        }
    }

    #[test]
    fn time_embedding_shape() {
        let s = make_linear_schedule(10, 0.05, 0.4).unwrap();
        let e = time_embedding(&s, 10);
        assert_eq!(e.len(), TIME_EMBED_DIM);
        assert!((e[0] - 1.0).abs() < 1e-15);
        assert!((e[3] - s.alpha_bar(10).fsqrt()).abs() < 1e-15);
    }
}
