//! Core algorithms for RayFlow-style diffusion distillation on small,
//! dense vectors.
//!
//! The crate is organised around a Gaussian Markov chain that drifts each
//! sample toward an instance-specific target distribution `N(eps_mu, sigma^2 I)`
//! instead of a shared standard normal:
//!
//! * [`schedule`] — noise schedules and the coefficient algebra shared by
//!   every chain computation,
//! * [`gaussian`] — isotropic-Gaussian primitives and Monte-Carlo helpers,
//! * [`chain`] — forward/backward transitions, backward marginals, path
//!   probabilities and the optimal chain parameters,
//! * [`denoiser`] — the closed-form optimal denoiser over a finite dataset
//!   and a Gaussian-mixture teacher,
//! * [`net`] — a tiny MLP with analytic gradients,
//! * [`time_sampler`] — importance sampling over timesteps and the SVGD
//!   particle system,
//! * [`distill`] — the distillation pipeline and the few-step / one-step
//!   samplers.
//!
//! Everything is `f64`, deterministic under a fixed seed, and `no_std`
//! compatible (allocation is required).

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chain;
pub mod denoiser;
pub mod distill;
mod error;
pub mod gaussian;
mod math;
pub mod net;
pub mod rng;
pub mod schedule;
pub mod time_sampler;

pub use error::{Error, Result};
pub use rng::Rng;
