//! Noise schedules and trajectory endpoints.
//!
//! The chain uses the convention `alpha_t^2 + beta_t^2 = 1` with the
//! cumulative signal coefficient `alpha_bar_t = prod_{s<=t} alpha_s^2` and
//! `alpha_bar_0 = 1`, so the `t = 1` reverse transition is deterministic
//! (`beta_tilde_1 = 0`).

use alloc::vec::Vec;

use crate::math::FloatExt;
use crate::{Error, Result};

/// Per-timestep coefficients of a `T`-step chain. Immutable after
/// construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
    beta_tilde: Vec<f64>,
}

/// Which forward trajectory family a point is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// Drift toward the instance target mean: `sqrt(ab_t) x0 + (1 - sqrt(ab_t)) eps_mu + sqrt(1 - ab_t) eps`.
    RayFlow,
    /// Variance preserving: `sqrt(ab_t) x0 + sqrt(1 - ab_t) eps`.
    Vp,
    /// Rectified flow (t rescaled to (0, 1]): `(1 - t/T) x0 + (t/T) eps`.
    Rf,
}

impl Schedule {
    /// Number of timesteps `T`.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t < 1 || t > self.len() {
            return Err(Error::TimestepOutOfRange { t, max: self.len() });
        }
        Ok(())
    }

    /// `alpha_t`, `t` in `[1, T]`.
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    /// `beta_t`, `t` in `[1, T]`.
    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }

    /// `alpha_bar_t = prod_{s<=t} alpha_s^2`; defined as 1 at `t = 0`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    /// Reverse-transition variance coefficient
    /// `beta_tilde_t = (1 - alpha_t^2)(1 - alpha_bar_{t-1}) / (1 - alpha_bar_t)`.
    pub fn beta_tilde(&self, t: usize) -> f64 {
        self.beta_tilde[t - 1]
    }

    /// Validates `t` and returns it, for callers that want the range error.
    pub fn timestep(&self, t: usize) -> Result<usize> {
        self.check_t(t)?;
        Ok(t)
    }

    /// Assembles a schedule from raw coefficient vectors without consistency
    /// checks beyond matching lengths. Exists for verification tooling that
    /// needs to probe deliberately corrupted schedules; normal construction
    /// goes through [`make_linear_schedule`].
    pub fn from_parts(
        alpha: Vec<f64>,
        beta: Vec<f64>,
        alpha_bar: Vec<f64>,
        beta_tilde: Vec<f64>,
    ) -> Result<Self> {
        let n = alpha.len();
        if n == 0 || beta.len() != n || alpha_bar.len() != n || beta_tilde.len() != n {
            return Err(Error::InvalidSchedule("coefficient vectors must share a nonzero length"));
        }
        Ok(Schedule {
            alpha,
            beta,
            alpha_bar,
            beta_tilde,
        })
    }
}

/// Builds a schedule with `beta_t^2` linearly interpolated from
/// `beta_min^2` to `beta_max^2` and `alpha_t = sqrt(1 - beta_t^2)`.
pub fn make_linear_schedule(t_steps: usize, beta_min: f64, beta_max: f64) -> Result<Schedule> {
    if t_steps == 0 {
        return Err(Error::InvalidSchedule("T must be at least 1"));
    }
    if !(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max {
        return Err(Error::InvalidSchedule("need 0 < beta_min <= beta_max < 1"));
    }
    let (lo, hi) = (beta_min * beta_min, beta_max * beta_max);
    let mut alpha = Vec::with_capacity(t_steps);
    let mut beta = Vec::with_capacity(t_steps);
    let mut alpha_bar = Vec::with_capacity(t_steps);
    let mut beta_tilde = Vec::with_capacity(t_steps);
    let mut cum = 1.0;
    for i in 0..t_steps {
        let frac = if t_steps == 1 {
            0.0
        } else {
            i as f64 / (t_steps - 1) as f64
        };
        let beta_sq = lo + (hi - lo) * frac;
        let alpha_sq = 1.0 - beta_sq;
        let prev_bar = cum;
        cum *= alpha_sq;
        alpha.push(alpha_sq.fsqrt());
        beta.push(beta_sq.fsqrt());
        alpha_bar.push(cum);
        // beta_tilde_1 = 0 because alpha_bar_0 = 1.
        beta_tilde.push(beta_sq * (1.0 - prev_bar) / (1.0 - cum));
    }
    Ok(Schedule {
        alpha,
        beta,
        alpha_bar,
        beta_tilde,
    })
}

/// Evaluates the forward trajectory of `kind` at timestep `t`.
///
/// `t = 0` is accepted as the start-of-chain convention (`alpha_bar_0 = 1`)
/// and returns `x0` for every trajectory family.
pub fn trajectory_point(
    kind: TrajectoryKind,
    sched: &Schedule,
    x0: &[f64],
    eps: &[f64],
    eps_mu: &[f64],
    t: usize,
) -> Result<Vec<f64>> {
    if t > sched.len() {
        return Err(Error::TimestepOutOfRange { t, max: sched.len() });
    }
    if eps.len() != x0.len() || eps_mu.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: if eps.len() != x0.len() { eps.len() } else { eps_mu.len() },
        });
    }
    let out = match kind {
        TrajectoryKind::RayFlow => {
            let ab = sched.alpha_bar(t);
            let (s, n) = (ab.fsqrt(), (1.0 - ab).fsqrt());
            x0.iter()
                .zip(eps_mu)
                .zip(eps)
                .map(|((x, m), e)| s * x + (1.0 - s) * m + n * e)
                .collect()
        }
        TrajectoryKind::Vp => {
            let ab = sched.alpha_bar(t);
            let (s, n) = (ab.fsqrt(), (1.0 - ab).fsqrt());
            x0.iter().zip(eps).map(|(x, e)| s * x + n * e).collect()
        }
        TrajectoryKind::Rf => {
            let tau = t as f64 / sched.len() as f64;
            x0.iter()
                .zip(eps)
                .map(|(x, e)| (1.0 - tau) * x + tau * e)
                .collect()
        }
    };
    Ok(out)
}
