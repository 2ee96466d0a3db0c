//! Flat key-value configuration files. Unknown keys are errors.
//!
//! ```text
//! # comments and blank lines are ignored
//! schedule.T = 32
//! schedule.beta_min = 0.02
//! schedule.beta_max = 0.45
//! ```

use std::path::Path;

use rayflow_core::schedule::{make_linear_schedule, Schedule};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub t_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            t_steps: 32,
            beta_min: 0.02,
            beta_max: 0.45,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: lineno,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |message: String| Error::Config {
                line: lineno,
                message,
            };
            match key {
                "schedule.T" => {
                    cfg.t_steps = value
                        .parse()
                        .map_err(|e| bad(format!("schedule.T: {e}")))?;
                }
                "schedule.beta_min" => {
                    cfg.beta_min = value
                        .parse()
                        .map_err(|e| bad(format!("schedule.beta_min: {e}")))?;
                }
                "schedule.beta_max" => {
                    cfg.beta_max = value
                        .parse()
                        .map_err(|e| bad(format!("schedule.beta_max: {e}")))?;
                }
                other => {
                    return Err(bad(format!("unknown key `{other}`")));
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Ok(make_linear_schedule(
            self.t_steps,
            self.beta_min,
            self.beta_max,
        )?)
    }
}
