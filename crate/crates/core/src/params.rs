//! Model configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Iterations dropped from metric computation unless configured otherwise.
pub const DEFAULT_BURN_IN: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter `{name}`: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: String,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, reason: impl Into<String>) -> Self {
        ParamError {
            name,
            reason: reason.into(),
        }
    }
}

/// Configuration of a single simulation run.
///
/// `alpha` is the trendiness boost applied to each item's last visibility
/// change, `n` the fixed number of competing items and `c` the noise-size
/// parameter (larger `c` means smaller noise). `iterations` counts every
/// row of the trace, including the two initialization rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub n: usize,
    pub c: f64,
    pub iterations: usize,
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

pub fn default_burn_in_for(iterations: usize) -> usize {
    DEFAULT_BURN_IN.min(iterations.saturating_sub(2))
}

impl ModelParams {
    /// Builds a validated parameter set with the default burn-in, shortened
    /// on short runs so at least one transition remains to measure.
    pub fn new(alpha: f64, n: usize, c: f64, iterations: usize, seed: u64) -> Result<Self, ParamError> {
        let burn_in = default_burn_in_for(iterations);
        Self::with_burn_in(alpha, n, c, iterations, seed, burn_in)
    }

    pub fn with_burn_in(
        alpha: f64,
        n: usize,
        c: f64,
        iterations: usize,
        seed: u64,
        burn_in: usize,
    ) -> Result<Self, ParamError> {
        let params = ModelParams {
            alpha,
            n,
            c,
            iterations,
            seed,
            burn_in,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(ParamError::new(
                "alpha",
                format!("must be finite and >= 0, got {}", self.alpha),
            ));
        }
        if self.n < 2 {
            return Err(ParamError::new("n", format!("must be >= 2, got {}", self.n)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ParamError::new("c", format!("must be finite and > 0, got {}", self.c)));
        }
        if self.iterations < 2 {
            return Err(ParamError::new(
                "iterations",
                format!("must be >= 2, got {}", self.iterations),
            ));
        }
        if self.burn_in >= self.iterations {
            return Err(ParamError::new(
                "burn_in",
                format!("must be < iterations ({}), got {}", self.iterations, self.burn_in),
            ));
        }
        Ok(())
    }

    /// Standard deviation of the per-item, per-step noise.
    pub fn noise_sigma(&self) -> f64 {
        noise_sigma(self.n, self.c)
    }
}

/// `1 / (n * sqrt(c))`, i.e. the square root of the noise variance `1 / (c n^2)`.
pub fn noise_sigma(n: usize, c: f64) -> f64 {
    1.0 / (n as f64 * c.sqrt())
}
