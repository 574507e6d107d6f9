//! Projected subgradient training of a sieve network.

use super::project::project_net_in_place;
use super::{loss_and_grad, Gradient, SieveNetwork};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Configuration for one projected-subgradient run.
///
/// The step size at iteration `k` (starting at 1) is
/// `step_base / ln(e + k)`, a diminishing schedule that keeps the method
/// convergent without tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub step_base: f64,
    pub seed: u64,
    /// Half-width of the uniform weight initialization.
    pub init_scale: f64,
    /// Return the lowest-loss iterate seen (including the initial one)
    /// instead of the last. Subgradient descent is not monotone, and the
    /// hypothesis test needs the best-iterate guarantee for nesting.
    pub track_best: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 3000,
            step_base: 0.1,
            seed: 0,
            init_scale: 0.5,
            track_best: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !self.step_base.is_finite() || self.step_base <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "step_base must be finite and > 0, got {}",
                self.step_base
            )));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "init_scale must be finite and >= 0, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// Run projected subgradient descent from `init` and return the selected
/// network with its loss.
///
/// Each iteration takes a gradient step with the diminishing step size and
/// projects back onto the ℓ1 budget set, so every iterate (including the
/// returned one) is feasible. With `track_best` the returned loss never
/// exceeds `mse(init, data)`. Deterministic given `(data, config, init)`.
pub fn train(
    data: &Dataset,
    config: &TrainConfig,
    init: SieveNetwork,
) -> Result<(SieveNetwork, f64)> {
    config.validate()?;
    if init.d() != data.d() {
        return Err(Error::DimensionMismatch(format!(
            "initial network has d = {}, data has d = {}",
            init.d(),
            data.d()
        )));
    }
    if !init.is_feasible() {
        return Err(Error::InvalidConfig(
            "initial network violates the l1 budgets".into(),
        ));
    }

    let mut w = init;
    let mut grad = Gradient::zeros_like(&w);
    let mut sig = vec![0.0; w.r()];
    let mut block = Vec::new();
    let mut scratch = Vec::new();
    let mut best = w.clone();
    let mut best_loss = f64::INFINITY;

    for k in 1..=config.iterations {
        // Loss of the current iterate comes out of the fused pass, so every
        // iterate (the initial one included) is a best-iterate candidate.
        let loss = loss_and_grad(&w, data, &mut grad, &mut sig);
        if config.track_best && loss < best_loss {
            best_loss = loss;
            best.clone_from(&w);
        }
        let step = config.step_base / (std::f64::consts::E + k as f64).ln();
        w.apply_step(&grad, step);
        w.check_finite()?;
        project_net_in_place(&mut w, &mut block, &mut scratch);
    }

    let final_loss = w.mse(data)?;
    if !config.track_best || final_loss < best_loss {
        Ok((w, final_loss))
    } else {
        Ok((best, best_loss))
    }
}
