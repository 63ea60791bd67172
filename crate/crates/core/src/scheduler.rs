//! When and how far to grow each layer's effective modes.
//!
//! Two rules are provided. The frequency rule keeps the smallest `K` whose
//! lowest modes carry at least a fraction `alpha` of the layer's total
//! spectral strength (measured over the `K + b` retained modes). The loss
//! rule grows every layer by a fixed step once the training loss has stopped
//! improving for `loss_patience` epochs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::model::FnoModel;
use crate::spectral::{expand_weights, frequency_strength};
use crate::train::AdamState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerVariant {
    Frequency,
    Loss,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedulerConfig {
    pub variant: SchedulerVariant,
    /// Fraction of spectral strength the effective modes must explain.
    pub alpha: f64,
    /// Epochs between frequency checks.
    pub check_interval: usize,
    /// Relative improvement below which an epoch counts as stalled.
    pub loss_epsilon: f64,
    pub loss_patience: usize,
    /// Modes added per axis when the loss rule fires.
    pub loss_step: usize,
    /// Cap on effective modes; `None` means `grid/2 − b` per axis.
    pub max_modes: Option<usize>,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            variant: SchedulerVariant::Frequency,
            alpha: 0.99,
            check_interval: 1,
            loss_epsilon: 0.001,
            loss_patience: 5,
            loss_step: 1,
            max_modes: None,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return arg_err(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.loss_epsilon >= 0.0) {
            return arg_err("loss_epsilon must be non-negative");
        }
        if self.loss_patience == 0 || self.loss_step == 0 || self.check_interval == 0 {
            return arg_err("loss_patience, loss_step and check_interval must be at least 1");
        }
        Ok(())
    }

    /// Per-axis cap on effective modes for a grid with the given extents.
    pub fn caps(&self, grid: &[usize], buffer: usize) -> Vec<usize> {
        grid.iter()
            .map(|&n| {
                let by_grid = n.saturating_sub(buffer);
                let cap = self.max_modes.unwrap_or((n / 2).saturating_sub(buffer));
                cap.min(by_grid).max(1)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedulerState {
    /// Effective modes per layer, per axis.
    pub modes: Vec<Vec<usize>>,
    pub caps: Vec<usize>,
    /// Layers/axes that wanted to grow past their cap.
    pub saturated: Vec<Vec<bool>>,
    pub best_loss: Option<f64>,
    pub epochs_since_improvement: usize,
}

impl SchedulerState {
    pub fn new(model: &FnoModel, caps: Vec<usize>) -> Self {
        let modes = model.model_modes();
        let saturated = modes.iter().map(|m| vec![false; m.len()]).collect();
        Self { modes, caps, saturated, best_loss: None, epochs_since_improvement: 0 }
    }
}

/// One (layer, axis) row of a scheduler check.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCheck {
    pub epoch: usize,
    pub layer: usize,
    pub dim: usize,
    pub k_before: usize,
    pub k_after: usize,
    /// Explanation ratio at `k_before`; `None` for an all-zero spectrum.
    pub ratio: Option<f64>,
}

/// Requested new effective modes for one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub layer: usize,
    pub new_modes: Vec<usize>,
}

/// Share of the total strength carried by the first `k` entries.
pub fn explanation_ratio(s: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > s.len() {
        return arg_err(format!("k = {k} outside 1..={}", s.len()));
    }
    let total: f64 = s.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(s[..k].iter().sum::<f64>() / total)
}

/// Smallest `K ≥ k_prev` with `explanation_ratio(s, K) ≥ alpha`, at most `s.len()`.
pub fn find_min_modes(s: &[f64], alpha: f64, k_prev: usize) -> usize {
    let total: f64 = s.iter().sum();
    if total <= 0.0 || k_prev == 0 || k_prev > s.len() {
        return k_prev;
    }
    let mut k = k_prev;
    let mut head: f64 = s[..k].iter().sum();
    while k < s.len() && head / total < alpha {
        head += s[k];
        k += 1;
    }
    k
}

/// Measures every layer's spectrum, grows the layers whose effective modes no
/// longer explain `alpha` of it, and keeps the optimizer moments aligned.
pub fn step_frequency_based(
    model: &mut FnoModel,
    state: &mut SchedulerState,
    cfg: &SchedulerConfig,
    adam: &mut AdamState,
    rng: &mut ChaCha8Rng,
    epoch: usize,
) -> Result<Vec<ModeCheck>> {
    let mut checks = Vec::new();
    let mut expansions = Vec::new();
    for (layer, block) in model.blocks.iter().enumerate() {
        let spectrum = frequency_strength(&block.spectral);
        let current = block.spectral.effective_modes().to_vec();
        let mut wanted = current.clone();
        for (dim, s) in spectrum.strengths.iter().enumerate() {
            let k_prev = current[dim];
            let ratio = explanation_ratio(s, k_prev).ok();
            let mut k = find_min_modes(s, cfg.alpha, k_prev);
            let cap = state.caps[dim].max(k_prev);
            if k > cap {
                k = cap;
                state.saturated[layer][dim] = true;
            }
            wanted[dim] = k;
            checks.push(ModeCheck { epoch, layer, dim, k_before: k_prev, k_after: k, ratio });
        }
        if wanted != current {
            expansions.push(Expansion { layer, new_modes: wanted });
        }
    }
    apply_expansions(model, state, adam, &expansions, rng)?;
    Ok(checks)
}

/// Tracks the best loss so far and requests a uniform `loss_step` growth of
/// every layer once the relative improvement stays below `loss_epsilon` for
/// `loss_patience` consecutive epochs.
pub fn step_loss_based(state: &mut SchedulerState, epoch_loss: f64, cfg: &SchedulerConfig) -> Vec<Expansion> {
    let Some(best) = state.best_loss else {
        state.best_loss = Some(epoch_loss);
        return Vec::new();
    };
    let improvement = if best > 0.0 { (best - epoch_loss) / best } else { 0.0 };
    if improvement < cfg.loss_epsilon {
        state.epochs_since_improvement += 1;
    } else {
        state.epochs_since_improvement = 0;
    }
    if epoch_loss < best {
        state.best_loss = Some(epoch_loss);
    }
    if state.epochs_since_improvement < cfg.loss_patience {
        return Vec::new();
    }
    state.epochs_since_improvement = 0;
    let mut out = Vec::new();
    for (layer, modes) in state.modes.iter().enumerate() {
        let mut new_modes = modes.clone();
        for (dim, k) in new_modes.iter_mut().enumerate() {
            let cap = state.caps[dim].max(*k);
            let grown = *k + cfg.loss_step;
            if grown > cap {
                state.saturated[layer][dim] = true;
            }
            *k = grown.min(cap);
        }
        if &new_modes != modes {
            out.push(Expansion { layer, new_modes });
        }
    }
    out
}

/// Grows spectral weights (new entries at the model's `init_scale`) and the
/// matching Adam moments, then records the new modes in `state`.
pub fn apply_expansions(
    model: &mut FnoModel,
    state: &mut SchedulerState,
    adam: &mut AdamState,
    expansions: &[Expansion],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let scale = model.config.init_scale;
    for e in expansions {
        let Some(block) = model.blocks.get(e.layer) else {
            return arg_err(format!("no layer {}", e.layer));
        };
        let grown = expand_weights(&block.spectral, &e.new_modes, scale, rng)?;
        let shape = grown.weights().shape().to_vec();
        model.set_spectral(e.layer, grown)?;
        adam.grow(&format!("blocks.{}.spectral", e.layer), &shape)?;
        state.modes[e.layer] = e.new_modes.clone();
    }
    Ok(())
}

/// Scheduler bound to one training run: config, state, and its own RNG for
/// initializing new modes.
pub struct Scheduler {
    pub config: SchedulerConfig,
    pub state: SchedulerState,
    rng: ChaCha8Rng,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig, model: &FnoModel, grid: &[usize], seed: u64) -> Result<Self> {
        config.validate()?;
        let caps = config.caps(grid, model.config.buffer);
        let state = SchedulerState::new(model, caps);
        Ok(Self { config, state, rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5c4e_d011_e000) })
    }

    /// Runs the configured rule after epoch `epoch` (0-based). Returns one
    /// row per layer and axis whenever a check happens.
    pub fn on_epoch_end(
        &mut self,
        epoch: usize,
        train_loss: f64,
        model: &mut FnoModel,
        adam: &mut AdamState,
    ) -> Result<Vec<ModeCheck>> {
        match self.config.variant {
            SchedulerVariant::Frequency => {
                if !(epoch + 1).is_multiple_of(self.config.check_interval) {
                    return Ok(Vec::new());
                }
                step_frequency_based(model, &mut self.state, &self.config, adam, &mut self.rng, epoch)
            }
            SchedulerVariant::Loss => {
                let before = survey(model, epoch);
                let expansions = step_loss_based(&mut self.state, train_loss, &self.config);
                apply_expansions(model, &mut self.state, adam, &expansions, &mut self.rng)?;
                Ok(with_after(before, model))
            }
            SchedulerVariant::None => Ok(survey(model, epoch)),
        }
    }
}

/// Rows describing the current modes and explanation ratios without changing anything.
pub fn survey(model: &FnoModel, epoch: usize) -> Vec<ModeCheck> {
    let mut rows = Vec::new();
    for (layer, block) in model.blocks.iter().enumerate() {
        let spectrum = frequency_strength(&block.spectral);
        for (dim, s) in spectrum.strengths.iter().enumerate() {
            let k = block.spectral.effective_modes()[dim];
            rows.push(ModeCheck { epoch, layer, dim, k_before: k, k_after: k, ratio: explanation_ratio(s, k).ok() });
        }
    }
    rows
}

fn with_after(mut rows: Vec<ModeCheck>, model: &FnoModel) -> Vec<ModeCheck> {
    for r in rows.iter_mut() {
        r.k_after = model.blocks[r.layer].spectral.effective_modes()[r.dim];
    }
    rows
}
