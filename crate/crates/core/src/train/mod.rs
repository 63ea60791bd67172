//! Training loop: relative L2 loss, Adam, the step schedule and the mode scheduler.

pub mod adam;

pub use adam::{adam_step, lr_at, AdamState, Moments};

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Gradients;
use crate::data::Dataset;
use crate::error::{arg_err, Error, Result};
use crate::model::{FnoModel, Scaling};
use crate::scheduler::{ModeCheck, Scheduler, SchedulerConfig};
use crate::spectral::frequency_strength;
use crate::tensor::RealTensor;

/// `‖pred − target‖ / ‖target‖`.
pub fn relative_l2(pred: &RealTensor, target: &RealTensor) -> Result<f64> {
    if pred.shape() != target.shape() {
        return arg_err(format!("shape mismatch: {:?} vs {:?}", pred.shape(), target.shape()));
    }
    let denom = target.norm();
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let num: f64 = pred.data().iter().zip(target.data()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>().sqrt();
    Ok(num / denom)
}

/// Mean of the per-sample relative L2 errors.
pub fn mean_relative_l2(preds: &[RealTensor], targets: &[RealTensor]) -> Result<f64> {
    if preds.len() != targets.len() || preds.is_empty() {
        return arg_err("need equally many, and at least one, predictions and targets");
    }
    let mut sum = 0.0;
    for (p, t) in preds.iter().zip(targets) {
        sum += relative_l2(p, t)?;
    }
    Ok(sum / preds.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub lr_halving_period: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub scheduler: SchedulerConfig,
    /// Record real elapsed time in `wall_ms`; off keeps metrics byte-reproducible.
    pub wall_clock: bool,
    /// Fit the model's input/output [`Scaling`] to the training set before the first epoch.
    pub fit_scaling: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            batch_size: 8,
            lr0: 1e-3,
            lr_halving_period: 100,
            weight_decay: 5e-4,
            seed: 0,
            scheduler: SchedulerConfig::default(),
            wall_clock: false,
            fit_scaling: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return arg_err("epochs and batch_size must be at least 1");
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return arg_err("lr0 must be positive");
        }
        if !(self.weight_decay >= 0.0) {
            return arg_err("weight_decay must be non-negative");
        }
        self.scheduler.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_l2: f64,
    pub test_l2: f64,
    pub lr: f64,
    pub wall_ms: u64,
    /// Effective modes per layer and axis at the end of the epoch.
    pub modes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub epoch: usize,
    pub layer: usize,
    pub dim: usize,
    pub mode: usize,
    pub strength: f64,
}

/// Strength of every retained mode of every layer.
pub fn record_spectrum(model: &FnoModel, epoch: usize) -> Vec<SpectrumRow> {
    let mut rows = Vec::new();
    for (layer, block) in model.blocks.iter().enumerate() {
        for (dim, s) in frequency_strength(&block.spectral).strengths.into_iter().enumerate() {
            rows.extend(s.into_iter().enumerate().map(|(mode, strength)| SpectrumRow { epoch, layer, dim, mode, strength }));
        }
    }
    rows
}

/// Per-sample relative L2 of `model` on `ds`.
pub fn evaluate(model: &FnoModel, ds: &Dataset) -> Result<Vec<f64>> {
    ds.samples.iter().map(|s| relative_l2(&model.forward(&s.input)?, &s.output)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub struct Trainer {
    pub model: FnoModel,
    pub config: TrainConfig,
    pub adam: AdamState,
    pub scheduler: Scheduler,
    pub records: Vec<EpochRecord>,
    pub spectrum: Vec<SpectrumRow>,
    pub mode_log: Vec<ModeCheck>,
    rng: ChaCha8Rng,
    started: Instant,
}

impl Trainer {
    /// `grid` is the training resolution per axis; it bounds how far modes may grow.
    pub fn new(model: FnoModel, config: TrainConfig, grid: &[usize]) -> Result<Self> {
        config.validate()?;
        let scheduler = Scheduler::new(config.scheduler.clone(), &model, grid, config.seed)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x7261_696e));
        Ok(Self {
            model,
            config,
            adam: AdamState::new(),
            scheduler,
            records: Vec::new(),
            spectrum: Vec::new(),
            mode_log: Vec::new(),
            rng,
            started: Instant::now(),
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.records.len()
    }

    /// Runs one epoch: shuffled minibatches, spectrum snapshot, scheduler,
    /// then test evaluation of the (possibly expanded) model.
    pub fn step_epoch(&mut self, train: &Dataset, test: &Dataset) -> Result<&EpochRecord> {
        if train.is_empty() {
            return arg_err("training set is empty");
        }
        let epoch = self.records.len();
        if epoch == 0 && self.config.fit_scaling {
            self.model.scaling = Scaling::fit(train);
        }
        let lr = lr_at(epoch, self.config.lr0, self.config.lr_halving_period);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut self.rng);
        let mut losses = Vec::with_capacity(order.len());
        for batch in order.chunks(self.config.batch_size) {
            let mut total: Option<Gradients> = None;
            for &i in batch {
                let s = &train.samples[i];
                let (loss, grads) = self.model.loss_and_grads(&s.input, &s.output)?;
                losses.push(loss);
                match total.as_mut() {
                    Some(t) => t.accumulate(&grads),
                    None => total = Some(grads),
                }
            }
            let mut grads = total.expect("non-empty batch");
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut self.model, &grads, &mut self.adam, lr, self.config.weight_decay)?;
        }
        let train_l2 = mean(&losses);
        if !train_l2.is_finite() || !self.model.flatten_params().iter().all(|x| x.is_finite()) {
            self.push_record(epoch, f64::NAN, f64::NAN, lr);
            return Err(Error::NonFinite { epoch });
        }
        self.spectrum.extend(record_spectrum(&self.model, epoch));
        let rows = self.scheduler.on_epoch_end(epoch, train_l2, &mut self.model, &mut self.adam)?;
        self.mode_log.extend(rows);
        let test_l2 = mean(&evaluate(&self.model, test)?);
        self.push_record(epoch, train_l2, test_l2, lr);
        Ok(self.records.last().unwrap())
    }

    fn push_record(&mut self, epoch: usize, train_l2: f64, test_l2: f64, lr: f64) {
        let wall_ms = if self.config.wall_clock { self.started.elapsed().as_millis() as u64 } else { 0 };
        self.records.push(EpochRecord { epoch, train_l2, test_l2, lr, wall_ms, modes: self.model.model_modes() });
    }

    /// Trains for the configured number of epochs.
    pub fn run(&mut self, train: &Dataset, test: &Dataset) -> Result<()> {
        while self.records.len() < self.config.epochs {
            self.step_epoch(train, test)?;
        }
        Ok(())
    }
}

/// Trains a fresh copy of `model` and returns the finished trainer.
pub fn train(model: FnoModel, train: &Dataset, test: &Dataset, config: TrainConfig) -> Result<Trainer> {
    let Some(n) = train.resolution() else {
        return arg_err("training set is empty");
    };
    let grid = vec![n; model.config.spatial_dims];
    let mut trainer = Trainer::new(model, config, &grid)?;
    trainer.run(train, test)?;
    Ok(trainer)
}

fn modes_cell(m: &[usize]) -> String {
    m.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("x")
}

pub fn metrics_csv(records: &[EpochRecord], layers: usize) -> String {
    let mut out = String::from("epoch,train_l2,test_l2,lr,wall_ms");
    for l in 1..=layers {
        write!(out, ",K_l{l}").unwrap();
    }
    out.push('\n');
    for r in records {
        write!(out, "{},{},{},{},{}", r.epoch, r.train_l2, r.test_l2, r.lr, r.wall_ms).unwrap();
        for m in &r.modes {
            write!(out, ",{}", modes_cell(m)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("epoch,layer,dim,mode,strength\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.epoch, r.layer, r.dim, r.mode, r.strength).unwrap();
    }
    out
}

pub fn modes_csv(rows: &[ModeCheck]) -> String {
    let mut out = String::from("epoch,layer,dim,k_before,k_after,ratio\n");
    for r in rows {
        let ratio = r.ratio.map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.epoch, r.layer, r.dim, r.k_before, r.k_after, ratio).unwrap();
    }
    out
}
