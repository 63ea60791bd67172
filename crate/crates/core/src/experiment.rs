//! Experiment configs and the commands behind the `ifno` binary.
//!
//! A config is TOML with the sections `[experiment]`, `[data]`, `[model]`,
//! `[train]` and `[scheduler]`. Every key is optional; missing keys take
//! problem-dependent defaults and unknown keys are rejected.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::checkpoint;
use crate::data::{read_dataset, write_dataset, Dataset, PdeSetup, Problem};
use crate::error::{arg_err, Error, Result};
use crate::model::{default_init_scale, Activation, FnoConfig, FnoModel, Normalization};
use crate::plot;
use crate::scheduler::{SchedulerConfig, SchedulerVariant};
use crate::train::{evaluate, metrics_csv, modes_csv, spectrum_csv, TrainConfig, Trainer};

#[derive(Clone, Debug, PartialEq)]
pub struct DataConfig {
    /// Base seed of the generated inputs.
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Grid the reference solutions are computed and stored on.
    pub generate_resolution: usize,
    /// Grid the model is trained on (stored data is subsampled).
    pub train_resolution: usize,
    pub setup: PdeSetup,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Seed of model initialization, shuffling and new spectral modes.
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataConfig,
    pub model: FnoConfig,
    pub train: TrainConfig,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    data: RawData,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    train: RawTrain,
    #[serde(default)]
    scheduler: RawScheduler,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    problem: Option<Problem>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawData {
    seed: Option<u64>,
    n_train: Option<usize>,
    n_test: Option<usize>,
    generate_resolution: Option<usize>,
    train_resolution: Option<usize>,
    tau: Option<f64>,
    alpha_cov: Option<f64>,
    amplitude: Option<f64>,
    viscosity: Option<f64>,
    t_final: Option<f64>,
    hi: Option<f64>,
    lo: Option<f64>,
    train_path: Option<PathBuf>,
    test_path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModesSpec {
    All(usize),
    PerAxis(Vec<usize>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    layers: Option<usize>,
    channels: Option<usize>,
    modes: Option<ModesSpec>,
    buffer: Option<usize>,
    activation: Option<Activation>,
    normalization: Option<Normalization>,
    init_scale: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr0: Option<f64>,
    lr_halving_period: Option<usize>,
    weight_decay: Option<f64>,
    wall_clock: Option<bool>,
    fit_scaling: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScheduler {
    variant: Option<SchedulerVariant>,
    alpha: Option<f64>,
    check_interval: Option<usize>,
    loss_epsilon: Option<f64>,
    loss_patience: Option<usize>,
    loss_step: Option<usize>,
    max_modes: Option<usize>,
}

impl ExperimentConfig {
    /// Desk-scale defaults. Burgers: 1024-point data trained at 256, learning
    /// rate halved every 50 epochs, weight decay 1e-4. Darcy: 256² data
    /// trained at 52², halving every 100 epochs, weight decay 5e-4.
    pub fn defaults(problem: Problem) -> Self {
        let (generate_resolution, train_resolution, halving, wd) = match problem {
            Problem::Burgers => (1024, 256, 50, 1e-4),
            Problem::Darcy => (256, 52, 100, 5e-4),
        };
        let mut model = FnoConfig::new(problem.spatial_dims());
        model.grid = problem.grid_kind();
        if problem == Problem::Burgers {
            // Per-sample normalization discards the input amplitude, which the
            // Burgers solution map depends on.
            model.normalization = Normalization::None;
        }
        ExperimentConfig {
            problem,
            seed: 0,
            out: PathBuf::from(format!("runs/{}", problem.name())),
            data: DataConfig {
                seed: 0,
                n_train: 20,
                n_test: 100,
                generate_resolution,
                train_resolution,
                setup: PdeSetup::for_problem(problem),
                train_path: None,
                test_path: None,
            },
            model,
            train: TrainConfig { lr_halving_period: halving, weight_decay: wd, ..TrainConfig::default() },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().to_string()))?;
        let problem = raw.experiment.problem.unwrap_or(Problem::Burgers);
        let mut cfg = Self::defaults(problem);
        let e = raw.experiment;
        set(&mut cfg.seed, e.seed);
        set(&mut cfg.out, e.out);

        let d = raw.data;
        let data = &mut cfg.data;
        set(&mut data.seed, d.seed);
        set(&mut data.n_train, d.n_train);
        set(&mut data.n_test, d.n_test);
        set(&mut data.generate_resolution, d.generate_resolution);
        set(&mut data.train_resolution, d.train_resolution);
        let s = &mut data.setup;
        let tau_or_alpha_changed = d.tau.is_some() || d.alpha_cov.is_some();
        set(&mut s.tau, d.tau);
        set(&mut s.alpha_cov, d.alpha_cov);
        if problem == Problem::Burgers && tau_or_alpha_changed {
            s.amplitude = crate::data::unit_variance_amplitude(s.tau, s.alpha_cov);
        }
        set(&mut s.amplitude, d.amplitude);
        set(&mut s.viscosity, d.viscosity);
        set(&mut s.t_final, d.t_final);
        set(&mut s.hi, d.hi);
        set(&mut s.lo, d.lo);
        data.train_path = d.train_path;
        data.test_path = d.test_path;

        let m = raw.model;
        let model = &mut cfg.model;
        set(&mut model.layers, m.layers);
        if let Some(c) = m.channels {
            model.channels = c;
            model.init_scale = if c > 0 { default_init_scale(c) } else { 0.0 };
        }
        match m.modes {
            Some(ModesSpec::All(k)) => model.modes = vec![k; model.spatial_dims],
            Some(ModesSpec::PerAxis(v)) => model.modes = v,
            None => {}
        }
        set(&mut model.buffer, m.buffer);
        set(&mut model.activation, m.activation);
        set(&mut model.normalization, m.normalization);
        set(&mut model.init_scale, m.init_scale);

        let t = raw.train;
        let train = &mut cfg.train;
        set(&mut train.epochs, t.epochs);
        set(&mut train.batch_size, t.batch_size);
        set(&mut train.lr0, t.lr0);
        set(&mut train.lr_halving_period, t.lr_halving_period);
        set(&mut train.weight_decay, t.weight_decay);
        set(&mut train.wall_clock, t.wall_clock);
        set(&mut train.fit_scaling, t.fit_scaling);

        let sc = raw.scheduler;
        let sched = &mut train.scheduler;
        set(&mut sched.variant, sc.variant);
        set(&mut sched.alpha, sc.alpha);
        set(&mut sched.check_interval, sc.check_interval);
        set(&mut sched.loss_epsilon, sc.loss_epsilon);
        set(&mut sched.loss_patience, sc.loss_patience);
        set(&mut sched.loss_step, sc.loss_step);
        if sc.max_modes.is_some() {
            sched.max_modes = sc.max_modes;
        }
        cfg.train.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let named = |key: &str, r: Result<()>| r.map_err(|e| Error::Config(format!("{key}: {e}")));
        named("model", self.model.validate())?;
        named("train", self.train.validate())?;
        let d = &self.data;
        let s = &d.setup;
        if !(s.tau > 0.0) {
            return Err(Error::Config("data.tau must be positive".into()));
        }
        if !(s.amplitude > 0.0) {
            return Err(Error::Config("data.amplitude must be positive".into()));
        }
        if !(s.viscosity > 0.0) {
            return Err(Error::Config("data.viscosity must be positive".into()));
        }
        if !(s.t_final >= 0.0) {
            return Err(Error::Config("data.t_final must be non-negative".into()));
        }
        if !(s.hi > s.lo && s.lo > 0.0) {
            return Err(Error::Config("data.hi and data.lo need hi > lo > 0".into()));
        }
        crate::data::dataset::subsample_stride(self.problem.grid_kind(), d.generate_resolution, d.train_resolution)
            .map_err(|e| Error::Config(format!("data.train_resolution: {e}")))?;
        if self.model.spatial_dims != self.problem.spatial_dims() {
            return Err(Error::Config("model.modes must have one entry per spatial axis".into()));
        }
        Ok(())
    }

    pub fn train_path(&self, out: &Path) -> PathBuf {
        self.data.train_path.clone().unwrap_or_else(|| out.join("train.ifnd"))
    }

    pub fn test_path(&self, out: &Path) -> PathBuf {
        self.data.test_path.clone().unwrap_or_else(|| out.join("test.ifnd"))
    }

    /// The fully resolved config as TOML; parsing it back gives an equal config.
    pub fn to_toml(&self) -> String {
        let d = &self.data;
        let s = &d.setup;
        let m = &self.model;
        let t = &self.train;
        let sc = &t.scheduler;
        let mut out = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| format!("{:?}\n", p.display().to_string()));
        out += &format!(
            "[experiment]\nproblem = \"{}\"\nseed = {}\nout = {:?}\n\n",
            self.problem.name(),
            self.seed,
            self.out.display().to_string()
        );
        out += &format!(
            "[data]\nseed = {}\nn_train = {}\nn_test = {}\ngenerate_resolution = {}\ntrain_resolution = {}\ntau = {:?}\nalpha_cov = {:?}\namplitude = {:?}\nviscosity = {:?}\nt_final = {:?}\nhi = {:?}\nlo = {:?}\n",
            d.seed, d.n_train, d.n_test, d.generate_resolution, d.train_resolution, s.tau, s.alpha_cov, s.amplitude, s.viscosity, s.t_final, s.hi, s.lo
        );
        if let Some(p) = path(&d.train_path) {
            out += &format!("train_path = {p}");
        }
        if let Some(p) = path(&d.test_path) {
            out += &format!("test_path = {p}");
        }
        out += &format!(
            "\n[model]\nlayers = {}\nchannels = {}\nmodes = {:?}\nbuffer = {}\nactivation = \"relu\"\nnormalization = \"{}\"\ninit_scale = {:?}\n\n",
            m.layers,
            m.channels,
            m.modes,
            m.buffer,
            match m.normalization {
                Normalization::None => "none",
                Normalization::Instance => "instance",
            },
            m.init_scale
        );
        out += &format!(
            "[train]\nepochs = {}\nbatch_size = {}\nlr0 = {:?}\nlr_halving_period = {}\nweight_decay = {:?}\nwall_clock = {}\nfit_scaling = {}\n\n",
            t.epochs, t.batch_size, t.lr0, t.lr_halving_period, t.weight_decay, t.wall_clock, t.fit_scaling
        );
        out += &format!(
            "[scheduler]\nvariant = \"{}\"\nalpha = {:?}\ncheck_interval = {}\nloss_epsilon = {:?}\nloss_patience = {}\nloss_step = {}\n",
            match sc.variant {
                SchedulerVariant::Frequency => "frequency",
                SchedulerVariant::Loss => "loss",
                SchedulerVariant::None => "none",
            },
            sc.alpha,
            sc.check_interval,
            sc.loss_epsilon,
            sc.loss_patience,
            sc.loss_step
        );
        if let Some(mm) = sc.max_modes {
            out += &format!("max_modes = {mm}\n");
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

/// What a dataset file records about how it was generated.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationRecord {
    pub problem: Problem,
    pub split: u64,
    pub seed: u64,
    pub count: usize,
    pub resolution: usize,
    pub tau: f64,
    pub alpha_cov: f64,
    pub amplitude: f64,
    pub viscosity: f64,
    pub t_final: f64,
    pub hi: f64,
    pub lo: f64,
}

impl GenerationRecord {
    fn new(setup: &PdeSetup, split: u64, seed: u64, count: usize, resolution: usize) -> Self {
        Self {
            problem: setup.problem,
            split,
            seed,
            count,
            resolution,
            tau: setup.tau,
            alpha_cov: setup.alpha_cov,
            amplitude: setup.amplitude,
            viscosity: setup.viscosity,
            t_final: setup.t_final,
            hi: setup.hi,
            lo: setup.lo,
        }
    }

    pub fn to_toml(&self) -> String {
        format!(
            "problem = \"{}\"\nsplit = {}\nseed = {}\ncount = {}\nresolution = {}\ntau = {:?}\nalpha_cov = {:?}\namplitude = {:?}\nviscosity = {:?}\nt_final = {:?}\nhi = {:?}\nlo = {:?}\n",
            self.problem.name(),
            self.split,
            self.seed,
            self.count,
            self.resolution,
            self.tau,
            self.alpha_cov,
            self.amplitude,
            self.viscosity,
            self.t_final,
            self.hi,
            self.lo
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("dataset generation record: {e}")))
    }

    pub fn setup(&self) -> PdeSetup {
        PdeSetup {
            problem: self.problem,
            tau: self.tau,
            alpha_cov: self.alpha_cov,
            amplitude: self.amplitude,
            viscosity: self.viscosity,
            t_final: self.t_final,
            hi: self.hi,
            lo: self.lo,
        }
    }

    /// Same samples drawn again on a different grid.
    pub fn regenerate(&self, resolution: usize) -> Result<Dataset> {
        let rec = GenerationRecord { resolution, ..self.clone() };
        self.setup().generate(self.count, resolution, self.seed, self.split, &rec.to_toml())
    }
}

/// Generates one split as recorded by [`GenerationRecord`].
pub fn generate_split(cfg: &ExperimentConfig, split: u64) -> Result<Dataset> {
    let d = &cfg.data;
    let count = if split == 0 { d.n_train } else { d.n_test };
    let rec = GenerationRecord::new(&d.setup, split, d.seed, count, d.generate_resolution);
    d.setup.generate(count, d.generate_resolution, d.seed, split, &rec.to_toml())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateReport {
    pub train: PathBuf,
    pub test: PathBuf,
    pub manifest: PathBuf,
    pub config_hash: String,
}

/// Writes `train.ifnd`, `test.ifnd` and `manifest.toml` into `out`.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<GenerateReport> {
    fs::create_dir_all(out)?;
    let train_path = cfg.train_path(out);
    let test_path = cfg.test_path(out);
    write_dataset(&generate_split(cfg, 0)?, &train_path)?;
    write_dataset(&generate_split(cfg, 1)?, &test_path)?;
    let hash = cfg.hash();
    let manifest = out.join("manifest.toml");
    let text = format!(
        "seed = {}\nconfig_hash = \"sha256:{}\"\ntrain = {:?}\ntest = {:?}\nn_train = {}\nn_test = {}\nresolution = {}\n\n# resolved config\n{}",
        cfg.data.seed,
        hash,
        train_path.display().to_string(),
        test_path.display().to_string(),
        cfg.data.n_train,
        cfg.data.n_test,
        cfg.data.generate_resolution,
        cfg.to_toml().lines().map(|l| if l.is_empty() { String::new() } else { format!("# {l}") }).collect::<Vec<_>>().join("\n")
    );
    fs::write(&manifest, text + "\n")?;
    Ok(GenerateReport { train: train_path, test: test_path, manifest, config_hash: hash })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    pub train_l2: f64,
    pub test_l2: f64,
    pub modes: Vec<Vec<usize>>,
    pub out: PathBuf,
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modes: Vec<String> =
            self.modes.iter().map(|m| m.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("x")).collect();
        write!(
            f,
            "final epochs={} train_l2={} test_l2={} modes={}",
            self.epochs,
            self.train_l2,
            self.test_l2,
            modes.join(",")
        )
    }
}

fn load_split(path: &Path, problem: Problem, what: &str) -> Result<Dataset> {
    if !path.is_file() {
        return arg_err(format!("{what} dataset {} not found; run `generate` first", path.display()));
    }
    let ds = read_dataset(path)?;
    if ds.problem != problem {
        return arg_err(format!("{} holds {} data, config expects {}", path.display(), ds.problem.name(), problem.name()));
    }
    Ok(ds)
}

/// Trains on the generated data and writes `model.ifnm`, `metrics.csv`,
/// `spectrum.csv`, `modes.csv` and the resolved `config.toml` into `out`.
/// Outputs are written even when training aborts on a non-finite loss.
/// A trainer for a freshly initialized model sized for `train`; the
/// experiment seed drives both initialization and shuffling.
pub fn new_trainer(cfg: &ExperimentConfig, train: &Dataset) -> Result<Trainer> {
    let (Some(first), Some(n)) = (train.samples.first(), train.resolution()) else {
        return arg_err("training dataset is empty");
    };
    let model = FnoModel::init(cfg.model.clone(), first.input_channels(), first.output_channels(), cfg.seed)?;
    let mut tc = cfg.train.clone();
    tc.seed = cfg.seed;
    Trainer::new(model, tc, &vec![n; cfg.model.spatial_dims])
}

pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<TrainReport> {
    let train = load_split(&cfg.train_path(out), cfg.problem, "training")?;
    let test = load_split(&cfg.test_path(out), cfg.problem, "test")?;
    let r = cfg.data.train_resolution;
    let train = train.at_resolution(r)?;
    let test = test.at_resolution(r)?;
    let mut trainer = new_trainer(cfg, &train)?;
    let outcome = trainer.run(&train, &test);
    fs::create_dir_all(out)?;
    write_outputs(&trainer, cfg, out)?;
    outcome?;
    let last = trainer.records.last().expect("at least one epoch");
    Ok(TrainReport {
        epochs: trainer.records.len(),
        train_l2: last.train_l2,
        test_l2: last.test_l2,
        modes: last.modes.clone(),
        out: out.to_path_buf(),
    })
}

fn write_outputs(trainer: &Trainer, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    checkpoint::save(&trainer.model, &out.join("model.ifnm"))?;
    fs::write(out.join("metrics.csv"), metrics_csv(&trainer.records, trainer.model.blocks.len()))?;
    fs::write(out.join("spectrum.csv"), spectrum_csv(&trainer.spectrum))?;
    fs::write(out.join("modes.csv"), modes_csv(&trainer.mode_log))?;
    fs::write(out.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub resolution: usize,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation of the per-sample errors.
    pub std: f64,
    pub losses: Vec<f64>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "resolution={} samples={} relative_l2={} ± {}", self.resolution, self.count, self.mean, self.std)
    }
}

/// Evaluates a checkpoint on a dataset. A coarser `resolution` subsamples the
/// stored grid; a finer one regenerates the same samples on that grid.
pub fn cmd_eval(checkpoint_path: &Path, dataset_path: &Path, resolution: Option<usize>) -> Result<EvalReport> {
    let model = checkpoint::load(checkpoint_path)?;
    if !dataset_path.is_file() {
        return arg_err(format!("dataset {} not found", dataset_path.display()));
    }
    let ds = read_dataset(dataset_path)?;
    let Some(n) = ds.resolution() else {
        return arg_err("dataset is empty");
    };
    let target = resolution.unwrap_or(n);
    let retained = model.max_retained().into_iter().max().unwrap_or(0);
    if target < retained {
        return arg_err(format!("resolution {target} is below the {retained} modes the model retains"));
    }
    let ds = if target <= n {
        ds.at_resolution(target)?
    } else {
        let rec = GenerationRecord::parse(&ds.config)?;
        if rec.problem == Problem::Darcy {
            return arg_err("Darcy coefficients are not nested across grids; generate the finer data directly");
        }
        rec.regenerate(target)?
    };
    let losses = evaluate(&model, &ds)?;
    let count = losses.len();
    let mean = losses.iter().sum::<f64>() / count as f64;
    let std = (losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / count as f64).sqrt();
    Ok(EvalReport { resolution: target, count, mean, std, losses })
}

/// CSV `layer,dim,mode,strength` of a checkpoint's spectral weights.
pub fn cmd_inspect_spectrum(checkpoint_path: &Path) -> Result<String> {
    let model = checkpoint::load(checkpoint_path)?;
    let mut out = String::from("layer,dim,mode,strength,effective_modes\n");
    for row in crate::train::record_spectrum(&model, 0) {
        let k = model.blocks[row.layer].spectral.effective_modes()[row.dim];
        out += &format!("{},{},{},{},{}\n", row.layer, row.dim, row.mode, row.strength, k);
    }
    Ok(out)
}

/// Renders each CSV to `<stem>.svg` in `out`.
pub fn cmd_plot(csvs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if csvs.is_empty() {
        return arg_err("no CSV files given");
    }
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for path in csvs {
        let name = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{name}: {e}")))?;
        let svg = plot::plot_csv(&name, &text)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
        let target = out.join(format!("{stem}.svg"));
        fs::write(&target, svg)?;
        written.push(target);
    }
    Ok(written)
}

/// A frequency-variant config with a smaller model, for quick runs and tests.
pub fn quick_config(problem: Problem) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(problem);
    cfg.data.n_train = 4;
    cfg.data.n_test = 4;
    match problem {
        Problem::Burgers => {
            cfg.data.generate_resolution = 256;
            cfg.data.train_resolution = 64;
        }
        Problem::Darcy => {
            cfg.data.generate_resolution = 33;
            cfg.data.train_resolution = 17;
        }
    }
    cfg.model.layers = 2;
    cfg.model.channels = 8;
    cfg.model.init_scale = default_init_scale(8);
    cfg.train.epochs = 3;
    cfg.train.batch_size = 2;
    cfg.train.scheduler = SchedulerConfig::default();
    cfg
}
